/**
 * @file checkpoint.hpp
 * @brief Text manifest plus flat little-endian f64 payload.
 *
 * Manifest layout:
 *
 *   edgeoff-checkpoint 1
 *   endianness little
 *   dtype f64
 *   payload <file name>
 *   step <u64>
 *   optimizer <0|1>
 *   params <count>
 *   <name> <rows> <cols> <byte offset>
 *   ...
 *
 * With the optimizer flag set, each parameter contributes value, first and
 * second moment blocks in that order.
 */
#pragma once

#include <filesystem>
#include <string>

#include "edgeoff/nn/param_store.hpp"

namespace edgeoff::nn {

/// Writes `<dir>/<stem>.manifest` and `<dir>/<stem>.bin`. Throws IoError.
void save_checkpoint(const std::filesystem::path& dir, const std::string& stem, const ParamStore& store,
                     bool with_optimizer);

/// Loads into a store with the same layout. Throws CompatibilityError on a
/// name or shape mismatch, IoError on unreadable or truncated files.
void load_checkpoint(const std::filesystem::path& dir, const std::string& stem, ParamStore& store,
                     bool with_optimizer);

bool checkpoint_exists(const std::filesystem::path& dir, const std::string& stem);

}  // namespace edgeoff::nn
