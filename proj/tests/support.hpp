// Small helpers shared by the unit tests.
#pragma once

#include <atomic>
#include <filesystem>
#include <string>

#include <unistd.h>

#include "edgeoff/common/rng.hpp"
#include "edgeoff/nn/param_store.hpp"
#include "edgeoff/nn/tensor.hpp"

namespace edgeoff::testing {

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("edgeoff_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

inline nn::Tensor2 random_tensor(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
    nn::Tensor2 t(rows, cols);
    for (auto& v : t.values()) v = rng.uniform(-scale, scale);
    return t;
}

/// Every parameter, weights and biases alike, uniform in +-scale.
inline void randomize(nn::ParamStore& store, Rng& rng, double scale = 0.5) {
    for (auto& p : store.params()) {
        for (auto& v : p.value.values()) v = rng.uniform(-scale, scale);
    }
}

}  // namespace edgeoff::testing
