#include "edgeoff/nn/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

#include "edgeoff/common/error.hpp"
#include "edgeoff/common/text.hpp"

namespace edgeoff::nn {
namespace {

void put_f64(std::vector<char>& out, double v) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
}

double get_f64(const char* p) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[b])) << (8 * b);
    double v = 0.0;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

std::string expect_line(std::istream& in, const std::string& path) {
    std::string line;
    if (!std::getline(in, line)) throw IoError(path + ": truncated manifest");
    return line;
}

std::string expect_field(std::istream& in, const std::string& path, const std::string& key) {
    const auto line = expect_line(in, path);
    const auto parts = split(line, ' ');
    if (parts.size() != 2 || parts[0] != key) throw IoError(path + ": expected '" + key + " <value>', got '" + line + "'");
    return parts[1];
}

}  // namespace

bool checkpoint_exists(const std::filesystem::path& dir, const std::string& stem) {
    return std::filesystem::exists(dir / (stem + ".manifest")) && std::filesystem::exists(dir / (stem + ".bin"));
}

void save_checkpoint(const std::filesystem::path& dir, const std::string& stem, const ParamStore& store,
                     bool with_optimizer) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::vector<char> payload;
    std::ostringstream manifest;
    manifest << "edgeoff-checkpoint 1\n"
             << "endianness little\n"
             << "dtype f64\n"
             << "payload " << stem << ".bin\n"
             << "step " << store.step() << "\n"
             << "optimizer " << (with_optimizer ? 1 : 0) << "\n"
             << "params " << store.size() << "\n";
    for (const auto& p : store.params()) {
        manifest << p.name << ' ' << p.value.rows() << ' ' << p.value.cols() << ' ' << payload.size() << '\n';
        for (double v : p.value.values()) put_f64(payload, v);
        if (with_optimizer) {
            for (double v : p.moment1.values()) put_f64(payload, v);
            for (double v : p.moment2.values()) put_f64(payload, v);
        }
    }
    const auto manifest_path = dir / (stem + ".manifest");
    const auto payload_path = dir / (stem + ".bin");
    std::ofstream bin(payload_path, std::ios::binary);
    if (!bin) throw IoError("cannot write " + payload_path.string());
    bin.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    std::ofstream man(manifest_path);
    if (!man) throw IoError("cannot write " + manifest_path.string());
    man << manifest.str();
    if (!bin || !man) throw IoError("write failed for checkpoint " + stem);
}

void load_checkpoint(const std::filesystem::path& dir, const std::string& stem, ParamStore& store,
                     bool with_optimizer) {
    const auto manifest_path = (dir / (stem + ".manifest")).string();
    std::ifstream man(manifest_path);
    if (!man) throw IoError("cannot read " + manifest_path);
    if (expect_line(man, manifest_path) != "edgeoff-checkpoint 1") throw IoError(manifest_path + ": not a checkpoint");
    if (expect_field(man, manifest_path, "endianness") != "little") {
        throw CompatibilityError(manifest_path + ": unsupported byte order");
    }
    if (expect_field(man, manifest_path, "dtype") != "f64") throw CompatibilityError(manifest_path + ": dtype");
    const auto payload_name = expect_field(man, manifest_path, "payload");
    std::uint64_t step = 0;
    std::uint64_t count = 0;
    if (!parse_u64(expect_field(man, manifest_path, "step"), step)) throw IoError(manifest_path + ": malformed step");
    const bool has_optimizer = expect_field(man, manifest_path, "optimizer") == "1";
    if (!parse_u64(expect_field(man, manifest_path, "params"), count)) {
        throw IoError(manifest_path + ": malformed parameter count");
    }
    if (with_optimizer && !has_optimizer) {
        throw CompatibilityError(manifest_path + ": checkpoint carries no optimizer state");
    }
    if (count != store.size()) {
        throw CompatibilityError(manifest_path + ": " + std::to_string(count) + " parameters, expected " +
                                 std::to_string(store.size()));
    }

    const auto payload_path = dir / payload_name;
    std::ifstream bin(payload_path, std::ios::binary);
    if (!bin) throw IoError("cannot read " + payload_path.string());
    std::vector<char> payload((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());

    for (std::size_t k = 0; k < store.size(); ++k) {
        const auto line = expect_line(man, manifest_path);
        const auto parts = split(line, ' ');
        if (parts.size() != 4) throw IoError(manifest_path + ": malformed entry '" + line + "'");
        auto& p = store[k];
        std::uint64_t rows = 0, cols = 0, offset = 0;
        if (!parse_u64(parts[1], rows) || !parse_u64(parts[2], cols) || !parse_u64(parts[3], offset)) {
            throw IoError(manifest_path + ": malformed entry '" + line + "'");
        }
        if (parts[0] != p.name || rows != p.value.rows() || cols != p.value.cols()) {
            throw CompatibilityError("checkpoint entry " + parts[0] + " " + parts[1] + "x" + parts[2] +
                                     " does not match parameter " + p.name + " " + std::to_string(p.value.rows()) +
                                     "x" + std::to_string(p.value.cols()));
        }
        const std::size_t blocks = has_optimizer ? 3 : 1;
        const std::size_t n = p.value.size();
        if (offset + blocks * n * 8 > payload.size()) throw IoError(payload_path.string() + ": truncated payload");
        const char* src = payload.data() + offset;
        for (std::size_t j = 0; j < n; ++j) p.value.data()[j] = get_f64(src + 8 * j);
        if (with_optimizer) {
            for (std::size_t j = 0; j < n; ++j) p.moment1.data()[j] = get_f64(src + 8 * (n + j));
            for (std::size_t j = 0; j < n; ++j) p.moment2.data()[j] = get_f64(src + 8 * (2 * n + j));
        }
        p.grad.fill(0.0);
    }
    if (with_optimizer) store.set_step(step);
}

}  // namespace edgeoff::nn
