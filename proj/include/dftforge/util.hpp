#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace dftforge {

// Domain error carrying a human-readable message with object path context
// (module/cell/bit) where applicable. The C API maps these to status codes.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);
bool file_exists(const std::string& path);

// FNV-1a 64-bit over bytes, rendered as 16 hex chars. Used for content-drift
// detection in manifests and indexes; not a cryptographic hash.
std::uint64_t fnv1a64(const std::string& bytes);
std::string content_hash(const std::string& bytes);

std::string to_lower(const std::string& s);
std::vector<std::string> split_lines(const std::string& s);
std::string trim(const std::string& s);

// Deterministic RNG. std::mt19937_64 output is pinned by the standard, but
// the std distributions are not; every draw we need is derived here from raw
// engine output so seeded runs reproduce bit-for-bit across toolchains.
class DetRng {
public:
    explicit DetRng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1) from the top 53 bits.
    double next_double() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Uniform index in [0, n), rejection-sampled to avoid modulo bias.
    std::size_t index(std::size_t n) {
        if (n == 0) throw Error("DetRng::index: empty range");
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do { v = eng_(); } while (v >= limit);
        return static_cast<std::size_t>(v % n);
    }

    bool coin() { return (eng_() & 1u) != 0; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 eng_;
};

} // namespace dftforge
