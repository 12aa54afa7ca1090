#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace slint {

class SlintError : public std::runtime_error {
  public:
    explicit SlintError(const std::string& msg) : std::runtime_error(msg) {}
};

// Seeded generator used everywhere a contract promises determinism.
using Rng = std::mt19937_64;

inline Rng make_rng(uint64_t seed) { return Rng(seed); }

// Derives an independent stream for (seed, index) so per-query generators
// do not collide.
uint64_t derive_seed(uint64_t seed, uint64_t index);

double uniform_real(Rng& rng, double lo, double hi);
int uniform_int(Rng& rng, int lo, int hi);  // inclusive bounds
double normal(Rng& rng, double mean, double stddev);

// Fisher-Yates over indices [0, n); deterministic given the generator state.
std::vector<int> shuffled_indices(int n, Rng& rng);

// Sample k distinct values from [0, n) in selection order.
std::vector<int> sample_without_replacement(int n, int k, Rng& rng);

// FNV-1a 64-bit, used for content hashes of parameter blocks and files.
uint64_t fnv1a(const void* bytes, size_t n, uint64_t h = 0xcbf29ce484222325ull);
uint64_t fnv1a_doubles(std::span<const double> xs, uint64_t h = 0xcbf29ce484222325ull);
uint64_t hash_file(const std::string& path);

std::string hex_u64(uint64_t v);

}  // namespace slint
