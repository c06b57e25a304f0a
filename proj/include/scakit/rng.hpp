#pragma once

#include <cstdint>
#include <string_view>

namespace scakit {

// splitmix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view s);

// Key identifying the (seed, stream-label) pair.
std::uint64_t stream_key(std::uint64_t seed, std::string_view stream);

// Deterministic sub-seed for the index-th task of a named group of parallel
// work (consensus runs, ICM runs, sweep cells). Equals the index-th raw draw
// of Rng(seed, stream), so derived seeds never collide with each other.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream,
                          std::uint64_t index);

// Counter-based generator: draw i is mix64(key + (i+1)*gamma) with the key
// derived from (seed, stream label). Handles carry no shared state, so any
// number of them can run concurrently; the same (seed, stream) yields the
// same sequence on every platform. This is splitmix64 with a per-stream
// start state.
class Rng {
public:
    Rng(std::uint64_t seed, std::string_view stream);

    std::uint64_t next_u64();

    // Uniform on [0, 1), 53-bit resolution.
    double uniform();
    double uniform(double lo, double hi);

    // Standard normal via Box-Muller; the paired draw is cached.
    double normal();
    double normal(double mean, double sd);

    double exponential(double rate);

    // Marsaglia-Tsang squeeze method; shape < 1 handled by boosting.
    double gamma(double shape, double scale);

    // Draw from N(mean, variance) truncated to [0, inf). Plain rejection
    // when the bound is below the mean, Robert's shifted-exponential
    // proposal otherwise (efficient for arbitrarily negative means).
    double rectified_normal(double mean, double variance);

    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

}  // namespace scakit
