#include "scakit/rng.hpp"

#include <cmath>
#include <numbers>

#include "scakit/errors.hpp"

namespace scakit {

namespace {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

std::uint64_t stream_key(std::uint64_t seed, std::string_view stream) {
    return mix64(seed ^ mix64(fnv1a64(stream)));
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream,
                          std::uint64_t index) {
    return mix64(stream_key(seed, stream) + (index + 1) * kGamma);
}

Rng::Rng(std::uint64_t seed, std::string_view stream)
    : key_(stream_key(seed, stream)) {}

std::uint64_t Rng::next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * kGamma);
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + uniform() * (hi - lo);
}

double Rng::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    cached_normal_ = r * std::sin(a);
    has_cached_normal_ = true;
    return r * std::cos(a);
}

double Rng::normal(double mean, double sd) { return mean + sd * normal(); }

double Rng::exponential(double rate) {
    if (!(rate > 0.0)) throw ValueError("exponential rate must be positive");
    return -std::log(1.0 - uniform()) / rate;
}

double Rng::gamma(double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0))
        throw ValueError("gamma shape and scale must be positive");
    if (shape < 1.0) {
        const double u = uniform();
        return gamma(shape + 1.0, scale) * std::pow(1.0 - u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v * scale;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v)))
            return d * v * scale;
    }
}

double Rng::rectified_normal(double mean, double variance) {
    if (!(variance > 0.0))
        throw ValueError("rectified_normal variance must be positive");
    const double sd = std::sqrt(variance);
    const double alpha = -mean / sd;  // standardized truncation point
    double z;
    if (alpha <= 0.0) {
        do {
            z = normal();
        } while (z < alpha);
    } else {
        const double lambda = 0.5 * (alpha + std::sqrt(alpha * alpha + 4.0));
        for (;;) {
            z = alpha + exponential(lambda);
            const double d = z - lambda;
            if (uniform() < std::exp(-0.5 * d * d)) break;
        }
    }
    return mean + sd * z;
}

}  // namespace scakit
