#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace floorloc {

/// Seeded random generator with fixed sampling algorithms.
///
/// std::mt19937_64 has a fully specified output sequence, but the standard
/// distributions do not; Box-Muller and explicit scaling are used instead so
/// that identical seeds give bit-identical streams on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi] via rejection-free scaling (hi - lo small
    /// relative to 2^64, bias negligible and deterministic).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(engine_() % span);
    }

    /// Standard normal via Box-Muller (one draw per call, pair cached).
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    /// Derive an independent child seed (for per-scenario streams).
    std::uint64_t fork() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace floorloc
