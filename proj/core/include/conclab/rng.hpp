#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace conclab {

/// Identifies one reproducible random stream. Same (master_seed, stream_id)
/// gives a bit-identical draw sequence on the same build; distinct stream_ids
/// give statistically independent streams (the engine derives its key from
/// both words, so streams never share state).
struct RngState {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;

    /// Hash-derived child stream; safe to nest.
    [[nodiscard]] RngState sub(std::uint64_t i) const noexcept;
};

namespace detail {

// SplitMix64 finalizer (Stafford mix13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

} // namespace detail

inline RngState RngState::sub(std::uint64_t i) const noexcept {
    return {master_seed, detail::mix64(stream_id ^ detail::mix64(i + detail::kGolden))};
}

/// Counter-based generator: output k is a pure function of (key, k), where
/// the key is derived from an RngState. This is the SplitMix64 sequence with
/// a per-stream key, so replicas can be laid out on independent streams and
/// regenerated in any order.
class CounterRng {
public:
    explicit CounterRng(RngState s) noexcept
        : key_(detail::mix64(s.master_seed ^ detail::mix64(s.stream_id + 0x632BE59BD9B4E019ull))) {}

    std::uint64_t next_u64() noexcept {
        return detail::mix64(key_ + (counter_++) * detail::kGolden);
    }

    /// Uniform on the open interval (0, 1), 52-bit resolution.
    double next_unit() noexcept {
        return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
    }

    /// Standard normal via Box-Muller; one spare value is cached.
    double next_gaussian() noexcept {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_unit();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Uniform sign in {-1, +1}.
    double next_sign() noexcept { return (next_u64() & 1u) ? 1.0 : -1.0; }

    /// Gamma(shape, scale) via Marsaglia-Tsang; shape < 1 handled by the
    /// usual boost G(a) = G(a+1) * U^{1/a}.
    double next_gamma(double shape, double scale) {
        if (!(shape > 0.0) || !(scale > 0.0))
            throw std::domain_error("next_gamma: shape and scale must be positive");
        if (shape < 1.0) {
            const double u = next_unit();
            return next_gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = next_gaussian();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = next_unit();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
        }
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace conclab
