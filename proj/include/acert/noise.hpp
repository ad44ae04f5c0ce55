#pragma once

// Counter-based random streams and the driving noises built from them.
// Every output is a pure function of (master_seed, stream_id, counter).

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace acert {

namespace detail {

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key)
{
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int r = 0; r < 10; ++r) {
        std::uint64_t p0 = std::uint64_t(M0) * ctr[0];
        std::uint64_t p1 = std::uint64_t(M1) * ctr[2];
        ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], std::uint32_t(p1), std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1],
               std::uint32_t(p0)};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

/// Inverse standard normal CDF, Wichura's AS241 (PPND16), relative accuracy ~1e-16.
inline double normal_quantile(double p)
{
    double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        double r = 0.180625 - q * q;
        return q *
               (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r +
                    45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
                 133.14166789178437745) * r + 3.387132872796366608) /
               (((((((5226.495278852545925 * r + 28729.085735721942674) * r + 39307.89580009271061) * r +
                    21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
                 42.313330701600911252) * r + 1.0);
    }
    double r = q < 0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
                   1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
                4.6303378461565452959) * r + 1.42343711074968357734) /
              (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
                   0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
                2.05319162663775882187) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
                   0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
                5.4637849111641143699) * r + 6.6579046435011037772) /
              (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
                   7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
                0.59983220655588793769) * r + 1.0);
    }
    return q < 0 ? -val : val;
}

} // namespace detail

/// Value-type random stream. `counter` indexes 64-bit outputs; two outputs
/// are produced per Philox block and the spare one is cached.
class RngStream {
public:
    RngStream() = default;
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id, std::uint64_t counter = 0)
        : seed_(master_seed), stream_(stream_id), counter_(counter)
    {
    }

    std::uint64_t master_seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_; }
    std::uint64_t counter() const { return counter_; }

    std::uint64_t next_u64()
    {
        std::uint64_t group = counter_ >> 3;
        if (group != cached_group_)
            refill(group);
        return cache_[counter_++ & 7];
    }

    /// Uniform on the open interval (0,1), 53-bit resolution.
    double uniform()
    {
        return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal by inversion, one uniform per draw.
    double normal() { return detail::normal_quantile(uniform()); }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

    /// Poisson variate by inversion of the CDF from one uniform.
    std::uint64_t poisson(double mean)
    {
        if (!(mean >= 0.0) || !std::isfinite(mean))
            throw std::invalid_argument("poisson: mean must be finite and >= 0");
        if (mean == 0.0)
            return 0;
        if (mean > 500.0) {
            // Exponential-gap counting stays exact for large means at O(mean) cost.
            std::uint64_t k = 0;
            double t = exponential(mean);
            while (t < 1.0) {
                ++k;
                t += exponential(mean);
            }
            return k;
        }
        double u = uniform();
        double p = std::exp(-mean);
        double cdf = p;
        std::uint64_t k = 0;
        while (u > cdf && p > 0.0) {
            ++k;
            p *= mean / double(k);
            cdf += p;
        }
        return k;
    }

private:
    std::uint64_t seed_ = 0;
    std::uint64_t stream_ = 0;
    std::uint64_t counter_ = 0;
    // Four consecutive blocks are generated together; the lanes are
    // independent, which lets the rounds overlap.
    void refill(std::uint64_t group)
    {
        std::uint32_t c[4][4], k0 = std::uint32_t(seed_), k1 = std::uint32_t(seed_ >> 32);
        for (int l = 0; l < 4; ++l) {
            std::uint64_t block = group * 4 + std::uint64_t(l);
            c[l][0] = std::uint32_t(block);
            c[l][1] = std::uint32_t(block >> 32);
            c[l][2] = std::uint32_t(stream_);
            c[l][3] = std::uint32_t(stream_ >> 32);
        }
        for (int r = 0; r < 10; ++r) {
            for (int l = 0; l < 4; ++l) {
                std::uint64_t p0 = std::uint64_t(0xD2511F53u) * c[l][0];
                std::uint64_t p1 = std::uint64_t(0xCD9E8D57u) * c[l][2];
                std::uint32_t n0 = std::uint32_t(p1 >> 32) ^ c[l][1] ^ k0;
                std::uint32_t n2 = std::uint32_t(p0 >> 32) ^ c[l][3] ^ k1;
                c[l][1] = std::uint32_t(p1);
                c[l][3] = std::uint32_t(p0);
                c[l][0] = n0;
                c[l][2] = n2;
            }
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        for (int l = 0; l < 4; ++l) {
            cache_[2 * l] = (std::uint64_t(c[l][1]) << 32) | c[l][0];
            cache_[2 * l + 1] = (std::uint64_t(c[l][3]) << 32) | c[l][2];
        }
        cached_group_ = group;
    }

    std::uint64_t cached_group_ = ~std::uint64_t(0);
    std::array<std::uint64_t, 8> cache_{};
};

inline RngStream make_stream(std::uint64_t master_seed, std::uint64_t stream_id)
{
    return RngStream(master_seed, stream_id);
}

/// Per-path channels. Keeping channels apart lets one scheme add a noise
/// source without shifting the draws of another.
enum class Channel : std::uint64_t { Drive = 0, Aux = 1, Jumps = 2, Residual = 3 };

inline RngStream path_stream(std::uint64_t master_seed, std::uint64_t path, Channel ch)
{
    return RngStream(master_seed, path * 8 + static_cast<std::uint64_t>(ch));
}

inline std::vector<double> brownian_increments(RngStream& s, std::size_t n, double dt)
{
    if (n < 1)
        throw std::invalid_argument("brownian_increments: n must be >= 1");
    if (!(dt >= 0.0))
        throw std::invalid_argument("brownian_increments: dt must be >= 0");
    std::vector<double> out(n);
    double sd = std::sqrt(dt);
    for (auto& v : out)
        v = sd * s.normal();
    return out;
}

/// Row-major n_time x n_space cells, each N(0, dt*dx).
struct WhiteNoiseGrid {
    double dt = 0.0;
    double dx = 0.0;
    std::size_t n_time = 0;
    std::size_t n_space = 0;
    std::vector<double> cells;

    double operator()(std::size_t k, std::size_t j) const { return cells[k * n_space + j]; }
};

inline WhiteNoiseGrid whitenoise_field(RngStream& s, std::size_t n_time, std::size_t n_space, double dt, double dx)
{
    if (n_time == 0 || n_space == 0 || !(dt > 0) || !(dx > 0))
        throw std::invalid_argument("whitenoise_field: sizes and spacings must be positive");
    WhiteNoiseGrid g{dt, dx, n_time, n_space, std::vector<double>(n_time * n_space)};
    double sd = std::sqrt(dt * dx);
    for (auto& c : g.cells)
        c = sd * s.normal();
    return g;
}

/// Jump epochs of a homogeneous Poisson process on [0, horizon).
inline std::vector<double> poisson_times(RngStream& s, double rate, double horizon)
{
    if (!(rate >= 0.0) || !std::isfinite(rate))
        throw std::invalid_argument("poisson_times: rate must be finite and >= 0");
    if (!(horizon > 0.0))
        throw std::invalid_argument("poisson_times: horizon must be > 0");
    std::vector<double> out;
    if (rate == 0.0)
        return out;
    double t = s.exponential(rate);
    while (t < horizon) {
        out.push_back(t);
        t += s.exponential(rate);
    }
    return out;
}

} // namespace acert
