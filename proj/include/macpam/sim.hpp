#pragma once

// Symbol-level Monte Carlo validation of schedules over the AWGN MAC:
// superimposed PAM, nearest-point (equivalently SIC) detection, per-user
// symbol-error counting with a deterministic counter-based generator.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "macpam/scheduler.hpp"
#include "macpam/types.hpp"

namespace macpam {

namespace detail {

// splitmix64; the (seed, stream) pair selects an independent sequence, so
// shards and phases can be simulated in any order with identical results.
struct SplitMix64 {
    std::uint64_t state;

    SplitMix64(std::uint64_t seed, std::uint64_t stream)
        : state(seed + 0x632BE59BD9B4E019ULL * (stream + 1)) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform on [0,1)
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // unbiased index in [0, 2^bits)
    std::uint32_t index_pow2(int bits) {
        return bits > 0 ? static_cast<std::uint32_t>(next() >> (64 - bits)) : 0u;
    }

    // standard normal via Box-Muller (cosine branch; two draws per deviate)
    double normal() {
        const double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;  // (0,1]
        const double u2 = static_cast<double>(next() >> 11) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }
};

inline unsigned thread_cap() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("MACREGION_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(v));
    }
    return hw;
}

}  // namespace detail

inline constexpr const char* sim_algorithm_name = "splitmix64-boxmuller";

// Superimposed receive alphabet with per-user labels, ascending amplitudes.
struct SumConstellation {
    struct Point {
        double amplitude;
        int label1;
        int label2;
    };
    std::vector<Point> points;
    double dmin_sum = 0.0;
};

// Builds the M1*M2-point sum constellation of a phase. Fails if both users are
// active and the coset minimum-distance condition does not hold.
inline SumConstellation build_sum_constellation(const Phase& phase) {
    if (phase.user1.active() && phase.user2.active()) {
        const PamSpec& outer = phase.user1.dmin >= phase.user2.dmin ? phase.user1 : phase.user2;
        const PamSpec& inner = phase.user1.dmin >= phase.user2.dmin ? phase.user2 : phase.user1;
        if (outer.dmin * (1.0 + 1e-9) < inner.size() * inner.dmin)
            throw std::domain_error(
                "build_sum_constellation: d_min coset condition violated");
    }
    SumConstellation c;
    for (const detail::LabeledAmp& p : detail::sum_points(phase))
        c.points.push_back({p.amp, p.label1, p.label2});
    c.dmin_sum = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < c.points.size(); ++i)
        c.dmin_sum = std::min(c.dmin_sum, c.points[i + 1].amplitude - c.points[i].amplitude);
    if (c.points.size() < 2) c.dmin_sum = 0.0;
    return c;
}

// Nearest constellation point to y; exact midpoints resolve to the smaller
// amplitude.
inline std::pair<int, int> detect(double y, const SumConstellation& c) {
    if (c.points.empty()) throw std::domain_error("detect: empty constellation");
    const auto cmp = [](const SumConstellation::Point& p, double v) { return p.amplitude < v; };
    const auto it = std::lower_bound(c.points.begin(), c.points.end(), y, cmp);
    const SumConstellation::Point* best;
    if (it == c.points.begin()) {
        best = &*it;
    } else if (it == c.points.end()) {
        best = &*(it - 1);
    } else {
        const SumConstellation::Point* lo = &*(it - 1);
        const SumConstellation::Point* hi = &*it;
        best = (y - lo->amplitude <= hi->amplitude - y) ? lo : hi;  // tie -> smaller
    }
    return {best->label1, best->label2};
}

// Successive interference cancellation: decide the coarser (outer) user first,
// subtract it, then decide the inner user. Coincides with nearest-point
// detection when the coset condition holds.
inline std::pair<int, int> detect_sic(double y, const Phase& phase) {
    const bool outer_is_user1 = phase.user1.dmin >= phase.user2.dmin;
    const PamSpec& outer = outer_is_user1 ? phase.user1 : phase.user2;
    const PamSpec& inner = outer_is_user1 ? phase.user2 : phase.user1;
    const auto nearest = [](double v, const std::vector<double>& amps) {
        int best = 0;
        for (int i = 1; i < static_cast<int>(amps.size()); ++i)
            if (std::abs(v - amps[i]) < std::abs(v - amps[best])) best = i;  // tie -> smaller
        return best;
    };
    const int l_outer = nearest(y, detail::pam_amplitudes(outer));
    const double residual = y - detail::pam_amplitudes(outer)[l_outer];
    const int l_inner = nearest(residual, detail::pam_amplitudes(inner));
    return outer_is_user1 ? std::make_pair(l_outer, l_inner)
                          : std::make_pair(l_inner, l_outer);
}

// Empirical per-user symbol-error rates of a simulation run.
struct SimReport {
    std::array<double, 2> per_user_ser{0.0, 0.0};
    std::array<double, 2> ser_ci95{0.0, 0.0};  // 95% binomial CI half-widths
    std::array<std::int64_t, 2> per_user_symbols{0, 0};
    std::int64_t symbols_run = 0;
    double throughput_bits = 0.0;
    std::uint64_t seed = 0;
    std::string algorithm = sim_algorithm_name;
};

namespace detail {

struct PhaseCounts {
    std::int64_t errors1 = 0;
    std::int64_t errors2 = 0;
    std::int64_t symbols = 0;
};

inline constexpr std::int64_t sim_shard_size = 1 << 16;

inline std::uint64_t shard_stream(int phase_index, std::int64_t shard) {
    return (static_cast<std::uint64_t>(phase_index) << 32) | static_cast<std::uint64_t>(shard);
}

// Fixed shard structure: shard s of a phase always simulates the same symbol
// block with its own generator, so the counts do not depend on the thread
// count.
inline PhaseCounts simulate_phase(const Phase& phase, double n0, std::int64_t symbols,
                                  std::uint64_t seed, int phase_index) {
    const SumConstellation c = build_sum_constellation(phase);
    const std::vector<double> a1 = pam_amplitudes(phase.user1);
    const std::vector<double> a2 = pam_amplitudes(phase.user2);
    const double sigma = std::sqrt(n0);
    const std::int64_t shards = (symbols + sim_shard_size - 1) / sim_shard_size;

    const auto run_shard = [&](std::int64_t s, PhaseCounts& out) {
        SplitMix64 rng(seed, shard_stream(phase_index, s));
        const std::int64_t count = std::min<std::int64_t>(sim_shard_size,
                                                          symbols - s * sim_shard_size);
        for (std::int64_t i = 0; i < count; ++i) {
            const int i1 = static_cast<int>(rng.index_pow2(phase.user1.bits));
            const int i2 = static_cast<int>(rng.index_pow2(phase.user2.bits));
            const double y = a1[i1] + a2[i2] + sigma * rng.normal();
            const auto [l1, l2] = detect(y, c);
            out.errors1 += l1 != i1;
            out.errors2 += l2 != i2;
        }
        out.symbols += count;
    };

    PhaseCounts total;
    const unsigned threads =
        std::min<unsigned>(thread_cap(), static_cast<unsigned>(std::max<std::int64_t>(shards, 1)));
    if (threads <= 1) {
        for (std::int64_t s = 0; s < shards; ++s) run_shard(s, total);
    } else {
        std::vector<PhaseCounts> partial(threads);
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                for (std::int64_t s = t; s < shards; s += threads) run_shard(s, partial[t]);
            });
        for (std::thread& th : pool) th.join();
        for (const PhaseCounts& p : partial) {
            total.errors1 += p.errors1;
            total.errors2 += p.errors2;
            total.symbols += p.symbols;
        }
    }
    return total;
}

inline void fill_user_stats(SimReport& rep, int user, std::int64_t errors, std::int64_t trials) {
    if (trials <= 0) return;
    const double p = static_cast<double>(errors) / static_cast<double>(trials);
    rep.per_user_ser[user] = p;
    rep.ser_ci95[user] = 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
    rep.per_user_symbols[user] = trials;
}

}  // namespace detail

// Simulates one phase in isolation.
inline SimReport run_phase(const Phase& phase, double n0, std::int64_t symbols,
                           std::uint64_t seed) {
    if (symbols < 10000) throw std::domain_error("run_phase: need at least 10^4 symbols");
    if (!(n0 >= 0.0)) throw std::domain_error("run_phase: n0 must be >= 0");
    const detail::PhaseCounts counts = detail::simulate_phase(phase, n0, symbols, seed, 0);
    SimReport rep;
    rep.symbols_run = counts.symbols;
    rep.throughput_bits = phase.user1.bits + phase.user2.bits;
    rep.seed = seed;
    detail::fill_user_stats(rep, 0, counts.errors1, phase.user1.active() ? counts.symbols : 0);
    detail::fill_user_stats(rep, 1, counts.errors2, phase.user2.active() ? counts.symbols : 0);
    return rep;
}

// Simulates a whole schedule; symbols are split across phases proportionally
// to their fractions (at least one per phase).
inline SimReport run_schedule(const Schedule& sched, std::int64_t symbols_total,
                              std::uint64_t seed) {
    if (symbols_total < 10000)
        throw std::domain_error("run_schedule: need at least 10^4 symbols");
    if (sched.phases.empty()) throw std::domain_error("run_schedule: schedule has no phases");
    SimReport rep;
    rep.seed = seed;
    std::array<std::int64_t, 2> errors{0, 0};
    std::array<std::int64_t, 2> trials{0, 0};
    for (size_t i = 0; i < sched.phases.size(); ++i) {
        const Phase& ph = sched.phases[i];
        const std::int64_t n = std::max<std::int64_t>(
            1, std::llround(ph.fraction * static_cast<double>(symbols_total)));
        const detail::PhaseCounts counts =
            detail::simulate_phase(ph, sched.scenario.n0, n, seed, static_cast<int>(i));
        rep.symbols_run += counts.symbols;
        rep.throughput_bits += ph.fraction * (ph.user1.bits + ph.user2.bits);
        errors[0] += counts.errors1;
        errors[1] += counts.errors2;
        trials[0] += ph.user1.active() ? counts.symbols : 0;
        trials[1] += ph.user2.active() ? counts.symbols : 0;
    }
    detail::fill_user_stats(rep, 0, errors[0], trials[0]);
    detail::fill_user_stats(rep, 1, errors[1], trials[1]);
    return rep;
}

}  // namespace macpam
