#pragma once

// Scheme-labeled rate-region boundaries for the two-user Gaussian MAC and the
// geometric predicates used to compare them.

#include <array>
#include <cmath>
#include <optional>
#include <string_view>
#include <vector>

#include "macpam/scheduler.hpp"
#include "macpam/types.hpp"

namespace macpam {

enum class Scheme {
    gaussian_capacity,
    gap_outer,
    superpos_no_pc,
    superpos_pc,
    tdma_naive,
    tdma_pc,
};

inline constexpr std::array<Scheme, 6> all_schemes{
    Scheme::gaussian_capacity, Scheme::gap_outer,  Scheme::superpos_no_pc,
    Scheme::superpos_pc,       Scheme::tdma_naive, Scheme::tdma_pc,
};

inline std::string_view to_string(Scheme s) {
    switch (s) {
        case Scheme::gaussian_capacity: return "gaussian_capacity";
        case Scheme::gap_outer: return "gap_outer";
        case Scheme::superpos_no_pc: return "superpos_no_pc";
        case Scheme::superpos_pc: return "superpos_pc";
        case Scheme::tdma_naive: return "tdma_naive";
        case Scheme::tdma_pc: return "tdma_pc";
    }
    return "?";
}

inline std::optional<Scheme> scheme_from_string(std::string_view name) {
    for (Scheme s : all_schemes)
        if (to_string(s) == name) return s;
    return std::nullopt;
}

// Boundary vertices in order; polygon regions close through the origin.
struct RateRegion {
    Scheme scheme;
    std::vector<RatePoint> vertices;
};

namespace detail {

inline void push_dedup(std::vector<RatePoint>& verts, RatePoint p) {
    if (!verts.empty() && verts.back() == p) return;
    verts.push_back(p);
}

// Upper boundary as an r1-ordered path: vertices minus a closing origin.
inline std::vector<RatePoint> boundary_path(const RateRegion& region) {
    std::vector<RatePoint> path = region.vertices;
    if (path.size() > 1 && path.back().r1 == 0.0 && path.back().r2 == 0.0 &&
        path[path.size() - 2].r1 > 0.0)
        path.pop_back();  // trailing closing origin
    return path;
}

// Max r2 of the boundary path at abscissa r1 (-inf right of the path).
inline double boundary_r2_at(const std::vector<RatePoint>& path, double r1) {
    double best = -std::numeric_limits<double>::infinity();
    if (path.empty()) return best;
    if (path.size() == 1) return r1 <= path[0].r1 ? path[0].r2 : best;
    for (size_t i = 0; i + 1 < path.size(); ++i) {
        const RatePoint& a = path[i];
        const RatePoint& b = path[i + 1];
        if (r1 < std::min(a.r1, b.r1) || r1 > std::max(a.r1, b.r1)) continue;
        if (a.r1 == b.r1) {
            best = std::max({best, a.r2, b.r2});
        } else {
            const double t = (r1 - a.r1) / (b.r1 - a.r1);
            best = std::max(best, a.r2 + t * (b.r2 - a.r2));
        }
    }
    return best;
}

}  // namespace detail

// True iff every vertex of `inner` lies inside the closed region under the
// boundary of `outer`, within tol.
inline bool region_contains(const RateRegion& outer, const RateRegion& inner, double tol) {
    const std::vector<RatePoint> path = detail::boundary_path(outer);
    double max_r1 = 0.0;
    for (const RatePoint& p : path) max_r1 = std::max(max_r1, p.r1);
    for (const RatePoint& v : inner.vertices) {
        if (v.r1 > max_r1 + tol) return false;
        const double cap = detail::boundary_r2_at(path, std::min(v.r1, max_r1));
        if (v.r2 > cap + tol) return false;
    }
    return true;
}

inline double max_sum_rate(const RateRegion& region) {
    double best = 0.0;
    for (const RatePoint& v : region.vertices) best = std::max(best, v.r1 + v.r2);
    return best;
}

// Capacity pentagon for Gaussian inputs; the gap plays no role.
inline RateRegion gaussian_capacity_region(const Scenario& scn) {
    const double c1 = 0.5 * std::log2(1.0 + scn.p1 / scn.n0);
    const double c2 = 0.5 * std::log2(1.0 + scn.p2 / scn.n0);
    const double c12 = 0.5 * std::log2(1.0 + (scn.p1 + scn.p2) / scn.n0);
    RateRegion region{Scheme::gaussian_capacity, {}};
    detail::push_dedup(region.vertices, {0.0, c2});
    detail::push_dedup(region.vertices, {std::clamp(c12 - c2, 0.0, c1), c2});
    detail::push_dedup(region.vertices, {c1, std::clamp(c12 - c1, 0.0, c2)});
    detail::push_dedup(region.vertices, {c1, 0.0});
    return region;
}

// Pentagon bounded by the rate-dependent-gap fixed points of the per-user and
// sum constraints. Exact corners plus a uniform boundary sampling of at least
// 256 points.
inline RateRegion gap_outer_region(const Scenario& scn, int samples = 256) {
    const double b1 = rate_for_power(scn.p1, scn.n0, scn.gap_params);
    const double b2 = rate_for_power(scn.p2, scn.n0, scn.gap_params);
    const double b12 = rate_for_power(scn.p1 + scn.p2, scn.n0, scn.gap_params);
    std::vector<RatePoint> corners;
    detail::push_dedup(corners, {0.0, b2});
    detail::push_dedup(corners, {std::clamp(b12 - b2, 0.0, b1), b2});
    detail::push_dedup(corners, {b1, std::clamp(b12 - b1, 0.0, b2)});
    detail::push_dedup(corners, {b1, 0.0});

    const int n = std::max(samples, 256);
    double total_len = 0.0;
    for (size_t i = 0; i + 1 < corners.size(); ++i)
        total_len += std::hypot(corners[i + 1].r1 - corners[i].r1,
                                corners[i + 1].r2 - corners[i].r2);
    RateRegion region{Scheme::gap_outer, {}};
    if (total_len == 0.0) {
        region.vertices = corners;
        return region;
    }
    size_t corner_idx = 0;
    double walked = 0.0;
    for (int i = 0; i < n; ++i) {
        const double target = total_len * i / (n - 1);
        while (corner_idx + 1 < corners.size()) {
            const double seg = std::hypot(corners[corner_idx + 1].r1 - corners[corner_idx].r1,
                                          corners[corner_idx + 1].r2 - corners[corner_idx].r2);
            if (walked + seg >= target || corner_idx + 2 == corners.size()) {
                const double t = seg > 0.0 ? std::clamp((target - walked) / seg, 0.0, 1.0) : 0.0;
                detail::push_dedup(
                    region.vertices,
                    {corners[corner_idx].r1 +
                         t * (corners[corner_idx + 1].r1 - corners[corner_idx].r1),
                     corners[corner_idx].r2 +
                         t * (corners[corner_idx + 1].r2 - corners[corner_idx].r2)});
                break;
            }
            walked += seg;
            ++corner_idx;
            detail::push_dedup(region.vertices, corners[corner_idx]);  // exact corner
        }
    }
    detail::push_dedup(region.vertices, corners.back());
    return region;
}

// Superposition without power control: (0,R2), b, c and the origin. With equal
// powers b merges into (0,R2) and the region degenerates to naive TDMA.
inline RateRegion superpos_no_pc_region(const Scenario& scn) {
    const int r1 = scn.r1_max();
    const int r2 = scn.r2_max();
    RateRegion region{Scheme::superpos_no_pc, {}};
    if (r2 < 1) {
        detail::push_dedup(region.vertices, {0.0, 0.0});
        detail::push_dedup(region.vertices, {static_cast<double>(r1), 0.0});
        return region;
    }
    const int r_sum = sum_rate_floor(scn);
    const PowerLadder ladder = power_ladder(r2, scn);
    const int kb = ladder.segment_below(scn.p1);
    detail::push_dedup(region.vertices, {0.0, static_cast<double>(r2)});
    detail::push_dedup(region.vertices, {static_cast<double>(kb), static_cast<double>(r2)});
    detail::push_dedup(region.vertices, {static_cast<double>(r_sum), 0.0});
    detail::push_dedup(region.vertices, {0.0, 0.0});
    return region;
}

// Superposition with power control: the pentagon through b1 and c1.
inline RateRegion superpos_pc_region(const Scenario& scn) {
    const int r1 = scn.r1_max();
    const int r2 = scn.r2_max();
    RateRegion region{Scheme::superpos_pc, {}};
    if (r1 < 1) {
        region.vertices.push_back({0.0, 0.0});
        return region;
    }
    if (r2 < 1) {
        // the weak user can still burst a boosted 2-PAM on top of user 1
        const RatePoint c1 = point_c1(scn);
        detail::push_dedup(region.vertices, {0.0, 0.0});
        detail::push_dedup(region.vertices, c1);
        detail::push_dedup(region.vertices, {static_cast<double>(r1), 0.0});
        return region;
    }
    const RatePoint b1 = lambda1_and_point_b1(scn).point;
    const RatePoint c1 = point_c1(scn);
    detail::push_dedup(region.vertices, {0.0, 0.0});
    detail::push_dedup(region.vertices, {0.0, static_cast<double>(r2)});
    detail::push_dedup(region.vertices, b1);
    detail::push_dedup(region.vertices, c1);
    detail::push_dedup(region.vertices, {static_cast<double>(r1), 0.0});
    return region;
}

// Naive TDMA: straight segment between the single-user integer rates.
inline RateRegion tdma_naive_region(const Scenario& scn) {
    RateRegion region{Scheme::tdma_naive, {}};
    detail::push_dedup(region.vertices, {0.0, static_cast<double>(scn.r2_max())});
    detail::push_dedup(region.vertices, {static_cast<double>(scn.r1_max()), 0.0});
    return region;
}

namespace detail {

// Single-user rate under slot sharing: inside a slot of duration `fraction`
// the user boosts to power/fraction and time-shares the two integer-bit
// constellations bracketing that instantaneous power.
inline double slot_rate(double power, double fraction, const Scenario& scn) {
    if (!(fraction > 0.0)) return 0.0;
    const double boosted = power / fraction;
    const int k = max_integer_rate(boosted, scn.n0, scn.gap_params);
    const double pk = power_for_integer_rate(k, scn.n0, scn.gap_params);
    const double pk1 = power_for_integer_rate(k + 1, scn.n0, scn.gap_params);
    return fraction * (k + (boosted - pk) / (pk1 - pk));
}

}  // namespace detail

// TDMA with power control, sampled on a uniform slot-split grid.
inline RateRegion tdma_pc_region(const Scenario& scn, int samples) {
    if (samples < 2) throw std::domain_error("tdma_pc_region: samples must be >= 2");
    RateRegion region{Scheme::tdma_pc, {}};
    for (int i = 0; i < samples; ++i) {
        const double tau = static_cast<double>(i) / (samples - 1);
        detail::push_dedup(region.vertices, {detail::slot_rate(scn.p1, tau, scn),
                                             detail::slot_rate(scn.p2, 1.0 - tau, scn)});
    }
    return region;
}

// Sum-rate shortfall of superposition-with-power-control against the
// rate-dependent-gap outer bound.
inline double sum_rate_gap(const Scenario& scn) {
    return max_sum_rate(gap_outer_region(scn)) - max_sum_rate(superpos_pc_region(scn));
}

}  // namespace macpam
