#pragma once

// Synthesis and validation of two-user transmission schedules: time fractions,
// per-phase constellation sizes and instantaneous powers realizing the corner
// points of the superposition region, with and without power control.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "macpam/awgn_gap.hpp"
#include "macpam/types.hpp"

namespace macpam {

// Channel and operating point. User 1 is the stronger user by construction;
// inputs arriving in the other order are relabeled and flagged.
struct Scenario {
    double p1;
    double p2;
    double n0;
    GapParams gap_params;
    bool users_swapped = false;

    static Scenario make(double p1, double p2, double n0, GapParams gp) {
        gp.validate();
        if (!(n0 > 0.0) || !std::isfinite(n0))
            throw std::domain_error("Scenario: n0 must be positive and finite");
        if (!(p1 > 0.0) || !(p2 > 0.0) || !std::isfinite(p1) || !std::isfinite(p2))
            throw std::domain_error("Scenario: powers must be positive and finite");
        Scenario s{p1, p2, n0, gp, false};
        if (p2 > p1) {
            std::swap(s.p1, s.p2);
            s.users_swapped = true;
        }
        return s;
    }

    int r1_max() const { return max_integer_rate(p1, n0, gap_params); }
    int r2_max() const { return max_integer_rate(p2, n0, gap_params); }
};

// One user's PAM assignment in a phase; bits = 0 means silence.
struct PamSpec {
    int bits = 0;
    double power = 0.0;
    double dmin = 0.0;

    static PamSpec make(int bits, double power) {
        if (bits < 0) throw std::domain_error("PamSpec: bits must be >= 0");
        if (!(power >= 0.0) || !std::isfinite(power))
            throw std::domain_error("PamSpec: power must be finite and >= 0");
        if (bits == 0) {
            if (power != 0.0) throw std::domain_error("PamSpec: a silent user carries no power");
            return PamSpec{};
        }
        return PamSpec{bits, power, pam_dmin(power, bits)};
    }
    static PamSpec silence() { return PamSpec{}; }
    bool active() const { return bits > 0; }
    int size() const { return 1 << bits; }
};

struct Phase {
    double fraction = 1.0;
    PamSpec user1;
    PamSpec user2;
};

struct Schedule {
    Scenario scenario;
    std::vector<Phase> phases;

    RatePoint rates() const {
        RatePoint r;
        for (const Phase& ph : phases) {
            r.r1 += ph.fraction * ph.user1.bits;
            r.r2 += ph.fraction * ph.user2.bits;
        }
        return r;
    }
};

// Instantaneous user-1 power levels that keep the superimposed constellation's
// coset spacing intact while the always-on user transmits base_bits:
// level(k) = 2^{2 base_bits} Gamma(base_bits, pe) (2^{2k} - 1) N0.
// base_bits = 0 degenerates to the lone-user levels.
struct PowerLadder {
    int base_bits = 0;
    std::vector<double> levels;  // levels[k], k = 0..k_max; levels.back() > p1

    // Largest k with levels[k] <= power.
    int segment_below(double power) const {
        int k = 0;
        while (k + 1 < static_cast<int>(levels.size()) && levels[k + 1] <= power) ++k;
        return k;
    }
};

inline PowerLadder power_ladder(int base_bits, const Scenario& scn) {
    if (base_bits < 0) throw std::domain_error("power_ladder: base_bits must be >= 0");
    PowerLadder ladder{base_bits, {0.0}};
    const double coef =
        base_bits > 0 ? std::exp2(2.0 * base_bits) * gap(base_bits, scn.gap_params) * scn.n0 : 0.0;
    for (int k = 1; k <= 600; ++k) {
        const double level = base_bits > 0
                                 ? coef * (std::exp2(2.0 * k) - 1.0)
                                 : power_for_integer_rate(k, scn.n0, scn.gap_params);
        ladder.levels.push_back(level);
        if (level > scn.p1) break;
    }
    return ladder;
}

// Silent fraction for the weaker user such that its boosted 2-PAM superimposes
// on the stronger user's full-rate constellation without shrinking d_min:
// lambda2 = 1 - ((2^{2R1} - 1) / 2^{2R1}) * P2 / (3 P1).
inline double lambda2(const Scenario& scn) {
    const int r1 = scn.r1_max();
    if (r1 < 1)
        throw infeasible_error(
            "lambda2: no superposition possible, the stronger user is below the 1-bit level");
    const double m2 = std::exp2(2.0 * r1);
    return 1.0 - ((m2 - 1.0) / m2) * scn.p2 / (3.0 * scn.p1);
}

// Corner point c1: user 1 at full integer rate all the time, user 2 bursting
// a boosted 2-PAM for the fraction 1 - lambda2. Both budgets fully spent.
inline RatePoint point_c1(const Scenario& scn) {
    const double l2 = lambda2(scn);
    return RatePoint{static_cast<double>(scn.r1_max()), 1.0 - l2};
}

struct B1Result {
    double lambda1 = 1.0;  // fraction spent at the lower ladder level
    RatePoint point;
    int k = 0;  // lower ladder index; user 1 time-shares levels k and k+1
};

// Corner point b1: user 2 always on at full rate, user 1 time-sharing the two
// ladder levels bracketing its budget so its average power is exactly p1.
inline B1Result lambda1_and_point_b1(const Scenario& scn) {
    const int r2 = scn.r2_max();
    if (r2 < 1)
        throw infeasible_error(
            "lambda1_and_point_b1: the weaker user cannot sustain 1 bit full-time");
    const PowerLadder ladder = power_ladder(r2, scn);
    const int k = ladder.segment_below(scn.p1);
    B1Result res;
    res.k = k;
    if (ladder.levels[k] == scn.p1 || k + 1 >= static_cast<int>(ladder.levels.size())) {
        res.lambda1 = 1.0;  // exact level: single phase, no boost needed
        res.point = RatePoint{static_cast<double>(k), static_cast<double>(r2)};
        return res;
    }
    const double dp = scn.p1 - ladder.levels[k];
    const double delta = ladder.levels[k + 1] - ladder.levels[k];
    res.lambda1 = 1.0 - dp / delta;
    res.point = RatePoint{k + dp / delta, static_cast<double>(r2)};
    return res;
}

// Largest integer sum rate permitted by the rate-dependent-gap sum bound.
inline int sum_rate_floor(const Scenario& scn) {
    const double r = rate_for_power(scn.p1 + scn.p2, scn.n0, scn.gap_params);
    return static_cast<int>(std::floor(r + 1e-9));
}

enum class SchedulePoint { b, c, b1, c1 };

namespace detail {

inline void canonical_phase_order(std::vector<Phase>& phases) {
    // silent/low-power phases first
    std::stable_sort(phases.begin(), phases.end(), [](const Phase& a, const Phase& b) {
        const int na = a.user1.active() + a.user2.active();
        const int nb = b.user1.active() + b.user2.active();
        if (na != nb) return na < nb;
        if (a.user1.power != b.user1.power) return a.user1.power < b.user1.power;
        return a.user2.power < b.user2.power;
    });
}

}  // namespace detail

inline Schedule synth_schedule(SchedulePoint target, const Scenario& scn) {
    const int r1 = scn.r1_max();
    const int r2 = scn.r2_max();
    Schedule sched{scn, {}};
    switch (target) {
        case SchedulePoint::c: {
            if (r1 < 1)
                throw infeasible_error(
                    "target c: bound r1 <= max integer rate violated, user 1 is below the 1-bit "
                    "level");
            sched.phases.push_back(Phase{1.0, PamSpec::make(r1, scn.p1), PamSpec::silence()});
            break;
        }
        case SchedulePoint::b: {
            if (r2 < 1) {
                // weak user below 1 bit: b collapses onto the r1 axis
                if (r1 < 1)
                    throw infeasible_error("target b: neither user reaches the 1-bit level");
                sched.phases.push_back(Phase{1.0, PamSpec::make(r1, scn.p1), PamSpec::silence()});
                break;
            }
            const PowerLadder ladder = power_ladder(r2, scn);
            const int kb = ladder.segment_below(scn.p1);
            const double p2_level =
                std::min(scn.p2, power_for_integer_rate(r2, scn.n0, scn.gap_params));
            sched.phases.push_back(
                Phase{1.0, kb > 0 ? PamSpec::make(kb, ladder.levels[kb]) : PamSpec::silence(),
                      PamSpec::make(r2, p2_level)});
            break;
        }
        case SchedulePoint::c1: {
            const double l2 = lambda2(scn);
            const PamSpec full = PamSpec::make(r1, scn.p1);
            sched.phases.push_back(Phase{l2, full, PamSpec::silence()});
            sched.phases.push_back(Phase{1.0 - l2, full, PamSpec::make(1, scn.p2 / (1.0 - l2))});
            break;
        }
        case SchedulePoint::b1: {
            const B1Result b1 = lambda1_and_point_b1(scn);
            const PowerLadder ladder = power_ladder(r2, scn);
            // The ladder is sized for user 2 at its integer-bit level; power
            // beyond that level cannot be spent inside an R2-bit constellation
            // without growing the ladder, so it is left unused.
            const PamSpec always_on = PamSpec::make(
                r2, std::min(scn.p2, power_for_integer_rate(r2, scn.n0, scn.gap_params)));
            if (b1.lambda1 >= 1.0) {
                sched.phases.push_back(
                    Phase{1.0,
                          b1.k > 0 ? PamSpec::make(b1.k, ladder.levels[b1.k]) : PamSpec::silence(),
                          always_on});
                break;
            }
            sched.phases.push_back(Phase{
                b1.lambda1,
                b1.k > 0 ? PamSpec::make(b1.k, ladder.levels[b1.k]) : PamSpec::silence(),
                always_on});
            sched.phases.push_back(Phase{1.0 - b1.lambda1,
                                         PamSpec::make(b1.k + 1, ladder.levels[b1.k + 1]),
                                         always_on});
            break;
        }
    }
    detail::canonical_phase_order(sched.phases);
    return sched;
}

// Time sharing along the segment b1..c1: theta = 0 gives b1, theta = 1 gives c1.
inline Schedule synth_schedule_mix(double theta, const Scenario& scn) {
    if (!(theta >= 0.0) || !(theta <= 1.0))
        throw infeasible_error("mixture weight theta outside [0,1]");
    if (theta == 0.0) return synth_schedule(SchedulePoint::b1, scn);
    if (theta == 1.0) return synth_schedule(SchedulePoint::c1, scn);
    Schedule b1 = synth_schedule(SchedulePoint::b1, scn);
    const Schedule c1 = synth_schedule(SchedulePoint::c1, scn);
    Schedule mix{scn, {}};
    for (Phase ph : b1.phases) {
        ph.fraction *= 1.0 - theta;
        mix.phases.push_back(ph);
    }
    for (Phase ph : c1.phases) {
        ph.fraction *= theta;
        mix.phases.push_back(ph);
    }
    detail::canonical_phase_order(mix.phases);
    return mix;
}

namespace detail {

// Ascending, zero-mean amplitudes of the user's PAM alphabet ({0} if silent).
inline std::vector<double> pam_amplitudes(const PamSpec& s) {
    const int m = s.active() ? s.size() : 1;
    std::vector<double> amps(m);
    for (int i = 0; i < m; ++i) amps[i] = (2 * i - (m - 1)) * s.dmin / 2.0;
    return amps;
}

struct LabeledAmp {
    double amp;
    int label1;
    int label2;
};

// All M1*M2 superimposed receive amplitudes with per-user labels, ascending.
inline std::vector<LabeledAmp> sum_points(const Phase& phase) {
    const std::vector<double> a1 = pam_amplitudes(phase.user1);
    const std::vector<double> a2 = pam_amplitudes(phase.user2);
    std::vector<LabeledAmp> pts;
    pts.reserve(a1.size() * a2.size());
    for (int i = 0; i < static_cast<int>(a1.size()); ++i)
        for (int j = 0; j < static_cast<int>(a2.size()); ++j)
            pts.push_back(LabeledAmp{a1[i] + a2[j], i, j});
    std::sort(pts.begin(), pts.end(),
              [](const LabeledAmp& x, const LabeledAmp& y) { return x.amp < y.amp; });
    return pts;
}

// Minimum distance between points whose label for the given user differs.
inline double effective_dmin(const std::vector<LabeledAmp>& pts, int user) {
    double best = std::numeric_limits<double>::infinity();
    // largest amplitude so far and largest amplitude with a different label
    double top_amp = 0.0;
    int top_label = -1;
    double other_amp = -std::numeric_limits<double>::infinity();
    bool have_top = false;
    for (const LabeledAmp& p : pts) {
        const int lbl = user == 1 ? p.label1 : p.label2;
        if (have_top) {
            const double nearest = lbl == top_label ? other_amp : top_amp;
            if (std::isfinite(nearest)) best = std::min(best, p.amp - nearest);
        }
        if (!have_top || lbl != top_label) {
            if (have_top) other_amp = top_amp;
            top_amp = p.amp;
            top_label = lbl;
            have_top = true;
        } else {
            top_amp = p.amp;
        }
    }
    return best;
}

inline std::string format_double_brief(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::string(buf);
}

}  // namespace detail

struct ValidationReport {
    bool pass = true;
    std::string violation;  // first violated condition, empty when pass
    std::vector<std::string> notes;
};

// Checks (in order): fractions sum to 1; per-user average power within budget
// (1e-9 relative); per-phase coset condition (outer d_min at least M_inner
// times the inner d_min, 1e-9 relative); per-phase, per-user symbol-error
// margin from the exact PAM error formula applied to the user's effective
// d_min in the sum constellation. The margin carries a factor-2.05 allowance:
// the d_min-preserving coset construction keeps each user's decision distance
// but can raise its neighbour multiplicity by at most (1-1/M_a)/(1-1/M_b) < 2,
// and budgets rounded to engineering precision cost a further few permille.
inline ValidationReport validate_schedule(const Schedule& sched) {
    ValidationReport rep;
    const Scenario& scn = sched.scenario;
    const double pe = scn.gap_params.target_pe;

    const int floor_sum = sum_rate_floor(scn);
    if (floor_sum != scn.r1_max())
        rep.notes.push_back("sum-rate floor " + std::to_string(floor_sum) +
                            " differs from the stronger user's single-user rate " +
                            std::to_string(scn.r1_max()) +
                            "; powers are off the integer-bit levels");

    auto fail = [&](std::string why) {
        rep.pass = false;
        rep.violation = std::move(why);
        return rep;
    };

    if (sched.phases.empty()) return fail("schedule has no phases");

    double fraction_sum = 0.0;
    double avg1 = 0.0;
    double avg2 = 0.0;
    for (size_t i = 0; i < sched.phases.size(); ++i) {
        const Phase& ph = sched.phases[i];
        if (!(ph.fraction > 0.0) || !(ph.fraction <= 1.0))
            return fail("phase " + std::to_string(i) + ": fraction outside (0,1]");
        for (const PamSpec* u : {&ph.user1, &ph.user2}) {
            if (u->bits < 0 || !(u->power >= 0.0))
                return fail("phase " + std::to_string(i) + ": malformed PAM spec");
            if (!u->active() && u->power != 0.0)
                return fail("phase " + std::to_string(i) + ": silent user carries power");
            if (u->active()) {
                const double want = pam_dmin(u->power, u->bits);
                if (std::abs(u->dmin - want) > 1e-9 * std::max(1.0, want))
                    return fail("phase " + std::to_string(i) +
                                ": stored d_min inconsistent with power");
            }
        }
        fraction_sum += ph.fraction;
        avg1 += ph.fraction * ph.user1.power;
        avg2 += ph.fraction * ph.user2.power;
    }
    if (std::abs(fraction_sum - 1.0) > 1e-12) return fail("fractions do not sum to 1");
    if (avg1 > scn.p1 * (1.0 + 1e-9))
        return fail("user 1 average power " + detail::format_double_brief(avg1) +
                    " exceeds budget " + detail::format_double_brief(scn.p1));
    if (avg2 > scn.p2 * (1.0 + 1e-9))
        return fail("user 2 average power " + detail::format_double_brief(avg2) +
                    " exceeds budget " + detail::format_double_brief(scn.p2));

    for (size_t i = 0; i < sched.phases.size(); ++i) {
        const Phase& ph = sched.phases[i];
        if (ph.user1.active() && ph.user2.active()) {
            const PamSpec& outer = ph.user1.dmin >= ph.user2.dmin ? ph.user1 : ph.user2;
            const PamSpec& inner = ph.user1.dmin >= ph.user2.dmin ? ph.user2 : ph.user1;
            if (outer.dmin * (1.0 + 1e-9) < inner.size() * inner.dmin)
                return fail("phase " + std::to_string(i) +
                            ": d_min coset condition violated (outer " +
                            detail::format_double_brief(outer.dmin) + " < " +
                            std::to_string(inner.size()) + " x " +
                            detail::format_double_brief(inner.dmin) + ")");
        }
        if (!ph.user1.active() && !ph.user2.active()) continue;
        const std::vector<detail::LabeledAmp> pts = detail::sum_points(ph);
        const double sigma = std::sqrt(scn.n0);
        for (int user = 1; user <= 2; ++user) {
            const PamSpec& u = user == 1 ? ph.user1 : ph.user2;
            if (!u.active()) continue;
            const double deff = detail::effective_dmin(pts, user);
            const double predicted =
                2.0 * (1.0 - 1.0 / u.size()) * q_func(deff / (2.0 * sigma));
            if (predicted > pe * 2.05)
                return fail("phase " + std::to_string(i) + ": user " + std::to_string(user) +
                            " symbol-error rate " + detail::format_double_brief(predicted) +
                            " above target " + detail::format_double_brief(pe));
        }
    }
    return rep;
}

}  // namespace macpam
