#include "macpam/scheduler.hpp"

#include <catch2/catch_amalgamated.hpp>

#include "test_oracles.hpp"

using namespace macpam;

namespace {

// reference scenarios (pe recovered so that 139 is the 2-bit level)
const double kPeStar = pe_for_power_level(2, 139.0, 1.0);
const Scenario kEqual = Scenario::make(139.0, 139.0, 1.0, GapParams{kPeStar});
const Scenario kUnequal = Scenario::make(2400.0, 590.0, 1.0, GapParams{kPeStar});

// frozen from the closed forms (independently recomputed by oracle::corners)
constexpr double kUnequalLambda2 = 0.91837565104166667;
constexpr double kUnequalC1R2 = 0.081624348958333333;  // 1003/12288
constexpr double kUnequalRung1 = 1798.2901316814754;
constexpr double kUnequalRung2 = 8991.4506584073770;
constexpr double kUnequalB1R1 = 1.0836502766875417;

Scenario level_scenario(int r1, int r2, double pe) {
    const GapParams gp{pe};
    return Scenario::make(power_for_integer_rate(r1, 1.0, gp),
                          power_for_integer_rate(r2, 1.0, gp), 1.0, gp);
}

}  // namespace

TEST_CASE("scenario invariants and relabeling") {
    const Scenario s = Scenario::make(1.0, 5.0, 2.0, GapParams{1e-5});
    CHECK(s.p1 == 5.0);
    CHECK(s.p2 == 1.0);
    CHECK(s.users_swapped);
    CHECK_FALSE(Scenario::make(5.0, 1.0, 2.0, GapParams{1e-5}).users_swapped);
    CHECK_THROWS_AS(Scenario::make(0.0, 1.0, 1.0, GapParams{1e-5}), std::domain_error);
    CHECK_THROWS_AS(Scenario::make(1.0, 1.0, 0.0, GapParams{1e-5}), std::domain_error);
    CHECK_THROWS_AS(Scenario::make(1.0, 1.0, 1.0, GapParams{2.0}), std::domain_error);
    CHECK(kEqual.r1_max() == 2);
    CHECK(kUnequal.r1_max() == 4);
    CHECK(kUnequal.r2_max() == 3);
}

TEST_CASE("pam spec consistency") {
    const PamSpec s = PamSpec::make(3, 21.0);
    CHECK_THAT(s.dmin * s.dmin, Catch::Matchers::WithinRel(12.0 * 21.0 / 63.0, 1e-12));
    CHECK(PamSpec::silence().bits == 0);
    CHECK(PamSpec::silence().power == 0.0);
    CHECK_THROWS_AS(PamSpec::make(0, 1.0), std::domain_error);
    CHECK_THROWS_AS(PamSpec::make(-1, 0.0), std::domain_error);
}

TEST_CASE("lambda2 and point c1") {
    const Scenario r1_eq = level_scenario(1, 1, 1e-7);
    CHECK_THAT(lambda2(r1_eq), Catch::Matchers::WithinRel(0.75, 1e-12));
    const RatePoint c1 = point_c1(r1_eq);
    CHECK(c1.r1 == 1.0);
    CHECK_THAT(c1.r2, Catch::Matchers::WithinRel(0.25, 1e-12));

    // 1 - lambda2 approaches 1/3 from below as the rate grows
    double prev = 0.0;
    for (int r = 1; r <= 10; ++r) {
        const double w = 1.0 - lambda2(level_scenario(r, r, 1e-7));
        CHECK(w > prev);
        CHECK(w < 1.0 / 3.0);
        prev = w;
    }

    CHECK_THAT(lambda2(kUnequal), Catch::Matchers::WithinRel(kUnequalLambda2, 1e-12));
    const RatePoint c1_uneq = point_c1(kUnequal);
    CHECK(c1_uneq.r1 == 4.0);
    CHECK_THAT(c1_uneq.r2, Catch::Matchers::WithinRel(kUnequalC1R2, 1e-12));
    CHECK_THAT(c1_uneq.r2, Catch::Matchers::WithinRel(1003.0 / 12288.0, 1e-12));

    const RatePoint c1_eq = point_c1(kEqual);
    CHECK(c1_eq.r1 == 2.0);
    CHECK_THAT(c1_eq.r2, Catch::Matchers::WithinRel(0.3125, 1e-12));

    const Scenario below_1bit = Scenario::make(2.0, 1.0, 1.0, GapParams{1e-7});
    CHECK(below_1bit.r1_max() == 0);
    CHECK_THROWS_AS(lambda2(below_1bit), infeasible_error);
}

TEST_CASE("power ladder") {
    const PowerLadder ladder = power_ladder(3, kUnequal);
    REQUIRE(ladder.levels.size() >= 3);
    CHECK(ladder.levels[0] == 0.0);
    CHECK_THAT(ladder.levels[1], Catch::Matchers::WithinRel(kUnequalRung1, 1e-9));
    CHECK_THAT(ladder.levels[2], Catch::Matchers::WithinRel(kUnequalRung2, 1e-9));
    CHECK(ladder.levels[1] <= kUnequal.p1);
    CHECK(ladder.levels[2] > kUnequal.p1);
    CHECK(ladder.segment_below(kUnequal.p1) == 1);

    // equal powers at a level: the first rung already exceeds the budget
    for (int r : {1, 2, 3}) {
        const Scenario eq = level_scenario(r, r, 1e-5);
        const PowerLadder lad = power_ladder(r, eq);
        CHECK(lad.levels[1] > eq.p1);
        CHECK(lad.segment_below(eq.p1) == 0);
        CHECK_THAT(lad.levels[1],
                   Catch::Matchers::WithinRel(
                       3.0 * std::exp2(2.0 * r) * gap(r, eq.gap_params), 1e-12));
    }

    // degenerate base: lone-user levels
    const PowerLadder lone = power_ladder(0, kEqual);
    REQUIRE(lone.levels.size() >= 2);
    CHECK(lone.levels[1] == power_for_integer_rate(1, 1.0, kEqual.gap_params));
}

TEST_CASE("lambda1 and point b1") {
    const B1Result eq1 = lambda1_and_point_b1(level_scenario(1, 1, 1e-7));
    CHECK(eq1.k == 0);
    CHECK_THAT(eq1.lambda1, Catch::Matchers::WithinRel(0.75, 1e-9));
    CHECK_THAT(eq1.point.r1, Catch::Matchers::WithinRel(0.25, 1e-9));
    CHECK(eq1.point.r2 == 1.0);

    const B1Result eq_ladder = lambda1_and_point_b1(kEqual);
    CHECK_THAT(eq_ladder.point.r1, Catch::Matchers::WithinRel(0.3125, 1e-9));
    CHECK(eq_ladder.point.r2 == 2.0);

    const B1Result uneq_ladder = lambda1_and_point_b1(kUnequal);
    CHECK(uneq_ladder.k == 1);
    CHECK_THAT(uneq_ladder.point.r1, Catch::Matchers::WithinRel(kUnequalB1R1, 1e-9));
    CHECK(uneq_ladder.point.r2 == 3.0);

    // independent re-derivation from the closed forms
    const oracle::CornerPoints oc = oracle::corners(2400.0, 590.0, 1.0, kPeStar);
    CHECK(oc.r1 == 4);
    CHECK(oc.r2 == 3);
    CHECK_THAT(uneq_ladder.point.r1, Catch::Matchers::WithinAbs(oc.b1_r1, 1e-8));
    CHECK_THAT(point_c1(kUnequal).r2, Catch::Matchers::WithinAbs(oc.c1_r2, 1e-12));

    // budget exactly on a rung: single phase
    const GapParams gp{1e-7};
    const double p2 = power_for_integer_rate(2, 1.0, gp);
    const double rung1 = std::exp2(4.0) * gap(2, gp) * 3.0;
    const Scenario tie = Scenario::make(rung1, p2, 1.0, gp);
    const B1Result tied = lambda1_and_point_b1(tie);
    CHECK(tied.lambda1 == 1.0);
    CHECK(tied.point.r1 == 1.0);
    CHECK(tied.point.r2 == 2.0);

    CHECK_THROWS_AS(lambda1_and_point_b1(Scenario::make(139.0, 3.0, 1.0, gp)),
                    infeasible_error);
}

TEST_CASE("schedule synthesis: c and b") {
    const Schedule c = synth_schedule(SchedulePoint::c, kUnequal);
    REQUIRE(c.phases.size() == 1);
    CHECK(c.phases[0].fraction == 1.0);
    CHECK(c.phases[0].user1.bits == 4);
    CHECK(c.phases[0].user1.power == 2400.0);
    CHECK_FALSE(c.phases[0].user2.active());
    CHECK(c.rates().r1 == 4.0);
    CHECK(c.rates().r2 == 0.0);

    const Schedule b5 = synth_schedule(SchedulePoint::b, kUnequal);
    REQUIRE(b5.phases.size() == 1);
    CHECK(b5.phases[0].user1.bits == 1);
    CHECK_THAT(b5.phases[0].user1.power, Catch::Matchers::WithinRel(kUnequalRung1, 1e-9));
    CHECK(b5.phases[0].user2.bits == 3);
    CHECK(b5.phases[0].user2.power == 590.0);
    CHECK(b5.rates().r1 == 1.0);
    CHECK(b5.rates().r2 == 3.0);

    // equal powers: user 1 falls silent at b
    const Schedule b4 = synth_schedule(SchedulePoint::b, kEqual);
    REQUIRE(b4.phases.size() == 1);
    CHECK_FALSE(b4.phases[0].user1.active());
    CHECK(b4.rates().r2 == 2.0);
}

TEST_CASE("schedule synthesis: c1") {
    const Scenario eq1 = level_scenario(1, 1, 1e-7);
    const Schedule c1 = synth_schedule(SchedulePoint::c1, eq1);
    REQUIRE(c1.phases.size() == 2);
    CHECK_THAT(c1.phases[0].fraction, Catch::Matchers::WithinRel(0.75, 1e-12));
    CHECK_FALSE(c1.phases[0].user2.active());
    CHECK_THAT(c1.phases[1].fraction, Catch::Matchers::WithinRel(0.25, 1e-12));
    CHECK(c1.phases[1].user2.bits == 1);
    CHECK_THAT(c1.phases[1].user2.power, Catch::Matchers::WithinRel(4.0 * eq1.p2, 1e-12));
    const RatePoint target = point_c1(eq1);
    CHECK_THAT(c1.rates().r1, Catch::Matchers::WithinRel(target.r1, 1e-12));
    CHECK_THAT(c1.rates().r2, Catch::Matchers::WithinRel(target.r2, 1e-12));
}

TEST_CASE("schedule synthesis: b1 and mixtures") {
    const Schedule b1 = synth_schedule(SchedulePoint::b1, kUnequal);
    REQUIRE(b1.phases.size() == 2);
    CHECK(b1.phases[0].user1.bits == 1);
    CHECK(b1.phases[1].user1.bits == 2);
    CHECK(b1.phases[0].user2.bits == 3);
    CHECK(b1.phases[1].user2.bits == 3);
    double avg1 = 0.0;
    double fractions = 0.0;
    for (const Phase& ph : b1.phases) {
        avg1 += ph.fraction * ph.user1.power;
        fractions += ph.fraction;
    }
    CHECK_THAT(avg1, Catch::Matchers::WithinRel(2400.0, 1e-12));
    CHECK_THAT(fractions, Catch::Matchers::WithinAbs(1.0, 1e-12));
    const RatePoint want = lambda1_and_point_b1(kUnequal).point;
    CHECK_THAT(b1.rates().r1, Catch::Matchers::WithinRel(want.r1, 1e-12));
    CHECK(b1.rates().r2 == 3.0);

    const Schedule mix = synth_schedule_mix(0.5, kUnequal);
    REQUIRE(mix.phases.size() == 4);
    const RatePoint c1 = point_c1(kUnequal);
    CHECK_THAT(mix.rates().r1, Catch::Matchers::WithinRel(0.5 * (want.r1 + c1.r1), 1e-12));
    CHECK_THAT(mix.rates().r2, Catch::Matchers::WithinRel(0.5 * (want.r2 + c1.r2), 1e-12));
    CHECK(validate_schedule(mix).pass);
    CHECK_THROWS_AS(synth_schedule_mix(1.5, kUnequal), infeasible_error);

    // canonical ordering: fewer active users first, then lower power
    const Schedule c1s = synth_schedule(SchedulePoint::c1, kUnequal);
    CHECK(c1s.phases[0].user1.active() + c1s.phases[0].user2.active() == 1);
    CHECK(b1.phases[0].user1.power < b1.phases[1].user1.power);
}

TEST_CASE("synthesized schedules validate") {
    for (const Scenario& scn : {kEqual, kUnequal, level_scenario(1, 1, 1e-5),
                                level_scenario(3, 2, 1e-5), level_scenario(5, 4, 1e-7),
                                Scenario::make(1000.0, 70.0, 1.0, GapParams{1e-5})}) {
        for (SchedulePoint target :
             {SchedulePoint::b, SchedulePoint::c, SchedulePoint::b1, SchedulePoint::c1}) {
            const Schedule sched = synth_schedule(target, scn);
            const ValidationReport rep = validate_schedule(sched);
            INFO("target " << static_cast<int>(target) << " violation: " << rep.violation);
            CHECK(rep.pass);
        }
    }
    // weak user below one bit: b and c still synthesize, b1 does not
    const Scenario weak = Scenario::make(139.0, 2.0, 1.0, GapParams{1e-7});
    CHECK(validate_schedule(synth_schedule(SchedulePoint::b, weak)).pass);
    CHECK(validate_schedule(synth_schedule(SchedulePoint::c, weak)).pass);
    CHECK_THROWS_AS(synth_schedule(SchedulePoint::b1, weak), infeasible_error);
}

TEST_CASE("validator rejects broken schedules") {
    // user-2 power doubled: budget violation
    Schedule doubled = synth_schedule(SchedulePoint::c1, kEqual);
    for (Phase& ph : doubled.phases)
        if (ph.user2.active()) ph.user2 = PamSpec::make(1, ph.user2.power * 2.0);
    const ValidationReport power_rep = validate_schedule(doubled);
    CHECK_FALSE(power_rep.pass);
    CHECK(power_rep.violation.find("power") != std::string::npos);

    // doubled burst fraction with correspondingly halved boost: d_min violation
    const double l2 = lambda2(kEqual);
    Schedule weak_boost{kEqual, {}};
    weak_boost.phases.push_back(
        Phase{1.0 - 2.0 * (1.0 - l2), PamSpec::make(2, kEqual.p1), PamSpec::silence()});
    weak_boost.phases.push_back(Phase{2.0 * (1.0 - l2), PamSpec::make(2, kEqual.p1),
                                      PamSpec::make(1, kEqual.p2 / (2.0 * (1.0 - l2)))});
    const ValidationReport dmin_rep = validate_schedule(weak_boost);
    CHECK_FALSE(dmin_rep.pass);
    CHECK(dmin_rep.violation.find("d_min") != std::string::npos);

    // fractions must close to 1
    Schedule short_frac = synth_schedule(SchedulePoint::c1, kEqual);
    short_frac.phases[0].fraction *= 0.5;
    CHECK_FALSE(validate_schedule(short_frac).pass);

    Schedule empty{kEqual, {}};
    CHECK_FALSE(validate_schedule(empty).pass);
}

TEST_CASE("weaker user cannot ride along full-time at point c") {
    for (const Scenario& scn : {kEqual, kUnequal, level_scenario(3, 2, 1e-5)}) {
        for (int bits2 = 1; bits2 <= scn.r2_max(); ++bits2) {
            Schedule sched{scn, {}};
            sched.phases.push_back(Phase{1.0, PamSpec::make(scn.r1_max(), scn.p1),
                                         PamSpec::make(bits2, scn.p2)});
            CHECK_FALSE(validate_schedule(sched).pass);
        }
    }
}

TEST_CASE("2-PAM is the right burst size for c1") {
    for (const Scenario& scn : {kEqual, kUnequal, level_scenario(3, 3, 1e-5)}) {
        const double w = 1.0 - lambda2(scn);  // burst fraction for 2-PAM
        for (int k = 2; k <= 4; ++k) {
            const double fk = 3.0 * w / (std::exp2(2.0 * k) - 1.0);
            Schedule sched{scn, {}};
            const PamSpec full = PamSpec::make(scn.r1_max(), scn.p1);
            sched.phases.push_back(Phase{1.0 - fk, full, PamSpec::silence()});
            sched.phases.push_back(Phase{fk, full, PamSpec::make(k, scn.p2 / fk)});
            CHECK(validate_schedule(sched).pass);
            CHECK(sched.rates().r2 <= w * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("corner schedules spend the whole budget at integer levels") {
    for (double pe : {1e-5, 1e-7}) {
        for (int r1 = 1; r1 <= 6; ++r1) {
            for (int r2 = std::max(1, r1 - 1); r2 <= r1; ++r2) {
                const Scenario scn = level_scenario(r1, r2, pe);
                for (SchedulePoint target : {SchedulePoint::b1, SchedulePoint::c1}) {
                    const Schedule sched = synth_schedule(target, scn);
                    double avg1 = 0.0;
                    double avg2 = 0.0;
                    for (const Phase& ph : sched.phases) {
                        avg1 += ph.fraction * ph.user1.power;
                        avg2 += ph.fraction * ph.user2.power;
                    }
                    CHECK_THAT(avg1, Catch::Matchers::WithinRel(scn.p1, 1e-9));
                    CHECK_THAT(avg2, Catch::Matchers::WithinRel(scn.p2, 1e-9));
                }
            }
        }
    }
}

TEST_CASE("power control dominates the plain corners") {
    for (double pe : {1e-5, 1e-7}) {
        for (int r1 = 1; r1 <= 6; ++r1) {
            for (int r2 = 1; r2 <= r1; ++r2) {
                const Scenario scn = level_scenario(r1, r2, pe);
                const RatePoint b = synth_schedule(SchedulePoint::b, scn).rates();
                const RatePoint b1 = lambda1_and_point_b1(scn).point;
                const RatePoint c = synth_schedule(SchedulePoint::c, scn).rates();
                const RatePoint c1 = point_c1(scn);
                CHECK(b1.r1 >= b.r1 - 1e-12);
                CHECK(b1.r2 >= b.r2 - 1e-12);
                CHECK(c1.r1 >= c.r1 - 1e-12);
                CHECK(c1.r2 >= c.r2 - 1e-12);
            }
        }
    }
}

TEST_CASE("sum rate consistency at the corners") {
    // at integer levels the no-power-control corner carries the floor of the
    // sum bound, and b1 adds its fractional bit on top of that
    for (double pe : {1e-5, 1e-7}) {
        for (int r1 = 1; r1 <= 6; ++r1) {
            for (int r2 = std::max(1, r1 - 1); r2 <= r1; ++r2) {
                const Scenario scn = level_scenario(r1, r2, pe);
                const RatePoint b = synth_schedule(SchedulePoint::b, scn).rates();
                CHECK(b.r1 + b.r2 == sum_rate_floor(scn));
                const B1Result b1 = lambda1_and_point_b1(scn);
                CHECK_THAT(b1.point.r1 + b1.point.r2,
                           Catch::Matchers::WithinAbs(
                               b1.k + (1.0 - b1.lambda1) + r2, 1e-12));
            }
        }
    }
}

TEST_CASE("sum rate floor") {
    CHECK(sum_rate_floor(kEqual) == 2);
    CHECK(sum_rate_floor(kUnequal) == 4);
    // off the levels the floor departs from r1_max and the validator says so
    const Scenario off = Scenario::make(135.0, 130.0, 1.0, GapParams{kPeStar});
    if (sum_rate_floor(off) != off.r1_max()) {
        const ValidationReport rep = validate_schedule(synth_schedule(SchedulePoint::c, off));
        CHECK_FALSE(rep.notes.empty());
    }
}
