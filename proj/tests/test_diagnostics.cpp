#include "doctest.h"

#include <cmath>
#include <map>
#include <vector>

#include "heavytail/diagnostics.hpp"

using namespace heavytail;

namespace {

Verdict verdict_of(const TailModel& m, ClassId c) { return check_class(m, c).verdict; }

// Class-chain implications that must never be violated by verdicts:
// C ⊂ D ∩ L, S ⊂ L ⊂ OL, D ⊂ OS? no — but D∩L ⊂ S ⊂ OS, L ⊂ OL, S ⊂ OS.
void check_chain_consistency(const TailModel& m) {
    std::map<ClassId, Verdict> v;
    for (ClassId c : {ClassId::D, ClassId::C, ClassId::L, ClassId::S, ClassId::OS,
                      ClassId::OL, ClassId::PD, ClassId::K})
        v[c] = verdict_of(m, c);
    // subset pairs (sub, super): sub holds => super not-fails
    const std::pair<ClassId, ClassId> pairs[] = {
        {ClassId::C, ClassId::D},  {ClassId::C, ClassId::L}, {ClassId::S, ClassId::L},
        {ClassId::S, ClassId::OS}, {ClassId::L, ClassId::OL}, {ClassId::S, ClassId::K},
        {ClassId::L, ClassId::K}};
    for (auto [sub, super] : pairs) {
        if (v[sub] == Verdict::holds) {
            INFO(to_string(sub), " holds but ", to_string(super), " fails");
            CHECK(v[super] != Verdict::fails);
        }
    }
}

}  // namespace

TEST_CASE("grid construction validates its arguments") {
    auto p = pareto(2, 1);
    CHECK_THROWS_AS(make_grid(*p, GridSpec{0.0, 4.0, 20}), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(*p, GridSpec{0.0, 2.0, 40}), std::invalid_argument);
    auto xs = make_grid(*p, GridSpec{});
    CHECK(xs.size() == 40);
    CHECK(xs.back() == doctest::Approx(xs.front() * 1e4));
    // anchored at the 0.999 quantile by default
    CHECK(xs.front() == doctest::Approx(p->quantile(1.0 - 1e-3)));
}

TEST_CASE("scale ratio curve: Pareto(2,1) at b=0.5 is constant 4") {
    auto p = pareto(2, 1);
    auto xs = make_grid(*p, GridSpec{});
    RatioCurve c = ratio_curve(*p, ScaleTransform{0.5}, xs);
    for (double v : c.values) CHECK(v == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(std::fabs(c.slope) < 1e-10);
    CHECK(c.limit_estimate == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("shift ratio curve: Pareto(2,1) at a=1 equals ((x-1)/x)^-2") {
    auto p = pareto(2, 1);
    std::vector<double> xs = log_spaced(100.0, 1e6, 40);
    RatioCurve c = ratio_curve(*p, ShiftTransform{1.0}, xs);
    CHECK(c.values.front() == doctest::Approx(std::pow(100.0 / 99.0, 2.0)).epsilon(1e-12));
    CHECK(c.limit_estimate == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("scale ratio curve: exponential diverges in log space") {
    auto e = exponential(1);
    auto xs = make_grid(*e, GridSpec{});
    RatioCurve c = ratio_curve(*e, ScaleTransform{0.5}, xs);
    // exact: exp(x/2) -> log value x/2; grid top is ~6.9e4 * ... just check growth
    for (std::size_t i = 0; i < xs.size(); ++i)
        CHECK(c.log_values[i] == doctest::Approx(0.5 * xs[i]).epsilon(1e-12));
    CHECK(c.slope > 0.5);  // divergent statistic reads as a rising log-log curve
}

TEST_CASE("self-convolution curve: Pareto(2,1) approaches 2") {
    auto p = pareto(2, 1);
    std::vector<double> xs = log_spaced(10.0, 1e5, 30);
    RatioCurve c = ratio_curve(*p, SelfConvolveTransform{}, xs);
    CHECK(c.limit_estimate == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("classification oracle: Pareto(2,1)") {
    auto p = pareto(2, 1);
    for (ClassId c : {ClassId::D, ClassId::C, ClassId::L, ClassId::S, ClassId::OS,
                      ClassId::OL, ClassId::PD, ClassId::Mstar, ClassId::K, ClassId::A,
                      ClassId::OA, ClassId::T, ClassId::DL, ClassId::DA, ClassId::M}) {
        INFO("class ", to_string(c));
        CHECK(verdict_of(*p, c) == Verdict::holds);
    }
}

TEST_CASE("classification oracle: Exponential(1)") {
    auto e = exponential(1);
    CHECK(verdict_of(*e, ClassId::PD) == Verdict::holds);
    for (ClassId c : {ClassId::D, ClassId::C, ClassId::L, ClassId::S, ClassId::K,
                      ClassId::T, ClassId::DL, ClassId::DA, ClassId::M, ClassId::Mstar}) {
        INFO("class ", to_string(c));
        CHECK(verdict_of(*e, c) == Verdict::fails);
    }
}

TEST_CASE("classification oracle: Weibull(0.5, 1)") {
    auto w = weibull(0.5, 1);
    for (ClassId c : {ClassId::L, ClassId::PD, ClassId::K, ClassId::T, ClassId::OL}) {
        INFO("class ", to_string(c));
        CHECK(verdict_of(*w, c) == Verdict::holds);
    }
    for (ClassId c : {ClassId::D, ClassId::C, ClassId::DL, ClassId::DA}) {
        INFO("class ", to_string(c));
        CHECK(verdict_of(*w, c) == Verdict::fails);
    }
}

TEST_CASE("classification oracle: Lognormal(0,1)") {
    auto ln = lognormal(0, 1);
    for (ClassId c : {ClassId::L, ClassId::PD, ClassId::K, ClassId::T}) {
        INFO("class ", to_string(c));
        CHECK(verdict_of(*ln, c) == Verdict::holds);
    }
    CHECK(verdict_of(*ln, ClassId::D) == Verdict::fails);
}

TEST_CASE("bounded support: PD holds, everything else fails") {
    auto u = uniform_pos(0, 1);
    CHECK(verdict_of(*u, ClassId::PD) == Verdict::holds);
    for (ClassId c : {ClassId::D, ClassId::L, ClassId::S, ClassId::K, ClassId::M})
        CHECK(verdict_of(*u, c) == Verdict::fails);
    auto cv = check_class(*u, ClassId::D);
    CHECK(cv.note == "finite right endpoint");
}

TEST_CASE("class-chain consistency across families") {
    check_chain_consistency(*pareto(2, 1));
    check_chain_consistency(*pareto(1.5, 1));
    check_chain_consistency(*exponential(1));
    check_chain_consistency(*weibull(0.5, 1));
    check_chain_consistency(*lognormal(0, 1));
    check_chain_consistency(*mixture(0.5, pareto(2, 1), exponential(1)));
}

TEST_CASE("mixture with a Pareto component keeps the Pareto classes") {
    auto m = mixture(0.5, pareto(2, 1), exponential(1));
    for (ClassId c : {ClassId::D, ClassId::L, ClassId::PD, ClassId::K}) {
        INFO("class ", to_string(c));
        CHECK(verdict_of(*m, c) == Verdict::holds);
    }
}

TEST_CASE("Matuszewska indexes of Pareto match alpha") {
    for (double alpha : {1.5, 2.0, 3.0}) {
        auto est = matuszewska(*pareto(alpha, 1.0));
        CHECK_FALSE(est.beta_infinite);
        CHECK_FALSE(est.alpha_infinite);
        CHECK(est.beta_hat == doctest::Approx(alpha).epsilon(0.05 / alpha));
        CHECK(est.alpha_hat == doctest::Approx(alpha).epsilon(0.05 / alpha));
    }
}

TEST_CASE("Matuszewska indexes: Weibull reads as +inf, scale invariance, errors") {
    auto est = matuszewska(*weibull(0.5, 1.0));
    CHECK(est.beta_infinite);
    CHECK(est.alpha_infinite);
    CHECK(std::isinf(est.beta_hat));

    // index estimates are scale-equivariant: Pareto xm rescaling changes nothing
    auto a = matuszewska(*pareto(2.0, 1.0));
    auto b = matuszewska(*pareto(2.0, 50.0));
    CHECK(a.beta_hat == doctest::Approx(b.beta_hat).epsilon(1e-9));
    CHECK(a.alpha_hat == doctest::Approx(b.alpha_hat).epsilon(1e-9));

    CHECK_THROWS_AS(matuszewska(*uniform_pos(0, 1)), std::domain_error);
    CHECK_THROWS_AS(matuszewska(*pareto(2, 1), {2.0, 4.0}), std::invalid_argument);
    CHECK_THROWS_AS(matuszewska(*pareto(2, 1), {0.5, 2, 4, 8, 16}), std::invalid_argument);
}

TEST_CASE("Matuszewska links back to class verdicts") {
    // alpha_hat finite <=> D holds; beta_hat > 0 <=> PD holds
    struct Case {
        ModelPtr m;
        bool in_d, in_pd;
    };
    const Case cases[] = {{pareto(2, 1), true, true},
                          {weibull(0.5, 1), false, true},
                          {mixture(0.3, pareto(1.5, 1), exponential(2)), true, true}};
    for (const auto& c : cases) {
        auto est = matuszewska(*c.m);
        CHECK((est.alpha_hat < 50.0) == c.in_d);
        CHECK((est.beta_hat > 0.0) == c.in_pd);
        CHECK((verdict_of(*c.m, ClassId::D) == Verdict::holds) == c.in_d);
        CHECK((verdict_of(*c.m, ClassId::PD) == Verdict::holds) == c.in_pd);
    }
}

TEST_CASE("composite verdict notes record the constituents") {
    auto cv = check_class(*weibull(0.5, 1), ClassId::DL);
    CHECK(cv.verdict == Verdict::fails);
    CHECK(cv.note.find("D=fails") != std::string::npos);
}
