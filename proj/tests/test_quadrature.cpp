#include "doctest.h"

#include <cmath>

#include "heavytail/quadrature.hpp"

using namespace heavytail;

TEST_CASE("polynomial integrates exactly") {
    auto q = integrate([](double x) { return 3.0 * x * x; }, 0.0, 2.0);
    CHECK(q.converged);
    CHECK(q.value == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("oscillatory integrand meets the requested tolerance") {
    auto q = integrate([](double x) { return std::sin(50.0 * x); }, 0.0, 1.0, 1e-12);
    CHECK(q.converged);
    CHECK(q.value == doctest::Approx((1.0 - std::cos(50.0)) / 50.0).epsilon(1e-10));
}

TEST_CASE("integrable endpoint singularity") {
    auto q = integrate([](double x) { return 1.0 / std::sqrt(x); }, 1e-14, 1.0, 1e-9);
    CHECK(q.value == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("tail integral of a polynomial decay") {
    // ∫_1^∞ y^{-2} dy = 1
    auto q = integrate_tail([](double y) { return 1.0 / (y * y); }, 1.0, 1e12, 1e-10);
    CHECK(q.value == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("tail integral of stretch-exponential decay") {
    // ∫_0^∞ exp(-sqrt(y)) dy = 2
    auto q = integrate_tail([](double y) { return std::exp(-std::sqrt(y)); }, 1e-12, 1e5, 1e-10);
    CHECK(q.value == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("budget exhaustion is reported, not silent") {
    // pathological spike train under a tiny panel budget
    auto q = integrate([](double x) { return std::sin(5000.0 * x); }, 0.0, 3.1, 1e-14, 4);
    CHECK_FALSE(q.converged);
}
