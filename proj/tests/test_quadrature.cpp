#include <doctest.h>

#include "levydens/errors.hpp"
#include "levydens/quadrature.hpp"

#include <cmath>

using namespace levydens;
namespace quad = levydens::quadrature;

TEST_CASE("Gauss-Legendre nodes integrate polynomials exactly") {
    // Order q is exact through degree 2q - 1.
    auto poly = [](double x) { return 5 * x * x * x * x - x * x + 3.0; };
    double exact = 2.0 * (5.0 / 5.0 - 1.0 / 3.0 + 3.0); // over [-1, 1]
    CHECK(quad::gauss(poly, -1.0, 1.0, 4) == doctest::Approx(exact).epsilon(1e-14));
    CHECK(quad::gauss(poly, -1.0, 1.0, 16) == doctest::Approx(exact).epsilon(1e-14));
}

TEST_CASE("Gauss-Legendre handles generic intervals and smooth integrands") {
    CHECK(quad::gauss([](double x) { return std::exp(-x); }, 0.0, 5.0, 24) ==
          doctest::Approx(1.0 - std::exp(-5.0)).epsilon(1e-14));
    CHECK(quad::gauss([](double x) { return std::sin(x); }, 0.0, M_PI, 32) ==
          doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("Gauss-Legendre weights sum to interval length") {
    for (int q : {2, 8, 16, 64, 128}) {
        const auto& rule = quad::gauss_legendre(q);
        double sw = 0.0;
        for (double w : rule.weights) sw += w;
        CHECK(sw == doctest::Approx(2.0).epsilon(1e-14));
        // Nodes symmetric about 0.
        double sn = 0.0;
        for (double xn : rule.nodes) sn += xn;
        CHECK(std::abs(sn) < 1e-13);
    }
}

TEST_CASE("adaptive Simpson on a peaked integrand") {
    // Integrand with a sharp but integrable peak.
    auto f = [](double x) { return 1.0 / (1e-4 + x * x); };
    double exact = 2.0 / 1e-2 * std::atan(1.0 / 1e-2);
    double got = quad::adaptive_simpson(f, -1.0, 1.0, 1e-10);
    CHECK(got == doctest::Approx(exact).epsilon(1e-9));
}

TEST_CASE("adaptive Simpson reports failure instead of returning garbage") {
    // 1/sqrt(x) is integrable but the panel bisection cannot certify the
    // requested tolerance near the endpoint singularity at machine depth.
    auto f = [](double x) { return 1.0 / std::sqrt(x); };
    CHECK_THROWS_AS((void)quad::adaptive_simpson(f, 1e-300, 1.0, 1e-16, 12),
                    ToleranceNotMetError);
}

TEST_CASE("upper bound for a decreasing tail really is an upper bound") {
    // g(y) = e^{-y}: integral over [a, inf) = e^{-a}.
    for (double a : {0.5, 2.0, 10.0}) {
        double b = quad::decreasing_tail_upper_bound(
            [](double y) { return std::exp(-y); }, a, 1e-4);
        double exact = std::exp(-a);
        CHECK(b >= exact);
        CHECK(b <= exact * 1.01);
    }
    // g(y) = y^{-2}: integral over [a, inf) = 1/a.
    for (double a : {1.0, 7.0}) {
        double b = quad::decreasing_tail_upper_bound(
            [](double y) { return 1.0 / (y * y); }, a, 1e-4);
        CHECK(b >= 1.0 / a);
        CHECK(b <= 1.01 / a);
    }
}

TEST_CASE("divergent tails are rejected") {
    CHECK_THROWS_AS(
        (void)quad::decreasing_tail_upper_bound([](double y) { return 1.0 / y; }, 1.0, 1e-3),
        DivergenceError);
}

TEST_CASE("two-sided tail integral") {
    double got = quad::tail_integral([](double y) { return std::exp(-y * y); }, 1.0);
    double exact = std::sqrt(M_PI) / 2.0 * std::erfc(1.0);
    CHECK(got == doctest::Approx(exact).epsilon(1e-9));
}

TEST_CASE("compensated summation beats naive accumulation") {
    quad::KahanSum acc;
    double naive = 0.0;
    // Sum 1e8 copies of an irrational-ish increment; compare to exact product.
    const double inc = 0.1234567890123456;
    const long m = 10'000'000;
    for (long i = 0; i < m; ++i) {
        acc.add(inc);
        naive += inc;
    }
    double exact = inc * static_cast<double>(m);
    CHECK(std::abs(acc.value() - exact) <= std::abs(naive - exact));
    CHECK(acc.value() == doctest::Approx(exact).epsilon(1e-15));
}
