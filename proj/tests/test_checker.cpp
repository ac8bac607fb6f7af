#include <doctest.h>

#include "levydens/checker.hpp"
#include "levydens/errors.hpp"
#include "levydens/iterlog.hpp"
#include "levydens/symbol.hpp"

#include <cmath>
#include <vector>

using namespace levydens;
using checker::GridSpec;

TEST_CASE("log grid: endpoints, count, and nested refinement") {
    GridSpec g{1.0, 1e6, 7};
    auto pts = checker::log_grid(g);
    REQUIRE(pts.size() == 7);
    CHECK(pts.front() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(pts.back() == doctest::Approx(1e6).epsilon(1e-12));
    // A (2*count - 1)-point grid over the same range contains this one.
    auto fine = checker::log_grid({1.0, 1e6, 13});
    for (size_t i = 0; i < pts.size(); ++i)
        CHECK(fine[2 * i] == doctest::Approx(pts[i]).epsilon(1e-12));
}

TEST_CASE("growth constant: one-level chain fits exactly 1/2 at the grid edge") {
    // eta1(xi) = ln sqrt(1+xi^2), s_1^eps = ln(1+xi); the ratio is minimized
    // at xi = 1 where it equals exactly 1/2.
    LevySymbol sym(SymbolKind::SubordinatorChain, {1, 1.0});
    auto rep = checker::check_upper_assumptions(sym);
    CHECK(rep.pass);
    CHECK(rep.violations.empty());
    CHECK(rep.fitted.alpha_eps == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("growth constant: two-level chain, value frozen from wide-precision sweep") {
    LevySymbol sym(SymbolKind::SubordinatorChain, {2, 1.0});
    auto rep = checker::check_upper_assumptions(sym);
    CHECK(rep.pass);
    // min over the default 400-point grid sits at xi = 1:
    // Re ln(1 + ln(1 - i)) / ln(1 + ln 2).
    CHECK(rep.fitted.alpha_eps ==
          doctest::Approx(0.8431022657639858937808).epsilon(1e-12));
    CHECK(rep.fitted.c_eta2 > 0.0);
    CHECK(rep.fitted.c_d1 > 0.0);
    CHECK(rep.fitted.c_d2 > 0.0);
}

TEST_CASE("growth constant: symmetric towers fit exactly 1") {
    for (int n : {1, 2}) {
        LevySymbol sym(SymbolKind::SymmetricIterLog, {n, 1.0});
        auto rep = checker::check_upper_assumptions(sym);
        CHECK(rep.pass);
        CHECK(rep.fitted.alpha_eps == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("growth bound degenerates near the origin for the chain family") {
    // eta1 ~ xi^2/2 against s_n^eps ~ xi as xi -> 0: extending the growth
    // grid to 1e-6 must reproduce the failure with the offending points.
    LevySymbol sym(SymbolKind::SubordinatorChain, {1, 1.0});
    auto rep = checker::check_upper_assumptions(sym, {1e-6, 1e6, 400});
    CHECK(!rep.pass);
    REQUIRE(!rep.violations.empty());
    bool found = false;
    for (const auto& v : rep.violations)
        if (v.inequality == "growth-lower-bound" && v.xi < 1e-3) found = true;
    CHECK(found);
}

TEST_CASE("upper checks pass for every acceptance-scope chain") {
    for (int n : {1, 2, 3})
        for (double eps : {0.5, 1.0}) {
            LevySymbol sym(SymbolKind::SubordinatorChain, {n, eps});
            auto rep = checker::check_upper_assumptions(sym);
            CHECK(rep.pass);
            CHECK(rep.fitted.alpha_eps > checker::alpha_floor);
        }
}

TEST_CASE("lower checks: one-level symmetric tower is exactly Cauchy-like") {
    // eta = ln(1+xi): -eta'' = (1+xi)^{-2}, and eta / s_1^eps = 1 identically.
    // The curvature ratio is 1 on the whole open large-|xi| branch but the
    // grid's first point xi = 1 sits on the closed small branch (shape
    // |xi|^{eps-2} = 1), where the ratio is -eta''(1) = 1/4 exactly.
    LevySymbol sym(SymbolKind::SymmetricIterLog, {1, 1.0});
    auto rep = checker::check_lower_assumptions(sym);
    CHECK(rep.pass);
    REQUIRE(rep.fitted.alpha_0.has_value());
    REQUIRE(rep.fitted.c_curv_lower.has_value());
    CHECK(*rep.fitted.alpha_0 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(*rep.fitted.c_curv_lower == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("lower checks: two-level symmetric tower, frozen curvature fit") {
    LevySymbol sym(SymbolKind::SymmetricIterLog, {2, 1.0});
    auto rep = checker::check_lower_assumptions(sym);
    CHECK(rep.pass);
    REQUIRE(rep.fitted.alpha_0.has_value());
    REQUIRE(rep.fitted.c_curv_lower.has_value());
    CHECK(*rep.fitted.alpha_0 == doctest::Approx(1.0).epsilon(1e-12));
    // min over the default grid sits at the xi = 1 boundary point:
    // -s_2''(1) = (1/4) ((1+ln2)^{-1} + (1+ln2)^{-2}) against shape 1.
    CHECK(*rep.fitted.c_curv_lower ==
          doctest::Approx(0.2348608743841755490263).epsilon(1e-12));
}

TEST_CASE("lower checks reject complex-valued symbols") {
    LevySymbol sym(SymbolKind::SubordinatorChain, {1, 1.0});
    CHECK_THROWS_AS(checker::check_lower_assumptions(sym), NotSymmetricError);
}

TEST_CASE("derivative self-test: analytic jets match finite differences") {
    for (auto kind : {SymbolKind::SubordinatorChain, SymbolKind::SymmetricIterLog,
                      SymbolKind::SubordinatedSquare}) {
        for (int n : {1, 2}) {
            LevySymbol sym(kind, {n, 1.0});
            CHECK(checker::derivative_selftest(sym) < 1e-6);
        }
    }
    // A cusp-free fractional-power case as well.
    LevySymbol frac(SymbolKind::SubordinatorChain, {2, 0.5});
    CHECK(checker::derivative_selftest(frac) < 1e-6);
}

TEST_CASE("sign-alternation spot check on the tower Laplace exponent") {
    auto grid = checker::log_grid({1e-2, 1e4, 40});

    // Analytic orders only: always conclusive, and the one-level eps = 1
    // tower is ln(1+x) whose signs are textbook.
    auto low = checker::bernstein_spotcheck({1, 1.0}, 2, grid);
    CHECK(low.pass);
    CHECK(low.conclusive);
    CHECK(low.checked == static_cast<int>(grid.size()) * 2);
    CHECK(low.inconclusive == 0);

    // Orders up to 6 go through finite differences: noise-swamped points are
    // recorded as inconclusive, never as failures.
    for (double eps : {0.5, 1.0}) {
        auto res = checker::bernstein_spotcheck({2, eps}, 6, grid);
        CHECK(res.pass);
        CHECK(res.checked > 0);
        CHECK(res.inconclusive >= 0);
        if (!res.conclusive) CHECK(res.inconclusive > 0);
    }
}

TEST_CASE("assumption reports serialize byte-identically") {
    LevySymbol sym(SymbolKind::SubordinatorChain, {2, 1.0});
    auto a = checker::check_upper_assumptions(sym).to_json().dump();
    auto b = checker::check_upper_assumptions(sym).to_json().dump();
    CHECK(a == b);
    CHECK(a.find("schema_version") != std::string::npos);

    LevySymbol s2(SymbolKind::SymmetricIterLog, {2, 1.0});
    auto c = checker::check_lower_assumptions(s2).to_json().dump();
    auto d = checker::check_lower_assumptions(s2).to_json().dump();
    CHECK(c == d);
}

TEST_CASE("fitted constants move monotonically under grid refinement") {
    // alpha_eps is an infimum and the c's are suprema, so a nested finer grid
    // can only push them down / up respectively.
    LevySymbol sym(SymbolKind::SubordinatorChain, {2, 1.0});
    auto coarse = checker::check_upper_assumptions(sym);
    auto fine = checker::check_upper_assumptions(sym, {1.0, 1e6, 799}, {1e-6, 1e6, 799});
    CHECK(fine.fitted.alpha_eps <= coarse.fitted.alpha_eps + 1e-15);
    CHECK(fine.fitted.c_eta2 >= coarse.fitted.c_eta2 - 1e-15);
    CHECK(fine.fitted.c_d1 >= coarse.fitted.c_d1 - 1e-15);
    CHECK(fine.fitted.c_d2 >= coarse.fitted.c_d2 - 1e-15);

    LevySymbol s2(SymbolKind::SymmetricIterLog, {2, 1.0});
    auto lc = checker::check_lower_assumptions(s2);
    auto lf = checker::check_lower_assumptions(s2, {1.0, 1e6, 799});
    CHECK(*lf.fitted.alpha_0 >= *lc.fitted.alpha_0 - 1e-15);
    CHECK(*lf.fitted.c_curv_lower <= *lc.fitted.c_curv_lower + 1e-15);
}

TEST_CASE("exported majorant shapes expose the fitted inequality shapes") {
    IterLogParams p{2, 1.0};
    // Small-argument branch at |xi| <= 1.
    CHECK(checker::majorant_shape_d1(p, 0.5) == doctest::Approx(1.0)); // 0.5^0
    CHECK(checker::majorant_shape_d2(p, 0.5) == doctest::Approx(2.0)); // 0.5^-1
    // Iterated-log branch at xi > 1 carries (1+xi)^-order.
    double xi = 10.0;
    double base = std::pow(iterlog::s(2, xi), 0.0) / iterlog::r(1, xi);
    CHECK(checker::majorant_shape_d1(p, xi) ==
          doctest::Approx(base / (1.0 + xi)).epsilon(1e-14));
    CHECK(checker::majorant_shape_d2(p, xi) ==
          doctest::Approx(base / ((1.0 + xi) * (1.0 + xi))).epsilon(1e-14));
    // The curvature floor shape collapses to (1+xi)^{-2} for n = 1, eps = 1.
    CHECK(checker::lower_curvature_shape({1, 1.0}, 3.0) ==
          doctest::Approx(1.0 / 16.0).epsilon(1e-14));
}
