#include <doctest.h>

#include "levydens/errors.hpp"
#include "levydens/iterlog.hpp"
#include "levydens/symbol.hpp"

#include <cmath>
#include <complex>

using namespace levydens;
using cplx = std::complex<double>;

namespace {
template <class F> cplx cfd1(F f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}
} // namespace

TEST_CASE("one-level exponent chain: closed form ln(1 - i xi)") {
    for (double xi : {-3.0, -0.5, 0.0, 0.25, 2.0, 1e6}) {
        SymbolJet j = chain_jet(1, xi);
        cplx want = std::log(cplx(1.0, -xi));
        CHECK(std::abs(j.value - want) < 1e-14 * (1.0 + std::abs(want)));
    }
    // At xi = 0: value 0, first derivative -i, second derivative +1.
    SymbolJet j0 = chain_jet(1, 0.0);
    CHECK(j0.value == cplx(0.0, 0.0));
    CHECK(std::abs(j0.d1 - cplx(0.0, -1.0)) < 1e-15);
    CHECK(std::abs(j0.d2 - cplx(1.0, 0.0)) < 1e-15);
}

TEST_CASE("two-level exponent chain: frozen high-precision jet at xi = 1") {
    // Frozen from a 40-digit arbitrary-precision evaluation of
    // u2 = ln(1 + ln(1 - i)) and its first two xi-derivatives.
    SymbolJet j = chain_jet(2, 1.0);
    cplx v(0.4439684078090973215225675384411658721556,
           -0.5280173218609132143844894338718966113107);
    cplx d1(0.4386573306490126, -0.1154629344209193);
    cplx d2(-0.3406857626210744, 0.3783574577389308);
    CHECK(std::abs(j.value - v) < 1e-15);
    CHECK(std::abs(j.d1 - d1) < 1e-13);
    CHECK(std::abs(j.d2 - d2) < 1e-13);
}

TEST_CASE("chain jets agree with finite differences at many scales") {
    for (int n : {1, 2, 3}) {
        for (double xi : {-50.0, -1.2, 0.3, 4.0, 1e4}) {
            double h = std::abs(xi) * 1e-6 + 1e-9;
            SymbolJet j = chain_jet(n, xi);
            cplx want1 = cfd1([n](double y) { return chain_jet(n, y).value; }, xi, h);
            CHECK(std::abs(j.d1 - want1) < 1e-7 * (1.0 + std::abs(want1)));
            cplx want2 = cfd1([n](double y) { return chain_jet(n, y).d1; }, xi, h);
            CHECK(std::abs(j.d2 - want2) < 1e-6 * (1.0 + std::abs(want2)));
        }
    }
}

TEST_CASE("chain exponent has Hermitian symmetry eta(-xi) = conj(eta(xi))") {
    LevySymbol sym(SymbolKind::SubordinatorChain, {2, 0.7});
    for (double xi : {0.4, 3.0, 250.0}) {
        SymbolJet p = sym.eta(xi), m = sym.eta(-xi);
        CHECK(std::abs(m.value - std::conj(p.value)) < 1e-14 * (1.0 + std::abs(p.value)));
    }
}

TEST_CASE("exponent parts have nonnegative real part and the expected signs") {
    // Re eta >= 0 makes |e^{-t eta}| <= 1 (a valid characteristic function);
    // eta_parts().second flips Im eta so that both parts are >= 0 for xi > 0.
    for (auto kind : {SymbolKind::SubordinatorChain, SymbolKind::SymmetricIterLog,
                      SymbolKind::SubordinatedSquare}) {
        LevySymbol sym(kind, {2, 1.0});
        for (double xi : {0.3, 1.0, 47.0, 1e8}) {
            auto [e1, e2] = sym.eta_parts(xi);
            CHECK(e1 >= 0.0);
            CHECK(e2 >= 0.0);
        }
    }
}

TEST_CASE("one-level chain with eps = 1 is the log-gamma exponent") {
    // e^{-t ln(1 - i xi)} = (1 - i xi)^{-t} is the Gamma(t, 1) characteristic
    // function; spot-check the exponent against |1 - i xi| and arg.
    LevySymbol sym(SymbolKind::SubordinatorChain, {1, 1.0});
    double xi = 2.0;
    auto [e1, e2] = sym.eta_parts(xi);
    CHECK(e1 == doctest::Approx(0.5 * std::log(1 + xi * xi)).epsilon(1e-15));
    CHECK(e2 == doctest::Approx(std::atan(xi)).epsilon(1e-15));
}

TEST_CASE("symmetric family: even, cusp at origin, matches the scalar tower") {
    LevySymbol sym(SymbolKind::SymmetricIterLog, {2, 0.5});
    for (double xi : {0.7, 12.0}) {
        SymbolJet p = sym.eta(xi), m = sym.eta(-xi);
        CHECK(p.value == m.value);
        CHECK(p.value.imag() == 0.0);
        CHECK(p.value.real() ==
              doctest::Approx(std::pow(iterlog::s(2, xi), 0.5)).epsilon(1e-14));
        CHECK(p.d1.real() == doctest::Approx(-m.d1.real()).epsilon(1e-13));
    }
    CHECK_THROWS_AS((void)sym.eta_checked(0.0), SingularityError);
    CHECK(sym.eta(0.0).value == cplx(0.0, 0.0));
    CHECK(std::isnan(sym.eta(0.0).d1.real()));
}

TEST_CASE("subordinated-square family: smooth at origin when eps = 1") {
    LevySymbol sym(SymbolKind::SubordinatedSquare, {1, 1.0});
    SymbolJet j0 = sym.eta(0.0);
    CHECK(j0.value == cplx(0.0, 0.0));
    CHECK(j0.d1 == cplx(0.0, 0.0));
    CHECK(j0.d2.real() == doctest::Approx(2.0).epsilon(1e-14));
    // Value is s_1(xi^2) = ln(1 + xi^2).
    CHECK(sym.eta(3.0).value.real() == doctest::Approx(std::log(10.0)).epsilon(1e-15));
    // Huge arguments must not overflow through xi^2.
    double big = 1e200;
    CHECK(sym.eta(big).value.real() ==
          doctest::Approx(2.0 * std::log(big)).epsilon(1e-12));
}

TEST_CASE("even-family derivative jets agree with finite differences") {
    for (auto kind : {SymbolKind::SymmetricIterLog, SymbolKind::SubordinatedSquare}) {
        for (double eps : {1.0, 0.6}) {
            LevySymbol sym(kind, {2, eps});
            for (double xi : {0.4, 2.0, 90.0}) {
                double h = xi * 1e-6;
                SymbolJet j = sym.eta(xi);
                cplx want1 = cfd1([&](double y) { return sym.eta(y).value; }, xi, h);
                CHECK(std::abs(j.d1 - want1) < 1e-7 * (1.0 + std::abs(want1)));
                cplx want2 = cfd1([&](double y) { return sym.eta(y).d1; }, xi, h);
                CHECK(std::abs(j.d2 - want2) < 1e-6 * (1.0 + std::abs(want2)));
            }
        }
    }
}

TEST_CASE("fractional power of the chain matches |.|, arg decomposition") {
    LevySymbol sym(SymbolKind::SubordinatorChain, {1, 0.5});
    double xi = 3.0;
    cplx u = std::log(cplx(1.0, -xi));
    cplx want = std::pow(u, 0.5);
    CHECK(std::abs(sym.eta(xi).value - want) < 1e-14);
}

TEST_CASE("curvature floor for the imaginary part") {
    // Frozen oracle: B_0(n=2, xi=1) = s_2'(1)/(1+1).
    CurvatureBound cb = second_derivative_lower({2, 1.0}, 1.0);
    CHECK(cb.b0 == doctest::Approx(0.1476540272874103).epsilon(1e-13));
    CHECK(cb.floor_value == doctest::Approx(cb.b0).epsilon(1e-15));
    CHECK(cb.neg_second == doctest::Approx(0.2348608743841755).epsilon(1e-13));
    // The floor really is a lower bound for -(s_n^eps)'' on a sweep.
    for (double eps : {1.0, 0.7}) {
        for (double x : {0.5, 1.0, 10.0, 1e3, 1e6}) {
            CurvatureBound c = second_derivative_lower({2, eps}, x);
            CHECK(c.neg_second >= c.floor_value * (1.0 - 1e-12));
            CHECK(c.floor_value > 0.0);
        }
    }
}

TEST_CASE("spec strings round-trip through the parser") {
    LevySymbol a = parse_symbol_spec("chain:n=2,eps=1");
    CHECK(a.kind() == SymbolKind::SubordinatorChain);
    CHECK(a.params().n == 2);
    CHECK(a.params().eps == 1.0);
    CHECK(a.spec_string() == "chain:n=2,eps=1");
    LevySymbol b = parse_symbol_spec("sym:n=3,eps=0.5");
    CHECK(b.symmetric());
    CHECK(b.spec_string() == "sym:n=3,eps=0.5");
    CHECK(parse_symbol_spec("sq:n=1,eps=1").kind() == SymbolKind::SubordinatedSquare);

    CHECK_THROWS_AS((void)parse_symbol_spec("nope:n=1,eps=1"), UsageError);
    CHECK_THROWS_AS((void)parse_symbol_spec("chain:n=1"), UsageError);
    CHECK_THROWS_AS((void)parse_symbol_spec("chain:n=0,eps=1"), UsageError);
    CHECK_THROWS_AS((void)parse_symbol_spec("chain:n=1,eps=1.5"), UsageError);
    CHECK_THROWS_AS((void)parse_symbol_spec("garbage"), UsageError);
}

TEST_CASE("parameter validation at construction") {
    CHECK_THROWS_AS(LevySymbol(SymbolKind::SubordinatorChain, {0, 1.0}), DomainError);
    CHECK_THROWS_AS(LevySymbol(SymbolKind::SubordinatorChain, {1, 0.0}), DomainError);
    CHECK_THROWS_AS(LevySymbol(SymbolKind::SubordinatorChain, {1, 1.2}), DomainError);
}
