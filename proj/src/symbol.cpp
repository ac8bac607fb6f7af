#include "levydens/symbol.hpp"
#include "levydens/errors.hpp"
#include "levydens/iterlog.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace levydens {

namespace {

constexpr double nan_d = std::numeric_limits<double>::quiet_NaN();

// Principal ln(1 + z) without cancellation for small z and without overflow in
// |1 + z|^2 for huge z.
std::complex<double> clog1p(std::complex<double> z) {
    const double x = z.real(), y = z.imag();
    double re;
    if (std::abs(x) + std::abs(y) > 1e8) {
        re = std::log(std::hypot(1.0 + x, y));
    } else {
        re = 0.5 * std::log1p(2.0 * x + x * x + y * y);
    }
    return {re, std::atan2(y, 1.0 + x)};
}

void validate(const IterLogParams& p) {
    if (p.n < 1 || p.n > iterlog::max_depth)
        throw DomainError("symbol: depth n out of range");
    if (!(p.eps > 0.0) || p.eps > 1.0)
        throw DomainError("symbol: eps must be in (0, 1]");
}

// s_1(xi^2) safe against xi^2 overflow.
double s1_of_square(double xi) {
    double a = std::abs(xi);
    if (a > 1e150) return 2.0 * std::log(a) + std::log1p(1.0 / (a * a));
    return std::log1p(a * a);
}

// Jet of w^eps from the jet of w, via w^eps = exp(eps Log w).  Derivatives are
// formed from the logarithmic ratios d1/w, d2/w, which stay finite wherever
// w != 0.
SymbolJet power_jet(const SymbolJet& w, double eps) {
    SymbolJet out;
    std::complex<double> v = std::exp(eps * std::log(w.value));
    std::complex<double> l1 = w.d1 / w.value;
    std::complex<double> l2 = w.d2 / w.value;
    out.value = v;
    out.d1 = v * eps * l1;
    out.d2 = v * eps * (l2 + (eps - 1.0) * l1 * l1);
    return out;
}

// Real scalar jet helper for the even families.
struct RealJet {
    double value, d1, d2;
};

RealJet real_power_jet(double s, double s1d, double s2d, double eps) {
    // (s^eps)' = eps s^{eps-1} s', (s^eps)'' = eps(eps-1) s^{eps-2} s'^2 + eps s^{eps-1} s''
    if (eps == 1.0) return {s, s1d, s2d};
    double p1 = std::pow(s, eps - 1.0);
    double p2 = std::pow(s, eps - 2.0);
    return {std::pow(s, eps), eps * p1 * s1d,
            eps * (eps - 1.0) * p2 * s1d * s1d + eps * p1 * s2d};
}

} // namespace

SymbolJet chain_jet(int n, double xi) {
    if (n < 1 || n > iterlog::max_depth)
        throw DomainError("chain_jet: depth n out of range");
    if (!std::isfinite(xi))
        throw DomainError("chain_jet: xi must be finite");
    // Level 1: u = ln(1 - i xi), u' = -i/(1 - i xi), u'' = -(u')^2.
    SymbolJet u;
    u.value = clog1p({0.0, -xi});
    u.d1 = std::complex<double>(0.0, -1.0) / std::complex<double>(1.0, -xi);
    u.d2 = -u.d1 * u.d1;
    for (int k = 1; k < n; ++k) {
        std::complex<double> w = 1.0 + u.value;
        if (!(w.real() > 0.0))
            throw BranchError("chain_jet: iterate left the principal half-plane at level " +
                              std::to_string(k + 1));
        SymbolJet next;
        next.value = clog1p(u.value);
        next.d1 = u.d1 / w;
        next.d2 = u.d2 / w - u.d1 * u.d1 / (w * w);
        u = next;
    }
    return u;
}

LevySymbol::LevySymbol(SymbolKind kind, IterLogParams params)
    : kind_(kind), params_(params) {
    validate(params_);
}

SymbolJet LevySymbol::eta(double xi) const {
    if (!std::isfinite(xi))
        throw DomainError("LevySymbol::eta: xi must be finite");
    const int n = params_.n;
    const double eps = params_.eps;

    switch (kind_) {
    case SymbolKind::SubordinatorChain: {
        SymbolJet u = chain_jet(n, xi);
        if (eps == 1.0) return u;
        if (xi == 0.0) {
            // 0^eps = 0; the fractional power has no two-sided derivatives here.
            return {{0.0, 0.0}, {nan_d, nan_d}, {nan_d, nan_d}};
        }
        return power_jet(u, eps);
    }
    case SymbolKind::SymmetricIterLog: {
        double a = std::abs(xi);
        if (xi == 0.0)
            return {{0.0, 0.0}, {nan_d, nan_d}, {nan_d, nan_d}}; // cusp in |xi|
        double s = iterlog::s(n, a);
        double sd = iterlog::ds(n, a);
        double sdd = iterlog::d2s(n, a);
        RealJet j = real_power_jet(s, sd, sdd, eps);
        double sign = xi > 0.0 ? 1.0 : -1.0;
        return {{j.value, 0.0}, {sign * j.d1, 0.0}, {j.d2, 0.0}};
    }
    case SymbolKind::SubordinatedSquare: {
        double q = xi * xi;
        double s1 = s1_of_square(xi);
        double s = s1;
        for (int k = 2; k <= n; ++k) s = std::log1p(s);
        // d/dxi s_n(xi^2) = ds(n, q) * 2 xi ; second derivative by product rule.
        double dq = std::isfinite(q) ? iterlog::ds(n, q) : 0.0;
        double d2q = std::isfinite(q) ? iterlog::d2s(n, q) : 0.0;
        double sd = dq * 2.0 * xi;
        double sdd = d2q * 4.0 * q + 2.0 * dq;
        if (eps == 1.0) return {{s, 0.0}, {sd, 0.0}, {sdd, 0.0}};
        if (xi == 0.0)
            return {{0.0, 0.0}, {nan_d, nan_d}, {nan_d, nan_d}};
        RealJet j = real_power_jet(s, sd, sdd, eps);
        return {{j.value, 0.0}, {j.d1, 0.0}, {j.d2, 0.0}};
    }
    }
    throw Error("LevySymbol::eta: unreachable");
}

SymbolJet LevySymbol::eta_checked(double xi) const {
    SymbolJet j = eta(xi);
    if (!std::isfinite(j.d1.real()) || !std::isfinite(j.d1.imag()) ||
        !std::isfinite(j.d2.real()) || !std::isfinite(j.d2.imag()))
        throw SingularityError("LevySymbol: derivatives do not exist at xi = " +
                               std::to_string(xi));
    return j;
}

std::pair<double, double> LevySymbol::eta_parts(double xi) const {
    SymbolJet j = eta(xi);
    return {j.value.real(), -j.value.imag()};
}

std::string LevySymbol::spec_string() const {
    std::ostringstream os;
    switch (kind_) {
    case SymbolKind::SubordinatorChain: os << "chain"; break;
    case SymbolKind::SymmetricIterLog: os << "sym"; break;
    case SymbolKind::SubordinatedSquare: os << "sq"; break;
    }
    os << ":n=" << params_.n << ",eps=" << params_.eps;
    return os.str();
}

CurvatureBound second_derivative_lower(const IterLogParams& params, double x) {
    validate(params);
    if (!(x > 0.0) || !std::isfinite(x))
        throw DomainError("second_derivative_lower: x must be finite and > 0");
    const int n = params.n;
    const double eps = params.eps;
    double a_nm1 = iterlog::ds(n, x);             // A_{n-1}(x) = s_n'(x)
    double b0 = a_nm1 / (1.0 + x);
    double s = iterlog::s(n, x);
    double sdd = iterlog::d2s(n, x);
    CurvatureBound out;
    out.b0 = b0;
    if (eps == 1.0) {
        out.floor_value = b0;
        out.neg_second = -sdd;
    } else {
        double snm1 = iterlog::s0_aware(n - 1, x);
        out.floor_value = eps * std::pow(snm1, eps - 1.0) * b0;
        out.neg_second = -(eps * (eps - 1.0) * std::pow(s, eps - 2.0) * a_nm1 * a_nm1 +
                           eps * std::pow(s, eps - 1.0) * sdd);
    }
    return out;
}

LevySymbol parse_symbol_spec(const std::string& spec) {
    auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw UsageError("symbol spec must look like kind:n=<int>,eps=<real>, got '" + spec + "'");
    std::string kind_s = spec.substr(0, colon);
    SymbolKind kind;
    if (kind_s == "chain") kind = SymbolKind::SubordinatorChain;
    else if (kind_s == "sym") kind = SymbolKind::SymmetricIterLog;
    else if (kind_s == "sq") kind = SymbolKind::SubordinatedSquare;
    else throw UsageError("unknown symbol kind '" + kind_s + "' (want chain|sym|sq)");

    IterLogParams p;
    bool have_n = false, have_eps = false;
    std::istringstream rest(spec.substr(colon + 1));
    std::string item;
    while (std::getline(rest, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos)
            throw UsageError("bad symbol parameter '" + item + "'");
        std::string key = item.substr(0, eq), val = item.substr(eq + 1);
        try {
            if (key == "n") { p.n = std::stoi(val); have_n = true; }
            else if (key == "eps") { p.eps = std::stod(val); have_eps = true; }
            else throw UsageError("unknown symbol parameter '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw UsageError("cannot parse value in '" + item + "'");
        }
    }
    if (!have_n || !have_eps)
        throw UsageError("symbol spec needs both n= and eps=, got '" + spec + "'");
    try {
        return LevySymbol(kind, p);
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
}

} // namespace levydens
