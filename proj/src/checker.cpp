#include "levydens/checker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "levydens/errors.hpp"
#include "levydens/iterlog.hpp"

namespace levydens {
namespace checker {

namespace {

constexpr double kTiny = 1e-300;

struct Parts {
    double eta1, eta2;   // value
    double d1_1, d1_2;   // first derivatives of (eta1, eta2)
    double d2_1, d2_2;   // second derivatives
};

Parts parts_at(const LevySymbol& sym, double xi) {
    SymbolJet j = sym.eta_checked(xi);
    // eta_parts orientation: (eta1, eta2) = (Re, -Im), applied to every order.
    return Parts{j.value.real(), -j.value.imag(), j.d1.real(), -j.d1.imag(),
                 j.d2.real(),    -j.d2.imag()};
}

// Majorant shapes of the upper assumption set, split at |xi| = 1.  The empty
// product r_0 = 1 makes n = 1 degrade gracefully.
double inv_r_prev(int n, double xi) {
    return n >= 2 ? 1.0 / iterlog::r(n - 1, xi) : 1.0;
}

void fit_max(double& c, double value, double shape, double xi, const char* id,
             std::vector<Violation>& violations) {
    double ratio = std::abs(value) / std::max(shape, kTiny);
    if (!std::isfinite(ratio)) {
        violations.push_back({xi, id, ratio});
        return;
    }
    c = std::max(c, ratio);
}

} // namespace

double majorant_shape_eta2(const IterLogParams& p, double xi) {
    double a = std::abs(xi);
    if (a <= 1.0) return std::pow(a, p.eps);
    return std::pow(iterlog::s(p.n, a), p.eps - 1.0) * inv_r_prev(p.n, a);
}

double majorant_shape_d1(const IterLogParams& p, double xi) {
    double a = std::abs(xi);
    if (a <= 1.0) return std::pow(a, p.eps - 1.0);
    return std::pow(iterlog::s(p.n, a), p.eps - 1.0) * inv_r_prev(p.n, a) / (1.0 + a);
}

double majorant_shape_d2(const IterLogParams& p, double xi) {
    double a = std::abs(xi);
    if (a <= 1.0) return std::pow(a, p.eps - 2.0);
    return std::pow(iterlog::s(p.n, a), p.eps - 1.0) * inv_r_prev(p.n, a) /
           ((1.0 + a) * (1.0 + a));
}

// Curvature shape of the lower assumption set; note s_{n-1} (with s_0(x) = x),
// not s_n, in the slowly varying factor.
double lower_curvature_shape(const IterLogParams& p, double xi) {
    double a = std::abs(xi);
    if (a <= 1.0) return std::pow(a, p.eps - 2.0);
    return std::pow(iterlog::s0_aware(p.n - 1, a), p.eps - 1.0) * inv_r_prev(p.n, a) /
           ((1.0 + a) * (1.0 + a));
}

std::vector<double> log_grid(const GridSpec& g) {
    if (!(g.lo > 0.0) || !(g.hi > g.lo) || g.count < 2)
        throw DomainError("log_grid: need 0 < lo < hi and count >= 2");
    std::vector<double> xs(static_cast<size_t>(g.count));
    double llo = std::log(g.lo), lhi = std::log(g.hi);
    for (int j = 0; j < g.count; ++j)
        xs[static_cast<size_t>(j)] =
            std::exp(llo + (lhi - llo) * static_cast<double>(j) /
                               static_cast<double>(g.count - 1));
    xs.front() = g.lo;
    xs.back() = g.hi;
    return xs;
}

nlohmann::json AssumptionReport::to_json() const {
    nlohmann::json fit;
    fit["alpha_eps"] = fitted.alpha_eps;
    fit["c_d1"] = fitted.c_d1;
    fit["c_d2"] = fitted.c_d2;
    fit["c_eta2"] = fitted.c_eta2;
    fit["alpha_0"] = fitted.alpha_0 ? nlohmann::json(*fitted.alpha_0) : nlohmann::json(nullptr);
    fit["c_curv_lower"] =
        fitted.c_curv_lower ? nlohmann::json(*fitted.c_curv_lower) : nlohmann::json(nullptr);

    auto grid_json = [](const GridSpec& g) {
        nlohmann::json j;
        j["count"] = g.count;
        j["hi"] = g.hi;
        j["lo"] = g.lo;
        j["spacing"] = "log";
        return j;
    };

    nlohmann::json viol = nlohmann::json::array();
    for (const auto& v : violations) {
        nlohmann::json one;
        one["inequality"] = v.inequality;
        one["margin"] = v.margin;
        one["xi"] = v.xi;
        viol.push_back(std::move(one));
    }

    nlohmann::json out;
    out["direction"] = direction;
    out["eta1_grid"] = grid_json(eta1_grid);
    out["fitted"] = std::move(fit);
    out["majorant_grid"] = grid_json(majorant_grid);
    out["pass"] = pass;
    out["schema_version"] = 1;
    out["symbol"] = symbol;
    out["violations"] = std::move(viol);
    return out;
}

AssumptionReport check_upper_assumptions(const LevySymbol& sym, const GridSpec& eta1_grid,
                                         const GridSpec& majorant_grid) {
    const IterLogParams& p = sym.params();
    AssumptionReport rep;
    rep.symbol = sym.spec_string();
    rep.direction = "upper";
    rep.eta1_grid = eta1_grid;
    rep.majorant_grid = majorant_grid;

    // Growth constant: infimum of eta1 / s_n^eps; below the floor the lower
    // bound carries no information and is reported as a violation.
    double alpha = std::numeric_limits<double>::infinity();
    for (double xi : log_grid(eta1_grid)) {
        double ratio = sym.eta1(xi) / std::pow(iterlog::s(p.n, xi), p.eps);
        if (!std::isfinite(ratio) || ratio <= alpha_floor)
            rep.violations.push_back({xi, "growth-lower-bound", ratio});
        alpha = std::min(alpha, ratio);
    }
    rep.fitted.alpha_eps = alpha;

    // Majorant constants: suprema of |quantity| / shape.
    for (double xi : log_grid(majorant_grid)) {
        Parts q = parts_at(sym, xi);
        fit_max(rep.fitted.c_eta2, q.eta2, majorant_shape_eta2(p, xi), xi, "eta2-majorant",
                rep.violations);
        double d1 = std::max(std::abs(q.d1_1), std::abs(q.d1_2));
        fit_max(rep.fitted.c_d1, d1, majorant_shape_d1(p, xi), xi, "first-derivative-majorant",
                rep.violations);
        double d2 = std::max(std::abs(q.d2_1), std::abs(q.d2_2));
        fit_max(rep.fitted.c_d2, d2, majorant_shape_d2(p, xi), xi, "second-derivative-majorant",
                rep.violations);
    }

    rep.pass = rep.violations.empty() && std::isfinite(rep.fitted.alpha_eps) &&
               rep.fitted.alpha_eps > alpha_floor && std::isfinite(rep.fitted.c_eta2) &&
               std::isfinite(rep.fitted.c_d1) && std::isfinite(rep.fitted.c_d2);
    return rep;
}

AssumptionReport check_lower_assumptions(const LevySymbol& sym, const GridSpec& grid) {
    if (!sym.symmetric())
        throw NotSymmetricError(
            "check_lower_assumptions: symbol '" + sym.spec_string() +
            "' is complex-valued; the decay/curvature assumptions apply to "
            "symmetric (real) symbols only");
    const IterLogParams& p = sym.params();

    AssumptionReport rep;
    rep.symbol = sym.spec_string();
    rep.direction = "lower";
    rep.eta1_grid = grid;
    rep.majorant_grid = grid;

    double alpha0 = 0.0;
    double c_curv = std::numeric_limits<double>::infinity();
    const bool pure_tower = sym.kind() == SymbolKind::SymmetricIterLog;

    for (double xi : log_grid(grid)) {
        Parts q = parts_at(sym, xi);

        // Decay constant: supremum of eta / s_n^eps.
        double up = q.eta1 / std::pow(iterlog::s(p.n, xi), p.eps);
        if (!std::isfinite(up)) rep.violations.push_back({xi, "decay-upper-bound", up});
        alpha0 = std::max(alpha0, up);

        // Curvature constant: infimum of (-eta'') / shape; nonpositive
        // curvature anywhere on the grid voids the lower bound.
        double neg2 = -q.d2_1;
        double ratio = neg2 / std::max(lower_curvature_shape(p, xi), kTiny);
        if (!std::isfinite(ratio) || ratio <= 0.0)
            rep.violations.push_back({xi, "curvature-lower-bound", ratio});
        c_curv = std::min(c_curv, ratio);

        // For the pure tower the curvature floor is certified analytically;
        // the exact second derivative must never undercut it.
        if (pure_tower) {
            CurvatureBound cb = second_derivative_lower(p, xi);
            if (!(cb.neg_second >= cb.floor_value * (1.0 - 1e-9)))
                rep.violations.push_back(
                    {xi, "curvature-certified-floor", cb.neg_second / cb.floor_value});
        }
    }

    rep.fitted.alpha_0 = alpha0;
    rep.fitted.c_curv_lower = c_curv;
    rep.pass = rep.violations.empty() && std::isfinite(alpha0) && alpha0 > 0.0 &&
               std::isfinite(c_curv) && c_curv > 0.0;
    return rep;
}

double derivative_selftest(const LevySymbol& sym, const GridSpec& grid) {
    double worst = 0.0;
    auto rel = [](std::complex<double> a, std::complex<double> b) {
        double scale = std::max({std::abs(a), std::abs(b), 1e-30});
        return std::abs(a - b) / scale;
    };
    for (double xi : log_grid(grid)) {
        double h = xi * 1e-6 + 1e-9;
        SymbolJet c = sym.eta_checked(xi);
        SymbolJet hi = sym.eta_checked(xi + h);
        SymbolJet lo = sym.eta_checked(xi - h);
        std::complex<double> d1_fd = (hi.value - lo.value) / (2.0 * h);
        std::complex<double> d2_fd = (hi.d1 - lo.d1) / (2.0 * h);
        worst = std::max(worst, rel(c.d1, d1_fd));
        worst = std::max(worst, rel(c.d2, d2_fd));
    }
    return worst;
}

namespace {

double psi_value(const IterLogParams& p, double x) {
    return std::pow(iterlog::s(p.n, x), p.eps);
}

double psi_d1(const IterLogParams& p, double x) {
    double sv = iterlog::s(p.n, x);
    return p.eps * std::pow(sv, p.eps - 1.0) * iterlog::ds(p.n, x);
}

double psi_d2(const IterLogParams& p, double x) {
    double sv = iterlog::s(p.n, x);
    double d = iterlog::ds(p.n, x);
    return p.eps * (p.eps - 1.0) * std::pow(sv, p.eps - 2.0) * d * d +
           p.eps * std::pow(sv, p.eps - 1.0) * iterlog::d2s(p.n, x);
}

// Central finite difference of order k (3..6) with O(h^2) truncation.
double central_fd(const IterLogParams& p, int k, double x, double h) {
    auto f = [&](int j) { return psi_value(p, x + j * h); };
    switch (k) {
        case 3: return (-f(-2) + 2 * f(-1) - 2 * f(1) + f(2)) / (2 * h * h * h);
        case 4: return (f(-2) - 4 * f(-1) + 6 * f(0) - 4 * f(1) + f(2)) / (h * h * h * h);
        case 5:
            return (-f(-3) + 4 * f(-2) - 5 * f(-1) + 5 * f(1) - 4 * f(2) + f(3)) /
                   (2 * std::pow(h, 5));
        case 6:
            return (f(-3) - 6 * f(-2) + 15 * f(-1) - 20 * f(0) + 15 * f(1) - 6 * f(2) +
                    f(3)) /
                   std::pow(h, 6);
        default: throw DomainError("central_fd: order out of range");
    }
}

} // namespace

SpotcheckResult bernstein_spotcheck(const IterLogParams& params, int max_order,
                                    const std::vector<double>& grid) {
    if (max_order < 1 || max_order > 6)
        throw DomainError("bernstein_spotcheck: max_order must be in [1, 6]");
    if (!(params.n >= 1) || !(params.eps > 0.0) || !(params.eps <= 1.0))
        throw DomainError("bernstein_spotcheck: invalid tower parameters");

    SpotcheckResult res;
    res.pass = true;
    res.conclusive = true;

    for (double x : grid) {
        if (!(x > 0.0)) throw DomainError("bernstein_spotcheck: grid must be positive");
        for (int k = 1; k <= max_order; ++k) {
            ++res.checked;
            double value, band;
            if (k == 1) {
                value = psi_d1(params, x);
                band = 1e-12 * std::abs(value);
            } else if (k == 2) {
                value = psi_d2(params, x);
                band = 1e-12 * std::abs(value);
            } else {
                double h = 0.2 * x;
                double coarse = central_fd(params, k, x, h);
                double fine = central_fd(params, k, x, 0.5 * h);
                value = fine;
                // O(h^2) differences: halving cuts truncation by 4, so the
                // spread over-estimates the fine-step truncation by ~3x.
                band = std::abs(coarse - fine) + 1e-13 * std::abs(psi_value(params, x)) /
                                                     std::pow(0.5 * h, k);
            }
            // Complete monotonicity of the derivative chain: odd orders are
            // nonnegative, even orders nonpositive.
            double signed_value = (k % 2 == 0) ? value : -value;
            if (signed_value > band) {
                res.pass = false;
                if (res.detail.empty())
                    res.detail = "sign violation at x=" + std::to_string(x) +
                                 " order=" + std::to_string(k);
            } else if (std::abs(value) <= band) {
                ++res.inconclusive;
                res.conclusive = false;
                if (res.detail.empty())
                    res.detail = "inconclusive (noise >= signal) at x=" +
                                 std::to_string(x) + " order=" + std::to_string(k);
            }
        }
    }
    return res;
}

} // namespace checker
} // namespace levydens
