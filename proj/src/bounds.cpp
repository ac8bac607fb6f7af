#include "levydens/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "levydens/density.hpp"
#include "levydens/errors.hpp"
#include "levydens/iterlog.hpp"
#include "levydens/quadrature.hpp"

namespace levydens {
namespace bounds {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inv_r_prev(int n, double y) {
    return n >= 2 ? 1.0 / iterlog::r(n - 1, y) : 1.0;
}

void validate_envelope(const EnvelopeParams& ep, double t) {
    if (!(ep.alpha > 0.0) || !(ep.c_t > 0.0))
        throw DomainError("envelope: alpha and c_t must be positive");
    if (!(t > 0.0)) throw DomainError("envelope: t must be positive");
    if (!(ep.params.n >= 1) || !(ep.params.eps > 0.0) || !(ep.params.eps <= 1.0))
        throw DomainError("envelope: invalid tower parameters");
}

// Shared small-|x| branch: (1/a) e^{-alpha t s_n(1/a)^eps} s_n^{eps-1} / r_{n-1}.
double small_branch(const EnvelopeParams& ep, double t, double a) {
    double y = 1.0 / a;
    double s = iterlog::s(ep.params.n, y);
    return (1.0 / a) * std::exp(-ep.alpha * t * std::pow(s, ep.params.eps)) *
           std::pow(s, ep.params.eps - 1.0) * inv_r_prev(ep.params.n, y);
}

// The common right-hand shape of the weighted-integral estimates.
double lemma_shape(const IterLogParams& p, double t, double alpha, double alpha_eps,
                   double a) {
    double s = iterlog::s(p.n, a);
    return std::pow(a, alpha + 1.0) * std::exp(-t * alpha_eps * std::pow(s, p.eps)) *
           std::pow(s, p.eps - 1.0) * inv_r_prev(p.n, a);
}

// The weight w(z) itself.
double lemma_weight(const IterLogParams& p, double t, double alpha, double alpha_eps,
                    double z) {
    double s = iterlog::s(p.n, z);
    return std::pow(z, alpha) * std::exp(-t * alpha_eps * std::pow(s, p.eps)) *
           std::pow(s, p.eps - 1.0) * inv_r_prev(p.n, z);
}

// Composite Gauss-Legendre in u = ln z over [lo, hi], panel width <= max_w.
double log_panels(const std::function<double(double)>& w, double lo, double hi,
                  double max_w, int order) {
    if (!(hi > lo)) return 0.0;
    double ulo = std::log(lo), uhi = std::log(hi);
    int panels = std::max(1, static_cast<int>(std::ceil((uhi - ulo) / max_w)));
    quadrature::KahanSum sum;
    for (int j = 0; j < panels; ++j) {
        double a = ulo + (uhi - ulo) * j / panels;
        double b = ulo + (uhi - ulo) * (j + 1) / panels;
        sum.add(quadrature::gauss([&](double u) { double z = std::exp(u); return z * w(z); },
                                  a, b, order));
    }
    return sum.value();
}

struct TailValue {
    double value;
    double err;
};

// integral_a^infty w for weights with a certified geometric panel-ratio cap
// q < 1: consecutive doubling panels satisfy panel_{j+1} <= q * panel_j, so
// the remainder after the last panel is at most panel * q / (1 - q).  The
// midpoint of [0, bound] is added and half the bound goes to the error.
TailValue geometric_tail(const std::function<double(double)>& w, double a, double q) {
    if (!(q > 0.0) || !(q < 1.0))
        throw DivergenceError("geometric tail: panel ratio cap must be in (0, 1)");
    quadrature::KahanSum acc;
    double err = 0.0;
    double lo = a;
    double panel = 0.0;
    for (int j = 0; j < 4000; ++j) {
        double hi = 2.0 * lo;
        double coarse = log_panels(w, lo, hi, 0.7, 8);
        panel = log_panels(w, lo, hi, 0.35, 12);
        err += std::abs(panel - coarse);
        acc.add(panel);
        lo = hi;
        double remainder_cap = std::abs(panel) * q / (1.0 - q);
        if (remainder_cap <= 1e-13 * std::abs(acc.value()) + 1e-300) {
            acc.add(0.5 * remainder_cap);
            return {acc.value(), err + 0.5 * remainder_cap};
        }
    }
    throw DivergenceError("geometric tail: panels failed to contract within budget");
}

} // namespace

double upper_envelope_shape(const EnvelopeParams& ep, double t, double x) {
    validate_envelope(ep, t);
    double a = std::abs(x);
    if (a == 0.0) throw DomainError("upper_envelope_shape: x must be nonzero");
    if (a < 1.0) return small_branch(ep, t, a);
    if (ep.params.eps < 1.0) return std::pow(a, -1.0 - ep.params.eps);
    if (ep.refined_large_x) return 1.0 / (a * a);
    return std::log1p(a) / (a * a);
}

double lower_envelope_shape(const EnvelopeParams& ep, double t, double x) {
    validate_envelope(ep, t);
    double a = std::abs(x);
    if (a == 0.0) throw DomainError("lower_envelope_shape: x must be nonzero");
    if (a < 1.0) return small_branch(ep, t, a);
    if (ep.params.eps < 1.0) return std::pow(a, ep.params.eps - 2.0);
    if (ep.refined_large_x) return 1.0 / (a * a);
    return std::log1p(a) / (a * a);
}

double upper_envelope(const EnvelopeParams& ep, double t, double x) {
    return ep.c_t * upper_envelope_shape(ep, t, x);
}

double lower_envelope(const EnvelopeParams& ep, double t, double x) {
    return ep.c_t * lower_envelope_shape(ep, t, x);
}

nlohmann::json SandwichFit::to_json() const {
    nlohmann::json spreads;
    spreads["large_lower"] = spread_large_lower;
    spreads["large_upper"] = spread_large_upper;
    spreads["small_lower"] = spread_small_lower;
    spreads["small_upper"] = spread_small_upper;

    nlohmann::json params;
    params["eps"] = fitted_upper.params.eps;
    params["n"] = fitted_upper.params.n;

    nlohmann::json worst;
    worst["lower_x"] = worst_low_x;
    worst["upper_x"] = worst_up_x;

    nlohmann::json j;
    j["alpha_lower"] = fitted_lower.alpha;
    j["alpha_upper"] = fitted_upper.alpha;
    j["c_low"] = c_low;
    j["c_up"] = c_up;
    j["n_large"] = n_large;
    j["n_small"] = n_small;
    j["params"] = std::move(params);
    j["pass"] = pass;
    j["schema_version"] = 1;
    j["spread_factor"] = spread_factor;
    j["spreads"] = std::move(spreads);
    j["t"] = t;
    j["worst_points"] = std::move(worst);
    return j;
}

SandwichFit sandwich_fit(const std::vector<DensityResult>& samples,
                         const EnvelopeParams& ep_upper, const EnvelopeParams& ep_lower,
                         double spread_factor) {
    if (samples.empty()) throw InsufficientCoverageError("sandwich_fit: no samples");
    if (ep_upper.params.n != ep_lower.params.n ||
        ep_upper.params.eps != ep_lower.params.eps)
        throw DomainError("sandwich_fit: envelopes must share (n, eps)");
    if (!(spread_factor > 1.0))
        throw DomainError("sandwich_fit: spread_factor must exceed 1");

    const double t = samples.front().t;
    for (const auto& s : samples) {
        if (s.t != t) throw DomainError("sandwich_fit: samples must share one t");
        if (!std::isfinite(s.p))
            throw DomainError("sandwich_fit: sample with non-finite density at x = " +
                              std::to_string(s.x));
        if (s.x == 0.0) throw DomainError("sandwich_fit: sample at x = 0");
    }

    SandwichFit fit;
    fit.t = t;
    fit.spread_factor = spread_factor;
    fit.fitted_upper = ep_upper;
    fit.fitted_lower = ep_lower;

    // Per-regime ratio extremes; regime 0 = |x| < 1, regime 1 = |x| >= 1.
    double up_min[2] = {kInf, kInf}, up_max[2] = {-kInf, -kInf};
    double lo_min[2] = {kInf, kInf}, lo_max[2] = {-kInf, -kInf};
    int counts[2] = {0, 0};

    fit.c_up = -kInf;
    fit.c_low = kInf;
    for (const auto& s : samples) {
        int regime = std::abs(s.x) < 1.0 ? 0 : 1;
        ++counts[regime];
        double ru = s.p / upper_envelope_shape(ep_upper, t, s.x);
        double rl = s.p / lower_envelope_shape(ep_lower, t, s.x);
        up_min[regime] = std::min(up_min[regime], ru);
        up_max[regime] = std::max(up_max[regime], ru);
        lo_min[regime] = std::min(lo_min[regime], rl);
        lo_max[regime] = std::max(lo_max[regime], rl);
        if (ru > fit.c_up) {
            fit.c_up = ru;
            fit.worst_up_x = s.x;
        }
        if (rl < fit.c_low) {
            fit.c_low = rl;
            fit.worst_low_x = s.x;
        }
    }
    fit.n_small = counts[0];
    fit.n_large = counts[1];
    if (counts[0] < 5 || counts[1] < 5)
        throw InsufficientCoverageError(
            "sandwich_fit: need at least 5 samples per regime, got " +
            std::to_string(counts[0]) + " small and " + std::to_string(counts[1]) +
            " large");

    auto spread = [](double lo, double hi) {
        if (!(lo > 0.0) || !std::isfinite(hi)) return kInf;
        return hi / lo;
    };
    fit.spread_small_upper = spread(up_min[0], up_max[0]);
    fit.spread_small_lower = spread(lo_min[0], lo_max[0]);
    fit.spread_large_upper = spread(up_min[1], up_max[1]);
    fit.spread_large_lower = spread(lo_min[1], lo_max[1]);

    fit.pass = std::isfinite(fit.c_up) && fit.c_up > 0.0 && std::isfinite(fit.c_low) &&
               fit.c_low > 0.0 && fit.spread_small_upper < spread_factor &&
               fit.spread_small_lower < spread_factor &&
               fit.spread_large_upper < spread_factor &&
               fit.spread_large_lower < spread_factor;

    fit.fitted_upper.c_t = fit.pass ? fit.c_up : std::max(fit.c_up, 1e-300);
    fit.fitted_lower.c_t = fit.pass ? fit.c_low : std::max(fit.c_low, 1e-300);
    return fit;
}

double a0(double alpha, double t, const IterLogParams& params, double alpha_eps) {
    if (!(alpha > -1.0)) throw DomainError("a0: requires alpha > -1");
    if (!(t > 0.0) || !(alpha_eps > 0.0)) throw DomainError("a0: t and alpha_eps > 0");
    double exponent =
        2.0 / (1.0 + alpha) * (params.n - params.eps + params.eps * t * alpha_eps);
    return std::expm1(exponent);
}

nlohmann::json Lemma22Report::to_json() const {
    nlohmann::json entries_json = nlohmann::json::array();
    for (const auto& e : entries) {
        nlohmann::json one;
        one["a"] = e.a;
        one["lhs"] = e.lhs;
        one["quad_err"] = e.quad_err;
        one["ratio"] = e.ratio;
        one["rhs_shape"] = e.rhs_shape;
        entries_json.push_back(std::move(one));
    }
    nlohmann::json params_json;
    params_json["eps"] = params.eps;
    params_json["n"] = params.n;

    nlohmann::json j;
    j["a0"] = a0;
    j["alpha"] = alpha;
    j["alpha_eps"] = alpha_eps;
    j["bounded"] = bounded;
    j["case"] = case_id;
    j["entries"] = std::move(entries_json);
    j["params"] = std::move(params_json);
    j["schema_version"] = 1;
    j["sup_ratio"] = sup_ratio;
    j["t"] = t;
    return j;
}

Lemma22Report lemma22_check(int case_id, double alpha, double t,
                            const IterLogParams& params, const std::vector<double>& a_grid,
                            double alpha_eps) {
    if (case_id < 1 || case_id > 3) throw DomainError("lemma22_check: case must be 1..3");
    if (!(t > 0.0) || !(alpha_eps > 0.0))
        throw DomainError("lemma22_check: t and alpha_eps must be positive");
    if ((case_id == 1 || case_id == 2) && !(alpha > -1.0))
        throw DivergenceError("lemma22_check: cases 1 and 2 require alpha > -1");
    if (case_id == 3 && !(alpha < -1.0))
        throw DivergenceError("lemma22_check: case 3 requires alpha < -1");
    if (a_grid.empty()) throw DomainError("lemma22_check: empty a grid");

    Lemma22Report rep;
    rep.case_id = case_id;
    rep.alpha = alpha;
    rep.t = t;
    rep.alpha_eps = alpha_eps;
    rep.params = params;
    if (case_id == 2) rep.a0 = a0(alpha, t, params, alpha_eps);

    auto w = [&](double z) { return lemma_weight(params, t, alpha, alpha_eps, z); };

    for (double a : a_grid) {
        if (case_id != 3 && !(a >= 1.0))
            throw DomainError("lemma22_check: cases 1 and 2 need a >= 1");
        if (case_id == 3 && !(a > 0.0))
            throw DomainError("lemma22_check: case 3 needs a > 0");
        if (case_id == 2 && a < rep.a0) continue; // below the estimate's range

        Lemma22Entry e;
        e.a = a;
        if (case_id == 3) {
            TailValue tv = geometric_tail(w, a, std::pow(2.0, alpha + 1.0));
            e.lhs = tv.value;
            e.quad_err = tv.err;
        } else {
            double lo = case_id == 1 ? 1.0 : rep.a0;
            double coarse = log_panels(w, lo, a, 0.5, 12);
            double fine = log_panels(w, lo, a, 0.25, 12);
            e.lhs = fine;
            e.quad_err = std::abs(fine - coarse);
        }
        e.rhs_shape = lemma_shape(params, t, alpha, alpha_eps, e.a);
        e.ratio = e.lhs / e.rhs_shape;
        rep.entries.push_back(e);
    }
    if (rep.entries.empty())
        throw DomainError("lemma22_check: no grid point reaches the case's range");

    rep.sup_ratio = 0.0;
    for (const auto& e : rep.entries) rep.sup_ratio = std::max(rep.sup_ratio, e.ratio);
    rep.bounded = std::isfinite(rep.sup_ratio);
    return rep;
}

double small_x_envelope_mass(const EnvelopeParams& ep, double t, double delta,
                             bool overestimate) {
    validate_envelope(ep, t);
    if (!(delta > 0.0) || !(delta <= 1.0))
        throw DomainError("small_x_envelope_mass: need 0 < delta <= 1");
    double y = 1.0 / delta;
    double s = iterlog::s(ep.params.n, y);
    double J = std::exp(-ep.alpha * t * std::pow(s, ep.params.eps)) /
               (ep.alpha * t * ep.params.eps);
    if (!overestimate) return ep.c_t * J;
    double Q = (1.0 + y) / y;
    for (int k = 1; k < ep.params.n; ++k) {
        double sk = iterlog::s(k, y);
        Q *= (1.0 + sk) / sk;
    }
    return ep.c_t * Q * J;
}

namespace {

double large_mass(const EnvelopeParams& ep, double X, bool upper) {
    if (!(X >= 1.0)) throw DomainError("large-x envelope mass: need X >= 1");
    double eps = ep.params.eps;
    if (eps < 1.0) {
        if (upper) return ep.c_t * std::pow(X, -eps) / eps;
        return ep.c_t * std::pow(X, eps - 1.0) / (1.0 - eps);
    }
    if (ep.refined_large_x) return ep.c_t / X;
    return ep.c_t * (std::log1p(X) / X + std::log1p(1.0 / X));
}

} // namespace

double upper_large_x_mass(const EnvelopeParams& ep, double X) {
    validate_envelope(ep, 1.0);
    return large_mass(ep, X, true);
}

double lower_large_x_mass(const EnvelopeParams& ep, double X) {
    validate_envelope(ep, 1.0);
    return large_mass(ep, X, false);
}

} // namespace bounds
} // namespace levydens
