#include "levydens/density.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "levydens/errors.hpp"
#include "levydens/iterlog.hpp"
#include "levydens/oscint.hpp"
#include "levydens/quadrature.hpp"

namespace levydens {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kTinyDenom = 1e-300;

checker::FittedConstants ensure_fitted(const LevySymbol& sym, const DensityConfig& cfg) {
    if (cfg.fitted) return *cfg.fitted;
    return checker::check_upper_assumptions(sym).fitted;
}

DensityMethod resolve_method(const LevySymbol& sym, double t, DensityMethod m) {
    if (m != DensityMethod::automatic) return m;
    // The plain truncated integral is only provably fast when the amplitude
    // decays at least like a power of exponent -t: with eps = 1 and a single
    // logarithm level, |e^{-t eta}| <= (1 + |xi|)^{-c t}.  For eps < 1 the
    // decay is slower than every power, so the period-pairing integrator is
    // the safe resolution.
    const IterLogParams& p = sym.params();
    if (p.n == 1 && p.eps == 1.0 && t >= 2.0) return DensityMethod::reference;
    return DensityMethod::pairing;
}

// Nonincreasing majorant of |d^2/dxi^2 e^{-t eta(xi)}| on (0, inf), assembled
// from the fitted derivative-majorant constants and the fitted growth rate:
//   |(e^{-t eta})''| <= [t^2 |eta'|^2 + t |eta''|] e^{-t eta1}.
// The derivative constants are inflated by 2.5 (covers the sqrt(2) Re/Im
// combination plus grid-fit slack) and the growth rate is deflated to 0.95 of
// the fitted value; e^{-t eta1} <= 1 below xi = 1, so the damping only turns
// on past the majorant-branch split.
std::function<double(double)> truncation_envelope(const LevySymbol& sym, double t,
                                                  const checker::FittedConstants& fc) {
    const IterLogParams p = sym.params();
    const double alpha = std::max(fc.alpha_eps, 0.0) * 0.95;
    const double c1 = 2.5 * std::max(fc.c_d1, 0.0);
    const double c2 = 2.5 * std::max(fc.c_d2, 0.0);
    const double s1e = std::pow(iterlog::s(p.n, 1.0), p.eps);
    auto shape = [p, t, alpha, c1, c2, s1e](double y) {
        const double se = std::pow(iterlog::s(p.n, y), p.eps);
        const double damp = std::exp(-t * alpha * std::max(0.0, se - s1e));
        const double d1 = c1 * checker::majorant_shape_d1(p, y);
        const double d2 = c2 * checker::majorant_shape_d2(p, y);
        return damp * (t * t * d1 * d1 + t * d2);
    };
    // The cusp shapes blow up like y^(eps-2) toward the origin, but when the
    // exponent's derivatives stay bounded there (the eps = 1 families) the
    // true amplitude does not.  Fit the suprema of |eta'|, |eta''| on (0, 1]
    // and cap the envelope with the resulting constant; for genuinely
    // cuspy symbols the fit itself is huge and the cap is inert.  The cap is
    // floored at the y > 1 branch value so the envelope stays nonincreasing
    // across the branch point.
    double m1 = 0.0, m2 = 0.0;
    for (int i = 0; i <= 72; ++i) {
        const double y = std::pow(10.0, -9.0 + 9.0 * i / 72.0);
        const SymbolJet j = sym.eta(y);
        m1 = std::max(m1, std::abs(j.d1));
        m2 = std::max(m2, std::abs(j.d2));
    }
    const double flat = t * t * (1.25 * m1) * (1.25 * m1) + t * 1.25 * m2;
    const double cap = std::max(flat, shape(std::nextafter(1.0, 2.0)));
    return [shape, cap](double y) {
        return y <= 1.0 ? std::min(cap, shape(y)) : shape(y);
    };
}

DensityResult envelope_result(double t, double x, const DensityConfig& cfg) {
    if (!cfg.bracket)
        throw EnvelopeConstantsMissingError(
            "density: envelope bracket required for envelope-method or sub-floor queries");
    const double up = bounds::upper_envelope(cfg.bracket->upper, t, std::abs(x));
    double lo = bounds::lower_envelope(cfg.bracket->lower, t, std::abs(x));
    lo = std::min(lo, up);
    DensityResult out;
    out.x = x;
    out.t = t;
    out.p = 0.5 * (up + lo);
    out.err_est = 0.5 * (up - lo);
    out.method_used = DensityMethod::envelope;
    out.k_used = 0;
    return out;
}

DensityResult run_pairing(const LevySymbol& sym, double t, double x,
                          const DensityConfig& cfg) {
    const checker::FittedConstants fc = ensure_fitted(sym, cfg);
    const bool real_chf = sym.symmetric();

    oscint::PairingConfig pc;
    pc.quad_order = cfg.quad_order;
    pc.k_max = cfg.k_max;
    // p = (C + S) / (2 pi): the transform-level absolute budget is the density
    // budget scaled by 2 pi, split across the two transforms when both run.
    pc.tol_abs = kTwoPi * cfg.tol_abs * (real_chf ? 1.0 : 0.5);
    pc.tol_rel = 0.25 * cfg.tol_rel;
    pc.use_extrapolation = cfg.use_block_extrapolation;

    std::function<double(double)> envelope = truncation_envelope(sym, t, fc);

    oscint::OscIntegrand even_part;
    even_part.f = [&sym, t](double xi) { return std::exp(-t * sym.eta(xi).value).real(); };
    even_part.envelope_G = envelope;
    even_part.parity = oscint::Parity::Even;

    oscint::TransformResult c;
    try {
        c = oscint::cos_transform(even_part, x, pc);
    } catch (const NoConvergenceError& e) {
        throw NoConvergenceError(std::string("density: cosine transform: ") + e.what(),
                                 e.partial / kTwoPi, e.err_est / kTwoPi, e.k_used);
    }

    DensityResult out;
    out.x = x;
    out.t = t;
    out.method_used = DensityMethod::pairing;
    if (real_chf) {
        out.p = c.value / kTwoPi;
        out.err_est = c.err_est / kTwoPi;
        out.k_used = c.k_used;
        return out;
    }

    oscint::OscIntegrand odd_part;
    odd_part.f = [&sym, t](double xi) { return std::exp(-t * sym.eta(xi).value).imag(); };
    odd_part.envelope_G = envelope;
    odd_part.parity = oscint::Parity::Odd;

    oscint::TransformResult s;
    try {
        s = oscint::sin_transform(odd_part, x, pc);
    } catch (const NoConvergenceError& e) {
        throw NoConvergenceError(std::string("density: sine transform: ") + e.what(),
                                 (c.value + e.partial) / kTwoPi,
                                 (c.err_est + e.err_est) / kTwoPi,
                                 std::max(c.k_used, e.k_used));
    }

    out.p = (c.value + s.value) / kTwoPi;
    out.err_est = (c.err_est + s.err_est) / kTwoPi;
    out.k_used = std::max(c.k_used, s.k_used);
    return out;
}

// Truncated full-line integral via Hermitian symmetry: with
// eta(-xi) = conj(eta(xi)),
//   2 pi p = 2 int_0^Xi [Re chf(xi) cos(x xi) + Im chf(xi) sin(x xi)] dxi + tail,
// integrated on octave segments ([0,1], [1,2], [2,4], ...) whose panels
// resolve both the amplitude (>= 4 panels per octave) and the oscillation
// (width <= pi/|x|), with Xi doubling until two consecutive doublings move
// the value by less than the tolerance.
DensityResult run_reference(const LevySymbol& sym, double t, double x,
                            const DensityConfig& cfg) {
    const bool real_chf = sym.symmetric();
    const double ax = std::abs(x);
    const quadrature::GaussRule& rule = quadrature::gauss_legendre(16);

    quadrature::KahanSum half;
    double abs_acc = 0.0;
    long panels_used = 0;
    const long panel_budget = 1000000;

    auto add_segment = [&](double a, double b) {
        long n = std::max<long>(4, static_cast<long>(std::ceil((b - a) * ax / kPi)));
        const double h = (b - a) / static_cast<double>(n);
        for (long i = 0; i < n; ++i) {
            const double mid = a + h * (static_cast<double>(i) + 0.5);
            for (size_t j = 0; j < rule.nodes.size(); ++j) {
                const double xi = mid + 0.5 * h * rule.nodes[j];
                const std::complex<double> chf = std::exp(-t * sym.eta(xi).value);
                double g = chf.real() * std::cos(x * xi);
                if (!real_chf) g += chf.imag() * std::sin(x * xi);
                const double term = 0.5 * h * rule.weights[j] * g;
                half.add(term);
                abs_acc += std::abs(term);
            }
        }
        panels_used += n;
    };

    double Xi = 1024.0;
    add_segment(0.0, 1.0);
    for (double a = 1.0; a < Xi; a *= 2.0) add_segment(a, 2.0 * a);

    double prev_value = 2.0 * half.value();
    double prev_diff = std::numeric_limits<double>::infinity();
    double value = prev_value;
    double diff = prev_diff;
    for (int doubling = 0; doubling < 64; ++doubling) {
        add_segment(Xi, 2.0 * Xi);
        Xi *= 2.0;
        value = 2.0 * half.value();
        diff = std::abs(value - prev_value);
        const double tol = std::max(kTwoPi * cfg.tol_abs, 0.25 * cfg.tol_rel * std::abs(value));
        if (std::isfinite(prev_diff) && diff < tol && prev_diff < 4.0 * tol) {
            DensityResult out;
            out.x = x;
            out.t = t;
            out.p = value / kTwoPi;
            out.err_est = (diff + 0.5 * prev_diff + 1e-15 * abs_acc) / kTwoPi;
            out.method_used = DensityMethod::reference;
            out.k_used = panels_used;
            return out;
        }
        if (panels_used > panel_budget)
            throw NoConvergenceError(
                "density: truncated integral did not stabilize within the panel budget "
                "(slowly decaying amplitude; use the period-pairing method)",
                value / kTwoPi, (diff + (std::isfinite(prev_diff) ? prev_diff : diff)) / kTwoPi,
                panels_used);
        prev_diff = diff;
        prev_value = value;
    }
    throw NoConvergenceError("density: truncated integral did not stabilize after 64 doublings",
                             value / kTwoPi, (diff + prev_diff) / kTwoPi, panels_used);
}

unsigned worker_count(size_t jobs) {
    long req = 0;
    if (const char* env = std::getenv("LEVYDENS_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) req = v;
    }
    if (req <= 0) {
        unsigned hw = std::thread::hardware_concurrency();
        req = hw ? static_cast<long>(hw) : 1;
    }
    req = std::clamp<long>(req, 1, 64);
    return static_cast<unsigned>(std::min<size_t>(static_cast<size_t>(req), jobs));
}

// Cubic Hermite interpolation with Fritsch-Carlson monotone slopes; overshoot
// between samples never crosses zero on nonnegative data, which keeps the
// interpolated densities usable as quadrature weights.
struct MonotoneCubic {
    std::vector<double> u, v, m;

    void build(const std::vector<double>& uu, const std::vector<double>& vv) {
        u = uu;
        v = vv;
        const size_t n = u.size();
        m.assign(n, 0.0);
        if (n < 2) return;
        std::vector<double> h(n - 1), d(n - 1);
        for (size_t i = 0; i + 1 < n; ++i) {
            h[i] = u[i + 1] - u[i];
            d[i] = (v[i + 1] - v[i]) / h[i];
        }
        if (n == 2) {
            m[0] = m[1] = d[0];
            return;
        }
        for (size_t i = 1; i + 1 < n; ++i) {
            if (d[i - 1] * d[i] <= 0.0) {
                m[i] = 0.0;
                continue;
            }
            const double w1 = 2.0 * h[i] + h[i - 1];
            const double w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
        auto end_slope = [](double h0, double h1, double d0, double d1) {
            double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
            if (s * d0 <= 0.0) return 0.0;
            if (d0 * d1 <= 0.0 && std::abs(s) > 3.0 * std::abs(d0)) return 3.0 * d0;
            return s;
        };
        m[0] = end_slope(h[0], h[1], d[0], d[1]);
        m[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    }

    double operator()(double x) const {
        if (x <= u.front()) return v.front();
        if (x >= u.back()) return v.back();
        const size_t hi =
            static_cast<size_t>(std::upper_bound(u.begin(), u.end(), x) - u.begin());
        const size_t i = hi - 1;
        const double hh = u[i + 1] - u[i];
        const double s = (x - u[i]) / hh;
        const double s2 = s * s, s3 = s2 * s;
        return (2.0 * s3 - 3.0 * s2 + 1.0) * v[i] + hh * (s3 - 2.0 * s2 + s) * m[i] +
               (-2.0 * s3 + 3.0 * s2) * v[i + 1] + hh * (s3 - s2) * m[i + 1];
    }
};

} // namespace

std::string method_name(DensityMethod m) {
    switch (m) {
        case DensityMethod::automatic: return "auto";
        case DensityMethod::pairing: return "pairing";
        case DensityMethod::reference: return "reference";
        case DensityMethod::envelope: return "envelope";
    }
    return "unknown";
}

DensityResult density(const LevySymbol& symbol, double t, double x,
                      const DensityConfig& cfg) {
    if (!(t > 0.0)) throw DomainError("density: t must be positive");
    if (!std::isfinite(x)) throw DomainError("density: x must be finite");
    if (x == 0.0)
        throw SingularityError(
            "density: x = 0 is the envelope singularity; evaluate at |x| > 0");

    const DensityMethod m = resolve_method(symbol, t, cfg.method);
    if (m == DensityMethod::envelope || std::abs(x) < cfg.x_floor)
        return envelope_result(t, x, cfg);
    if (m == DensityMethod::reference) return run_reference(symbol, t, x, cfg);
    return run_pairing(symbol, t, x, cfg);
}

std::vector<DensityResult> density_grid(const DensityQuery& query) {
    if (!(query.t > 0.0)) throw DomainError("density_grid: t must be positive");
    for (double x : query.xs) {
        if (!std::isfinite(x)) throw DomainError("density_grid: grid values must be finite");
        if (x == 0.0) throw SingularityError("density_grid: grid contains x = 0");
    }
    if (query.xs.empty()) return {};

    DensityConfig node = query.cfg;
    const DensityMethod m = resolve_method(query.symbol, query.t, query.cfg.method);
    if (m == DensityMethod::pairing && !node.fitted)
        node.fitted = checker::check_upper_assumptions(query.symbol).fitted;
    // Warm the shared rule cache before any worker needs it.
    quadrature::gauss_legendre(node.quad_order);
    quadrature::gauss_legendre(16);

    const size_t n = query.xs.size();
    std::vector<DensityResult> out(n);
    std::atomic<size_t> next{0};
    auto work = [&]() {
        for (size_t i; (i = next.fetch_add(1)) < n;) {
            const double x = query.xs[i];
            try {
                out[i] = density(query.symbol, query.t, x, node);
            } catch (const NoConvergenceError& e) {
                out[i] = DensityResult{x, query.t, e.partial, e.err_est, m, e.k_used, false};
            } catch (const Error&) {
                out[i] = DensityResult{x, query.t, std::numeric_limits<double>::quiet_NaN(),
                                       std::numeric_limits<double>::infinity(), m, 0, false};
            }
        }
    };

    const unsigned workers = worker_count(n);
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (std::thread& th : pool) th.join();
    }
    return out;
}

NormalizationResult normalization(const LevySymbol& symbol, double t,
                                  const checker::GridSpec& grid,
                                  const std::optional<EnvelopeBracket>& bracket,
                                  const DensityConfig& cfg) {
    if (!(t > 0.0)) throw DomainError("normalization: t must be positive");
    if (!bracket)
        throw EnvelopeConstantsMissingError(
            "normalization: envelope bracket required to close the integration ends");
    if (!(grid.lo > 0.0) || !(grid.hi > grid.lo) || grid.count < 2)
        throw DomainError("normalization: need 0 < lo < hi and count >= 2");
    if (grid.lo > 1.0 || grid.hi < 1.0)
        throw DomainError(
            "normalization: grid must straddle x = 1 so both envelope branches anchor");

    const double side = symbol.symmetric() ? 2.0 : 1.0;

    DensityConfig node = cfg;
    node.method = DensityMethod::pairing;
    node.x_floor = 0.0;
    node.bracket = bracket;
    node.tol_rel = 0.1 * cfg.tol_rel;
    if (!node.fitted) node.fitted = checker::check_upper_assumptions(symbol).fitted;

    // Per-node absolute tolerance rides the lower envelope so tail nodes stop
    // at a modest local relative accuracy instead of chasing a global absolute
    // target that costs millions of period blocks.
    auto eval = [&](double x, double& err_out) -> double {
        DensityConfig c = node;
        c.tol_abs = std::max(cfg.tol_abs * 1e-5,
                             1e-4 * bounds::lower_envelope(bracket->lower, t, x));
        const DensityResult r = density(symbol, t, x, c);
        err_out = r.err_est;
        return r.p;
    };

    const quadrature::GaussRule& fine_rule = quadrature::gauss_legendre(12);
    const quadrature::GaussRule& coarse_rule = quadrature::gauss_legendre(6);

    quadrature::KahanSum mass_grid;
    double quad_err = 0.0;
    double point_err = 0.0;

    // Integrate x p(x) in u = ln x; the coarse-order re-evaluation of each
    // panel provides the quadrature error estimate.
    auto integrate_range = [&](double ua, double ub, double max_width, long min_panels) {
        if (!(ub > ua)) return;
        const long np =
            std::max<long>(static_cast<long>(std::ceil((ub - ua) / max_width)), min_panels);
        const double h = (ub - ua) / static_cast<double>(np);
        for (long i = 0; i < np; ++i) {
            const double mid = ua + h * (static_cast<double>(i) + 0.5);
            double v_fine = 0.0;
            double v_coarse = 0.0;
            for (size_t j = 0; j < fine_rule.nodes.size(); ++j) {
                const double xx = std::exp(mid + 0.5 * h * fine_rule.nodes[j]);
                double perr = 0.0;
                const double p = eval(xx, perr);
                const double w = 0.5 * h * fine_rule.weights[j] * xx;
                v_fine += w * p;
                point_err += w * perr;
            }
            for (size_t j = 0; j < coarse_rule.nodes.size(); ++j) {
                const double xx = std::exp(mid + 0.5 * h * coarse_rule.nodes[j]);
                double perr = 0.0;
                v_coarse += 0.5 * h * coarse_rule.weights[j] * xx * eval(xx, perr);
            }
            mass_grid.add(v_fine);
            quad_err += std::abs(v_fine - v_coarse);
        }
    };

    const double u0 = std::log(grid.lo);
    const double u1 = std::log(grid.hi);
    const double u_split = std::log(1e-3);
    if (u0 < u_split) integrate_range(u0, std::min(u_split, u1), 8.0, 1);
    const long fine_min = std::max<long>(1, static_cast<long>(std::ceil(grid.count / 12.0)));
    integrate_range(std::max(u0, u_split), u1, 0.5, fine_min);

    bounds::EnvelopeParams unit_upper = bracket->upper;
    unit_upper.c_t = 1.0;

    // Small end: the substitution closed form gives the envelope-shape mass on
    // (0, lo] exactly, bracketed between its plain and slowly-varying-corrected
    // values; the prefactor is calibrated from the boundary density so sharp
    // (non-envelope) decay profiles do not inflate the estimate.
    double perr_lo = 0.0;
    const double p_lo = eval(grid.lo, perr_lo);
    const double shape_lo =
        std::max(bounds::upper_envelope_shape(unit_upper, t, grid.lo), kTinyDenom);
    const double c_cal = std::max(p_lo, 0.0) / shape_lo;
    const double j_mass = bounds::small_x_envelope_mass(unit_upper, t, grid.lo, false);
    const double qj_mass = bounds::small_x_envelope_mass(unit_upper, t, grid.lo, true);
    const double small_mid = 0.5 * c_cal * (j_mass + qj_mass);
    const double small_err = 0.5 * c_cal * (qj_mass - j_mass) + 0.5 * small_mid +
                             (perr_lo / shape_lo) * 0.5 * (j_mass + qj_mass);

    // Large end: closed-form envelope-shape tail calibrated at the boundary,
    // bracketed as [0, 1.5 c M] around 0.75 c M since the density may fall
    // arbitrarily faster than its envelope shape.
    double perr_hi = 0.0;
    const double p_hi = eval(grid.hi, perr_hi);
    const double shape_hi =
        std::max(bounds::upper_envelope_shape(unit_upper, t, grid.hi), kTinyDenom);
    const double c_tail_cal = std::max(p_hi, 0.0) / shape_hi;
    const double m_shape = bounds::upper_large_x_mass(unit_upper, grid.hi);
    const double tail_mid = 0.75 * c_tail_cal * m_shape;
    const double tail_err = 0.75 * c_tail_cal * m_shape + (perr_hi / shape_hi) * m_shape;

    NormalizationResult out;
    out.mass = side * (mass_grid.value() + small_mid + tail_mid);
    out.err = side * (quad_err + point_err + small_err + tail_err);
    return out;
}

double convolution_check(const LevySymbol& symbol, double t1, double t2,
                         const checker::GridSpec& grid, const DensityConfig& cfg,
                         double err_budget) {
    if (!(t1 > 0.0) || !(t2 > 0.0))
        throw DomainError("convolution_check: t1 and t2 must be positive");
    if (!(err_budget > 0.0)) throw DomainError("convolution_check: err_budget must be positive");
    if (!(grid.lo > 0.0) || !(grid.hi > grid.lo) || grid.count < 2)
        throw DomainError("convolution_check: need 0 < lo < hi and count >= 2");
    if (grid.hi <= 1.0) throw DomainError("convolution_check: grid.hi must exceed 1");

    const bool mirrored = symbol.symmetric();
    const double X = grid.hi;
    const checker::GridSpec sample_grid{grid.lo, grid.hi, std::max(grid.count, 160)};
    const std::vector<double> xs = checker::log_grid(sample_grid);

    DensityConfig node = cfg;
    node.method = DensityMethod::pairing;
    node.x_floor = 0.0;
    if (!node.fitted) node.fitted = checker::check_upper_assumptions(symbol).fitted;

    auto sample = [&](double tt, double& err_max) {
        DensityQuery q{symbol, tt, xs, node};
        const std::vector<DensityResult> rs = density_grid(q);
        std::vector<double> v(rs.size());
        err_max = 0.0;
        for (size_t i = 0; i < rs.size(); ++i) {
            if (!std::isfinite(rs[i].p))
                throw GridTooCoarseError("convolution_check: density sample failed at x = " +
                                         std::to_string(xs[i]));
            v[i] = std::max(0.0, rs[i].p);
            err_max = std::max(err_max, rs[i].err_est);
        }
        return v;
    };

    double err1 = 0.0, err2 = 0.0, err12 = 0.0;
    const std::vector<double> v1 = sample(t1, err1);
    const std::vector<double> v2 = sample(t2, err2);
    const std::vector<double> v12 = sample(t1 + t2, err12);

    std::vector<double> us(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) us[i] = std::log(xs[i]);
    MonotoneCubic p1, p2;
    p1.build(us, v1);
    p2.build(us, v2);

    auto ptilde = [&](const MonotoneCubic& p, double x) -> double {
        if (x < grid.lo || x > grid.hi) return 0.0;
        return std::max(0.0, p(std::log(x)));
    };

    // Unit-prefactor large-x envelope shape for tail calibration; alpha only
    // enters the small-x branch, so a placeholder value is fine here.
    const bounds::EnvelopeParams tail_ep{symbol.params(), 1.0, 1.0, false};
    auto tail_of = [&](double p_at_hi) {
        const double sh = std::max(bounds::upper_envelope_shape(tail_ep, 1.0, X), kTinyDenom);
        return (std::max(0.0, p_at_hi) / sh) * bounds::upper_large_x_mass(tail_ep, X);
    };
    const double tail1 = tail_of(v1.back());
    const double tail2 = tail_of(v2.back());

    const long lattice_fine = 32768;
    const long lattice_coarse = lattice_fine / 2;
    const double h_fine = X / static_cast<double>(lattice_fine);

    // Cell-averaged lattice amplitudes: integrate the interpolant over each
    // cell (Gauss in log-x, where it is piecewise cubic), so the short-time
    // small-x spike contributes its true cell mass rather than a midpoint
    // sample -- a midpoint rule loses O(1) of the first cells' mass when the
    // density behaves like an integrable power at the origin.  Coarse-cell
    // averages aggregate the fine ones exactly.
    const quadrature::GaussRule& cell_rule = quadrature::gauss_legendre(6);
    auto averaged = [&](const MonotoneCubic& p, long lattice) {
        const double h = X / static_cast<double>(lattice);
        std::vector<double> amps(static_cast<size_t>(lattice), 0.0);
        for (long m = 1; m <= lattice; ++m) {
            const double xa = std::max(grid.lo, (static_cast<double>(m) - 1.0) * h);
            const double xb = std::min(grid.hi, static_cast<double>(m) * h);
            if (!(xb > xa)) continue;
            const double ua = std::log(xa);
            const double ub = std::log(xb);
            double cell = 0.0;
            for (size_t j = 0; j < cell_rule.nodes.size(); ++j) {
                const double u = 0.5 * (ua + ub) + 0.5 * (ub - ua) * cell_rule.nodes[j];
                cell += 0.5 * (ub - ua) * cell_rule.weights[j] *
                        std::max(0.0, p(u)) * std::exp(u);
            }
            amps[static_cast<size_t>(m - 1)] = cell / h;
        }
        return amps;
    };
    const std::vector<double> amps1_fine = averaged(p1, lattice_fine);
    const std::vector<double> amps2_fine = averaged(p2, lattice_fine);
    auto coarsen = [](const std::vector<double>& fine) {
        std::vector<double> c(fine.size() / 2);
        for (size_t k = 0; k < c.size(); ++k) c[k] = 0.5 * (fine[2 * k] + fine[2 * k + 1]);
        return c;
    };
    const std::vector<double> amps1_coarse = coarsen(amps1_fine);
    const std::vector<double> amps2_coarse = coarsen(amps2_fine);

    auto lattice_mass = [&](const std::vector<double>& amps, long lattice) {
        const double h = X / static_cast<double>(lattice);
        quadrature::KahanSum s;
        for (double a : amps) s.add(a);
        const double one_side = h * s.value();
        return mirrored ? 2.0 * one_side : one_side;
    };
    // Whatever unit mass the lattice + envelope tail cannot see (mostly the
    // sub-lo spike near the origin) is carried as a point mass at 0, so the
    // convolution conserves total mass exactly.
    auto atom_of = [&](double lat, double tail) {
        return std::clamp(1.0 - lat - (mirrored ? 2.0 : 1.0) * tail, 0.0, 1.0);
    };

    // Each factor can be steep near the origin, so the convolution is split at
    // xc/2: on its own singular half each factor enters through cell averages
    // while the other is evaluated at the reflected argument (>= xc/2, away
    // from the spike).
    auto convolve_at = [&](double xc, long lattice, const std::vector<double>& amps1,
                           const std::vector<double>& amps2, double a1, double a2) {
        const double h = X / static_cast<double>(lattice);
        quadrature::KahanSum s;
        // Cells straddling the xc/2 split enter with their overlap fraction so
        // the two halves tile [0, xc] without a gap; the split lands far from
        // the origin spike (xc >= 0.25), so the full-cell average is fine there.
        auto half_frac = [&](long m) {
            return std::clamp((0.5 * xc - (static_cast<double>(m) - 1.0) * h) / h, 0.0, 1.0);
        };
        if (mirrored) {
            for (long m = 1; m <= lattice; ++m) {
                const double y = (static_cast<double>(m) - 0.5) * h;
                const double w1 = amps1[static_cast<size_t>(m - 1)];
                const double w2 = amps2[static_cast<size_t>(m - 1)];
                const double f = half_frac(m);
                if (f > 0.0) {
                    if (w1 != 0.0) s.add(f * w1 * ptilde(p2, xc - y));
                    if (w2 != 0.0) s.add(f * w2 * ptilde(p1, xc - y));
                }
                if (w1 != 0.0) s.add(w1 * ptilde(p2, xc + y));
                if (w2 != 0.0) s.add(w2 * ptilde(p1, xc + y));
            }
        } else {
            for (long m = 1; m <= lattice; ++m) {
                const double f = half_frac(m);
                if (f <= 0.0) break;
                const double y = (static_cast<double>(m) - 0.5) * h;
                const double w1 = amps1[static_cast<size_t>(m - 1)];
                const double w2 = amps2[static_cast<size_t>(m - 1)];
                if (w1 != 0.0) s.add(f * w1 * ptilde(p2, xc - y));
                if (w2 != 0.0) s.add(f * w2 * ptilde(p1, xc - y));
            }
        }
        return h * s.value() + a1 * ptilde(p2, xc) + a2 * ptilde(p1, xc);
    };

    const double lo_cmp = std::max(100.0 * h_fine, 0.25);
    const double hi_cmp = X / 4.0;
    std::vector<double> cpts, cref;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] >= lo_cmp && xs[i] <= hi_cmp) {
            cpts.push_back(xs[i]);
            cref.push_back(v12[i]);
        }
    }
    if (cpts.empty())
        throw GridTooCoarseError(
            "convolution_check: no comparison points survive between 100 lattice cells "
            "and a quarter of the grid; widen the grid");

    const double lat1f = lattice_mass(amps1_fine, lattice_fine);
    const double lat2f = lattice_mass(amps2_fine, lattice_fine);
    const double lat1c = lattice_mass(amps1_coarse, lattice_coarse);
    const double lat2c = lattice_mass(amps2_coarse, lattice_coarse);
    const double a1f = atom_of(lat1f, tail1);
    const double a2f = atom_of(lat2f, tail2);
    const double a1c = atom_of(lat1c, tail1);
    const double a2c = atom_of(lat2c, tail2);

    double dev = 0.0;
    double est_refine = 0.0;
    for (size_t i = 0; i < cpts.size(); ++i) {
        const double cf =
            convolve_at(cpts[i], lattice_fine, amps1_fine, amps2_fine, a1f, a2f);
        const double cc =
            convolve_at(cpts[i], lattice_coarse, amps1_coarse, amps2_coarse, a1c, a2c);
        dev = std::max(dev, std::abs(cf - cref[i]));
        est_refine = std::max(est_refine, std::abs(cf - cc));
    }

    auto slope_max = [&](const std::vector<double>& v) {
        double s = 0.0;
        for (size_t i = 0; i + 1 < xs.size(); ++i) {
            const double mid = 0.5 * (xs[i] + xs[i + 1]);
            if (mid < 0.15 || mid > 0.5 * X) continue;
            s = std::max(s, std::abs(v[i + 1] - v[i]) / (xs[i + 1] - xs[i]));
        }
        return s;
    };
    auto value_max = [&](const std::vector<double>& v) {
        double s = 0.0;
        for (size_t i = 0; i < xs.size(); ++i)
            if (xs[i] >= std::min(0.1, 0.25 * lo_cmp)) s = std::max(s, v[i]);
        return s;
    };
    const double slope = std::max(slope_max(v1), slope_max(v2));
    const double est = est_refine + (a1f + a2f) * grid.lo * slope +
                       0.5 * (tail1 * value_max(v2) + tail2 * value_max(v1)) + err1 + err2 +
                       err12;
    if (est > err_budget)
        throw GridTooCoarseError("convolution_check: error estimate " + std::to_string(est) +
                                 " exceeds the deviation budget " + std::to_string(err_budget) +
                                 "; refine the sample grid or widen its range");
    return dev;
}

double cf_roundtrip(const LevySymbol& symbol, double t, double xi_probe,
                    const checker::GridSpec& grid, const DensityConfig& cfg) {
    if (!(t > 0.0)) throw DomainError("cf_roundtrip: t must be positive");
    if (!(grid.lo > 0.0) || !(grid.hi > grid.lo) || grid.count < 2)
        throw DomainError("cf_roundtrip: need 0 < lo < hi and count >= 2");

    const checker::GridSpec sample_grid{grid.lo, grid.hi, std::max(grid.count, 64)};
    const std::vector<double> xs = checker::log_grid(sample_grid);

    DensityConfig node = cfg;
    node.method = DensityMethod::pairing;
    node.x_floor = 0.0;
    if (!node.fitted) node.fitted = checker::check_upper_assumptions(symbol).fitted;

    DensityQuery q{symbol, t, xs, node};
    const std::vector<DensityResult> rs = density_grid(q);
    const size_t n = xs.size();
    auto cell_width = [&](size_t j) {
        const double lo = j == 0 ? xs[0] : 0.5 * (xs[j - 1] + xs[j]);
        const double hi = j + 1 == n ? xs[n - 1] : 0.5 * (xs[j] + xs[j + 1]);
        return hi - lo;
    };

    std::complex<double> sum(0.0, 0.0);
    for (size_t j = 0; j < n; ++j) {
        if (!std::isfinite(rs[j].p))
            throw DomainError("cf_roundtrip: density sample failed at x = " +
                              std::to_string(xs[j]));
        const double w = cell_width(j) * rs[j].p;
        if (symbol.symmetric())
            sum += std::complex<double>(2.0 * w * std::cos(xi_probe * xs[j]), 0.0);
        else
            sum += w * std::exp(std::complex<double>(0.0, xi_probe * xs[j]));
    }
    const std::complex<double> ref =
        xi_probe == 0.0 ? std::complex<double>(1.0, 0.0)
                        : std::exp(-t * symbol.eta(xi_probe).value);
    return std::abs(sum - ref);
}

std::string to_csv(const std::vector<DensityResult>& results) {
    auto put = [](std::string& s, double v) {
        char buf[64];
        const std::to_chars_result r = std::to_chars(buf, buf + sizeof(buf), v);
        s.append(buf, r.ptr);
    };
    std::string out = "x,t,p,err_est,method,k_used\n";
    for (const DensityResult& r : results) {
        put(out, r.x);
        out += ',';
        put(out, r.t);
        out += ',';
        put(out, r.p);
        out += ',';
        put(out, r.err_est);
        out += ',';
        out += method_name(r.method_used);
        out += ',';
        out += std::to_string(r.k_used);
        out += '\n';
    }
    return out;
}

} // namespace levydens
