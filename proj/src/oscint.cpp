#include "levydens/oscint.hpp"
#include "levydens/errors.hpp"
#include "levydens/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace levydens {
namespace oscint {

namespace {

using Fn = std::function<double(double)>;
namespace quad = levydens::quadrature;

void validate(const PairingConfig& cfg, double x) {
    if (!(x != 0.0) || !std::isfinite(x))
        throw DomainError("oscint: x must be finite and nonzero");
    if (cfg.quad_order < 8 || cfg.quad_order > 128)
        throw DomainError("oscint: quad_order must be in [8, 128]");
    if (cfg.k_max < 1)
        throw DomainError("oscint: k_max must be >= 1");
    if (!(cfg.tol_abs > 0.0))
        throw DomainError("oscint: tol_abs must be > 0");
    if (cfg.tol_rel < 0.0)
        throw DomainError("oscint: tol_rel must be >= 0");
}

void assert_envelope_decreasing(const Fn& G, double invx) {
    // Sample pairs spanning the scales the tail bound will query.
    double y = 2.0 * M_PI * invx;
    double prev = G(y);
    for (int i = 0; i < 4; ++i) {
        y *= 4.0;
        double cur = G(y);
        if (cur > prev * (1.0 + 1e-12))
            throw DomainError("oscint: envelope_G increases between sampled points");
        prev = cur;
    }
}

// Four-term period combination for the cosine kernel at period offset a:
// amplitude at a+u, a+pi-u, a+pi+u, a+2pi-u in phi-space, phi(v) = f(s*v*invx).
double cos_combo(const Fn& f, double invx, double s, double a, double u) {
    return f(s * (a + u) * invx) - f(s * (a + M_PI - u) * invx) -
           f(s * (a + M_PI + u) * invx) + f(s * (a + 2.0 * M_PI - u) * invx);
}

// Same combination for the sine kernel: offsets pi/2+u, 3pi/2-u, 3pi/2+u,
// 5pi/2-u; after folding the period, the surviving weight is cos(u).
double sin_combo(const Fn& f, double invx, double s, double a, double u) {
    return f(s * (a + 0.5 * M_PI + u) * invx) - f(s * (a + 1.5 * M_PI - u) * invx) -
           f(s * (a + 1.5 * M_PI + u) * invx) + f(s * (a + 2.5 * M_PI - u) * invx);
}

// Gauss-Legendre of g(u)*w(u) over [lo, hi], w = cos or sin.
template <class W>
double gl_weighted(const Fn& g, W weight, double lo, double hi, int order) {
    const quad::GaussRule& rule = quad::gauss_legendre(order);
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    quad::KahanSum acc;
    for (size_t i = 0; i < rule.nodes.size(); ++i) {
        double u = mid + half * rule.nodes[i];
        acc.add(rule.weights[i] * g(u) * weight(u));
    }
    return acc.value() * half;
}

// Geometrically graded partition of [0, pi/2] refined toward 0, for
// amplitudes with a cusp or rapid log-scale variation near the origin.
const std::vector<double>& graded_cuts() {
    static const std::vector<double> cuts = [] {
        std::vector<double> c;
        c.push_back(0.0);
        double u = 0.5 * M_PI * std::pow(0.5, 53);
        while (u < 0.25 * M_PI) {
            c.push_back(u);
            u *= 2.0;
        }
        c.push_back(0.25 * M_PI);
        c.push_back(0.5 * M_PI);
        return c;
    }();
    return cuts;
}

// Integrate g(u)*w(u) over the graded partition with a paired-order error
// estimate; adds the per-panel |GL(q) - GL(2q)| gaps to quad_err.
template <class W>
double graded_weighted(const Fn& g, W weight, int order, double& quad_err) {
    const std::vector<double>& cuts = graded_cuts();
    quad::KahanSum acc;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        double coarse = gl_weighted(g, weight, cuts[i], cuts[i + 1], order);
        double fine = gl_weighted(g, weight, cuts[i], cuts[i + 1], 2 * order);
        quad_err += std::abs(fine - coarse);
        acc.add(fine);
    }
    return acc.value();
}

// Certified over-estimate, on the scale of the returned transform value, of
// everything discarded after K whole periods.  From |f''| <= G and the
// second-difference structure of the pairing,
//   |I_k| <= pi^2 G(2 pi k/|x|) / x^2   per half-line,
// so summing both half-lines and comparing the sum with an integral:
//   tail <= 2 pi^2 |x|^-3 G(a) + pi |x|^-2 int_a^inf G(y) dy,  a = 2 pi K/|x|.
double certified_tail(const Fn& G, double invx, long K) {
    double a = 2.0 * M_PI * static_cast<double>(K) * invx;
    double head = 2.0 * M_PI * M_PI * invx * invx * invx * G(a);
    double integral = quad::decreasing_tail_upper_bound(G, a, 1e-3);
    return head + M_PI * invx * invx * integral;
}

struct BlockSum {
    double value = 0.0;    // transform-scale partial sum over paired blocks
    double quad_err = 0.0; // accumulated quadrature error estimate
    double tail_est = 0.0; // certified bound or continuous-tail estimate
    long k_used = 0;
};

struct Completion {
    double value = 0.0; // transform-scale integral over the continuous index
    double err = 0.0;   // truncation + decay-extrapolation allowance
    // True when the doubling panels decayed all the way down; only then is
    // the geometric-remainder error allowance trustworthy.  A plateau that
    // has not reached its decay regime loses contraction mid-way, and the
    // abandoned remainder can exceed any local panel-based allowance.
    bool contracted = true;
};

// Integrate pref * block(kappa) over [start, inf) with geometrically doubling
// panels.  The paired block is a second difference of the amplitude, so at
// large kappa its evaluation drowns in floating-point cancellation noise;
// integrating that noise over exponentially growing panels would accumulate
// garbage.  The loop therefore stops as soon as panels quit contracting and
// books the abandoned remainder as error instead of value.
template <class Block>
Completion completion_tail(Block block, double start, int order, double pref,
                           double done_below) {
    Completion out;
    quad::KahanSum acc;
    double left = start;
    double prev = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 60; ++j) {
        double right = 2.0 * left;
        double panel = quad::gauss(
            [&](double kappa) { return block(kappa, order); }, left, right, order);
        double apanel = std::abs(panel) * std::abs(pref);
        if (j >= 1 && apanel > 0.0 && apanel >= 0.8 * prev) {
            // Contraction lost: either noise floor or genuinely fat tail.
            out.err += 4.0 * std::max(apanel, prev);
            out.value = pref * acc.value();
            out.contracted = false;
            return out;
        }
        acc.add(panel);
        if (j >= 1 && apanel < done_below) {
            // Remaining panels form a geometric tail at ratio <= 0.8.  The
            // j >= 1 requirement means one contraction has actually been
            // observed: a small first panel alone proves nothing when the
            // integrand is still on a plateau and later panels grow.
            out.err += 4.0 * apanel;
            out.value = pref * acc.value();
            return out;
        }
        prev = apanel;
        left = right;
    }
    out.err += 4.0 * prev;
    out.value = pref * acc.value();
    return out;
}

// Shared driver: sums pref * block(k) for k = 0, 1, ... with stopping,
// certified tail bounds, and optional tail completion.  block(kappa, order)
// returns the paired block; it must accept non-integer kappa so the remaining
// sum can be completed as an integral over the continuous block index.
template <class Block>
BlockSum sum_blocks(Block block, double pref, const Fn* envelope,
                    double invx, const PairingConfig& cfg) {
    BlockSum out;
    quad::KahanSum acc;
    const double inf = std::numeric_limits<double>::infinity();
    double prev1 = inf, prev2 = inf;
    double last_sample_gap = 0.0;
    long next_completion_try = 8; // doubled after each failed attempt
    long next_tail_try = 2;       // certified-tail probe schedule, doubled on failure

    for (long k = 0; k < cfg.k_max; ++k) {
        bool sample_err = (k < 8) || ((k & (k - 1)) == 0);
        double c;
        if (sample_err) {
            double coarse = block(static_cast<double>(k), cfg.quad_order);
            double fine = block(static_cast<double>(k), 2 * cfg.quad_order);
            last_sample_gap = std::abs(fine - coarse) * std::abs(pref);
            out.quad_err += last_sample_gap;
            c = pref * fine;
        } else {
            out.quad_err += last_sample_gap;
            c = pref * block(static_cast<double>(k), cfg.quad_order);
        }
        acc.add(c);
        out.k_used = k + 1;
        if (cfg.block_trace) cfg.block_trace->push_back(c);

        double tol = std::max(cfg.tol_abs, cfg.tol_rel * std::abs(acc.value()));
        bool small2 = k >= 1 && std::abs(c) < tol && std::abs(prev1) < tol;
        bool small3 = small2 && k >= 2 && std::abs(prev2) < tol;

        if (small2 && envelope && k >= next_tail_try) {
            double tail = certified_tail(*envelope, invx, k + 1);
            if (tail < tol) {
                out.value = acc.value();
                out.tail_est = tail;
                return out;
            }
            // The bound shrinks slowly in k; probing it at geometrically
            // spaced indices keeps its integration cost amortized.
            next_tail_try = 2 * k;
        }

        if (cfg.use_extrapolation && k >= next_completion_try) {
            // Midpoint Euler-Maclaurin: sum_{j>k} g(j) = int_{k+1/2}^inf g
            // + g'(k+1/2)/24 + ...; the derivative term is the error scale.
            double em_err = std::abs(c - prev1) / 24.0;
            if (em_err * 4.0 < tol) {
                double start = static_cast<double>(k) + 0.5;
                Completion comp =
                    completion_tail(block, start, cfg.quad_order, pref, 0.1 * tol);
                double total_err = em_err + comp.err;
                bool usable = comp.contracted &&
                              (total_err <= 5.0 * tol || k >= cfg.k_max / 2);
                if (!usable) {
                    // Completion could not certify itself yet (error too
                    // large, or its panels quit contracting before reaching
                    // the decay regime); keep summing and retry once the
                    // block index has doubled.
                    next_completion_try = 2 * k;
                    prev2 = prev1;
                    prev1 = c;
                    continue;
                }
                acc.add(comp.value);
                out.value = acc.value();
                out.tail_est = total_err;
                return out;
            }
        }

        if (small3 && !envelope && !cfg.use_extrapolation) {
            // No certified bound available: estimate the remainder from the
            // continuous block index but keep the value a plain partial sum.
            double start = static_cast<double>(k) + 0.5;
            Completion comp =
                completion_tail(block, start, cfg.quad_order, pref, 0.1 * tol);
            if (comp.contracted) {
                out.value = acc.value();
                out.tail_est =
                    std::abs(comp.value) + comp.err + std::abs(c - prev1) / 24.0;
                return out;
            }
        }
        prev2 = prev1;
        prev1 = c;
    }
    out.value = acc.value();
    out.tail_est = std::isfinite(prev1) ? std::abs(prev1) * 16.0 : inf;
    throw NoConvergenceError(
        "oscint: period sum did not meet tolerance within k_max blocks",
        out.value, out.tail_est + out.quad_err, out.k_used);
}

double cos_w(double u) { return std::cos(u); }
double sin_w(double u) { return std::sin(u); }

} // namespace

TransformResult cos_transform(const OscIntegrand& g, double x, const PairingConfig& cfg) {
    validate(cfg, x);
    if (!g.f) throw DomainError("oscint: integrand function is empty");
    if (g.parity == Parity::Odd) return {0.0, 0.0, 0};

    const double invx = 1.0 / std::abs(x);
    const bool both_sides = g.parity == Parity::None;
    const double pref = invx * (g.parity == Parity::Even ? 2.0 : 1.0);
    const Fn* env = g.envelope_G ? &g.envelope_G : nullptr;
    if (env) assert_envelope_decreasing(g.envelope_G, invx);

    double graded_err = 0.0;

    // Block 0 carries the only arguments that approach the origin; its first
    // term runs on the graded partition, the three smooth companions on plain
    // fixed-order quadrature.  All other blocks use the paired combination.
    auto block = [&](double kappa, int order) -> double {
        if (kappa == 0.0) {
            double head = graded_weighted(
                [&](double u) {
                    double v = g.f(u * invx);
                    if (both_sides) v += g.f(-u * invx);
                    return v;
                },
                cos_w, order, graded_err);
            double rest = gl_weighted(
                [&](double u) {
                    double v = -g.f((M_PI - u) * invx) - g.f((M_PI + u) * invx) +
                               g.f((2.0 * M_PI - u) * invx);
                    if (both_sides)
                        v += -g.f(-(M_PI - u) * invx) - g.f(-(M_PI + u) * invx) +
                             g.f(-(2.0 * M_PI - u) * invx);
                    return v;
                },
                cos_w, 0.0, 0.5 * M_PI, order);
            return head + rest;
        }
        double a = 2.0 * M_PI * kappa;
        return gl_weighted(
            [&](double u) {
                double v = cos_combo(g.f, invx, 1.0, a, u);
                if (both_sides) v += cos_combo(g.f, invx, -1.0, a, u);
                return v;
            },
            cos_w, 0.0, 0.5 * M_PI, order);
    };

    BlockSum s = sum_blocks(block, pref, env, invx, cfg);
    return {s.value, s.tail_est + s.quad_err + graded_err * pref, s.k_used};
}

TransformResult sin_transform(const OscIntegrand& g, double x, const PairingConfig& cfg) {
    validate(cfg, x);
    if (!g.f) throw DomainError("oscint: integrand function is empty");
    if (g.parity == Parity::Even) return {0.0, 0.0, 0};

    const double sign = x > 0.0 ? 1.0 : -1.0;
    const double invx = 1.0 / std::abs(x);
    const bool both_sides = g.parity == Parity::None;
    const double pref = invx * (g.parity == Parity::Odd ? 2.0 : 1.0);
    const Fn* env = g.envelope_G ? &g.envelope_G : nullptr;
    if (env) assert_envelope_decreasing(g.envelope_G, invx);

    // Central interval [-pi/2, pi/2], reduced to [0, pi/2] against the odd
    // part of the amplitude; graded toward the origin.
    double graded_err = 0.0;
    double central = graded_weighted(
        [&](double u) {
            double v = g.f(u * invx);
            if (both_sides) v -= g.f(-u * invx);
            return v;
        },
        sin_w, cfg.quad_order, graded_err);

    auto block = [&](double kappa, int order) -> double {
        double a = 2.0 * M_PI * kappa;
        return gl_weighted(
            [&](double u) {
                double v = sin_combo(g.f, invx, 1.0, a, u);
                if (both_sides) v -= sin_combo(g.f, invx, -1.0, a, u);
                return v;
            },
            cos_w, 0.0, 0.5 * M_PI, order);
    };

    BlockSum s;
    try {
        s = sum_blocks(block, pref, env, invx, cfg);
    } catch (NoConvergenceError& e) {
        throw NoConvergenceError(e.what(), sign * (pref * central + e.partial),
                                 e.err_est + graded_err * pref, e.k_used);
    }
    double value = sign * (pref * central + s.value);
    return {value, s.tail_est + s.quad_err + graded_err * pref, s.k_used};
}

double tail_bound(const std::function<double(double)>& envelope_G, double x, long K) {
    if (!(x != 0.0) || !std::isfinite(x))
        throw DomainError("tail_bound: x must be finite and nonzero");
    if (K < 1) throw DomainError("tail_bound: K must be >= 1");
    if (!envelope_G) throw DomainError("tail_bound: envelope_G is empty");
    double a = 2.0 * M_PI * static_cast<double>(K) / std::abs(x);
    double integral = quad::decreasing_tail_upper_bound(envelope_G, a, 1e-3);
    return integral / (x * x);
}

double reference_integral(const std::function<double(double)>& f, double x,
                          double Xi, Trig trig) {
    if (!(x != 0.0) || !std::isfinite(x))
        throw DomainError("reference_integral: x must be finite and nonzero");
    if (!(Xi > 0.0))
        throw DomainError("reference_integral: Xi must be > 0");
    const double ax = std::abs(x);
    // Panels no wider than a half oscillation, and at least 64 per side so
    // slowly varying amplitudes are still resolved.
    double width = std::min(M_PI / ax, Xi / 64.0);
    long n_panels = static_cast<long>(std::ceil(Xi / width));
    if (n_panels > 50'000'000)
        throw ToleranceNotMetError("reference_integral: panel count over budget; "
                                   "Xi too large for this x");
    double h = Xi / static_cast<double>(n_panels);
    quad::KahanSum acc;
    auto kernel = [&](double xi) {
        double w = trig == Trig::Cos ? std::cos(x * xi) : std::sin(x * xi);
        return f(xi) * w;
    };
    for (long i = 0; i < n_panels; ++i) {
        double lo = h * static_cast<double>(i), hi = lo + h;
        acc.add(quad::gauss(kernel, lo, hi, 24));
        acc.add(quad::gauss(kernel, -hi, -lo, 24));
    }
    return acc.value();
}

} // namespace oscint
} // namespace levydens
