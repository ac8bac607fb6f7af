#include "levydens/quadrature.hpp"
#include "levydens/errors.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <string>

namespace levydens {
namespace quadrature {

namespace {

GaussRule compute_rule(int order) {
    GaussRule rule;
    rule.nodes.resize(static_cast<size_t>(order));
    rule.weights.resize(static_cast<size_t>(order));
    const int n = order;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Chebyshev-like initial guess, then Newton on P_n(x) = 0.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[static_cast<size_t>(i)] = -x;
        rule.nodes[static_cast<size_t>(n - 1 - i)] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[static_cast<size_t>(i)] = w;
        rule.weights[static_cast<size_t>(n - 1 - i)] = w;
    }
    return rule;
}

} // namespace

const GaussRule& gauss_legendre(int order) {
    if (order < 2 || order > 256)
        throw DomainError("gauss_legendre: order must be in [2, 256]");
    static std::map<int, GaussRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(order);
    if (it == cache.end())
        it = cache.emplace(order, compute_rule(order)).first;
    return it->second;
}

double gauss(const std::function<double(double)>& f, double a, double b, int order) {
    const GaussRule& rule = gauss_legendre(order);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    KahanSum acc;
    for (size_t i = 0; i < rule.nodes.size(); ++i)
        acc.add(rule.weights[i] * f(mid + half * rule.nodes[i]));
    return acc.value() * half;
}

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double fa,
                    double b, double fb, double m, double fm, double whole,
                    double tol, int depth, int max_depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    if (depth >= max_depth)
        throw ToleranceNotMetError("adaptive_simpson: depth limit at x in [" +
                                   std::to_string(a) + ", " + std::to_string(b) + "]");
    return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth + 1, max_depth) +
           simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth + 1, max_depth);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol_abs, int max_depth) {
    if (!(b > a)) return 0.0;
    double m = 0.5 * (a + b);
    double fa = f(a), fb = f(b), fm = f(m);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, fa, b, fb, m, fm, whole, tol_abs, 0, max_depth);
}

double decreasing_tail_upper_bound(const std::function<double(double)>& g, double a,
                                   double rel_tol) {
    if (!(a > 0.0))
        throw DomainError("decreasing_tail_upper_bound: a must be > 0");
    KahanSum bound;
    double left = a;
    double prev_panel = -1.0;
    int flat_count = 0;
    for (int j = 0; j < 4000; ++j) {
        double right = 2.0 * left;
        // Upper Riemann sum on [left, right]; refine cells until the upper/lower
        // gap for this panel is small relative to the panel itself.
        int cells = 8;
        double panel_upper = 0.0;
        for (int pass = 0; pass < 8; ++pass) {
            double h = (right - left) / cells;
            KahanSum up, lo;
            double gl = g(left);
            for (int c = 0; c < cells; ++c) {
                double gr = g(left + h * (c + 1));
                up.add(gl * h);
                lo.add(gr * h);
                gl = gr;
            }
            panel_upper = up.value();
            if (panel_upper - lo.value() <= 0.25 * rel_tol * (std::abs(panel_upper) + 1e-300))
                break;
            cells *= 4;
        }
        bound.add(panel_upper);
        if (prev_panel >= 0.0) {
            if (panel_upper >= 0.99 * prev_panel) {
                // A valid integrable envelope can hold a plateau (or grow on
                // doubling panels, when g is locally ~constant) for up to
                // ~log2 of the plateau width before its decay regime starts,
                // so only a long persistent failure to contract is treated as
                // divergence.
                if (++flat_count >= 96)
                    throw DivergenceError(
                        "decreasing_tail_upper_bound: panel sums do not contract; "
                        "tail integral looks divergent from a = " + std::to_string(a));
            } else {
                flat_count = 0;
            }
            double ratio = prev_panel > 0.0 ? panel_upper / prev_panel : 0.0;
            if (ratio < 0.95 && panel_upper < rel_tol * bound.value()) {
                // Remaining tail extrapolated geometrically, kept as an over-estimate.
                bound.add(panel_upper * ratio / (1.0 - ratio));
                return bound.value();
            }
        }
        prev_panel = panel_upper;
        left = right;
    }
    throw DivergenceError("decreasing_tail_upper_bound: no convergence after 4000 panel doublings");
}

double tail_integral(const std::function<double(double)>& g, double a,
                     double rel_tol, int order) {
    KahanSum acc;
    double left = a;
    double prev = -1.0;
    for (int j = 0; j < 4000; ++j) {
        double right = 2.0 * left;
        double panel = gauss(g, left, right, order);
        acc.add(panel);
        double apanel = std::abs(panel);
        if (prev >= 0.0 && apanel < 0.5 * prev && apanel < rel_tol * (std::abs(acc.value()) + 1e-300))
            return acc.value();
        prev = apanel;
        left = right;
    }
    throw DivergenceError("tail_integral: no convergence after 4000 panel doublings");
}

} // namespace quadrature
} // namespace levydens
