#ifndef LEVYDENS_QUADRATURE_HPP
#define LEVYDENS_QUADRATURE_HPP

#include <functional>
#include <vector>

namespace levydens {
namespace quadrature {

// Gauss-Legendre rule on [-1, 1]; nodes/weights computed once per order by
// Newton iteration on P_n and cached.  order >= 2.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussRule& gauss_legendre(int order);

// Integrate f over [a, b] with a fixed-order rule.
double gauss(const std::function<double(double)>& f, double a, double b, int order);

// Adaptive Simpson with absolute tolerance; throws ToleranceNotMetError when
// the recursion depth limit is reached before the tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol_abs, int max_depth = 48);

// Upper bound for the tail integral of a nonincreasing nonnegative g:
//
//   int_a^inf g(y) dy  <=  returned value,
//
// built from panel-wise upper Riemann sums over geometrically doubling panels
// [a 2^j, a 2^{j+1}].  Stops once the running bound is resolved to rel_tol and
// the panels contract; throws DivergenceError when panel sums refuse to shrink.
double decreasing_tail_upper_bound(const std::function<double(double)>& g, double a,
                                   double rel_tol = 1e-3);

// Plain doubling-panel evaluation (Gauss per panel) of int_a^inf g, for smooth
// integrands that decay at least like a power.  Not an upper bound.
double tail_integral(const std::function<double(double)>& g, double a,
                     double rel_tol = 1e-10, int order = 32);

// Compensated accumulator.
class KahanSum {
public:
    void add(double v) {
        double y = v - c_;
        double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }
private:
    double s_ = 0.0;
    double c_ = 0.0;
};

} // namespace quadrature
} // namespace levydens

#endif
