#ifndef LEVYDENS_OSCINT_HPP
#define LEVYDENS_OSCINT_HPP

#include <functional>
#include <vector>

namespace levydens {
namespace oscint {

// Known symmetry of the amplitude f; None means integrate both half-lines.
// Declaring parity is an optimization and a correctness statement: Even makes
// the sine transform identically zero, Odd does the same to cosine.
enum class Parity { Even, Odd, None };

enum class Trig { Cos, Sin };

// Amplitude plus an optional decreasing majorant of |f''| on (0, inf).  The
// envelope is what turns the period summation into a certified computation:
// the truncation error after K whole periods of length 2*pi/|x| is bounded by
// second-derivative mass beyond 2*pi*K/|x| (see tail_bound and the stopping
// rule in cos_transform).
struct OscIntegrand {
    std::function<double(double)> f;
    std::function<double(double)> envelope_G; // empty: no certified tail bound
    Parity parity = Parity::None;
};

// Knobs for the period-pairing integrator.
//   quad_order:  Gauss-Legendre points per quarter-period segment (>= 8).
//   k_max:       hard cap on period blocks before NoConvergenceError.
//   tol_abs:     absolute truncation tolerance for the period sum.
//   tol_rel:     relative tolerance against the running partial sum; the
//                effective tolerance is max(tol_abs, tol_rel*|partial|).
//   use_extrapolation: when the paired blocks settle into a smooth tail,
//                replace the remaining sum by an integral over the continuous
//                block index (midpoint Euler-Maclaurin); cuts the block count
//                for slowly decaying amplitudes by orders of magnitude.
//   block_trace: optional sink receiving each block's contribution on the
//                scale of the returned value (prefactors included).
struct PairingConfig {
    int quad_order = 16;
    long k_max = 1000000;
    double tol_abs = 1e-10;
    double tol_rel = 1e-8;
    bool use_extrapolation = false;
    std::vector<double>* block_trace = nullptr;
};

struct TransformResult {
    double value;
    double err_est; // truncation bound/estimate + quadrature error estimate
    long k_used;    // paired period blocks actually summed
};

// int_R f(xi) cos(x xi) dxi, evaluated as (1/|x|) sum_k I_k where each I_k
// combines one full period into the four-term difference
//   f((a+u)/|x|) - f((a+pi-u)/|x|) - f((a+pi+u)/|x|) + f((a+2pi-u)/|x|),
// a = 2 pi k, integrated against cos(u) over [0, pi/2].  The combination is
// quadratured as one integrand -- never as four separate oscillating pieces --
// so each block costs O(quad_order) evaluations and decays like the second
// derivative of f instead of like f itself.
//
// Stopping: at the first K >= 1 with two consecutive block contributions under
// tol = max(tol_abs, tol_rel*|partial|) AND, when envelope_G is present, a
// certified tail bound below tol.  The certified bound used here is
//   2 pi^2 |x|^-3 G(2 pi K/|x|) + pi |x|^-2 int_{2 pi K/|x|}^inf G(y) dy,
// an over-estimate of the discarded mass on the scale of the returned value.
// Without an envelope the integrator demands three consecutive small blocks
// and reports the (non-certified) continuous-tail estimate in err_est.
//
// Throws DomainError (bad config, x = 0, or envelope not nonincreasing on
// sampled pairs) and NoConvergenceError (k_max blocks without meeting the
// stopping rule; carries the partial value).
TransformResult cos_transform(const OscIntegrand& g, double x,
                              const PairingConfig& cfg = {});

// int_R f(xi) sin(x xi) dxi.  The central interval [-pi/2, pi/2] is integrated
// directly; each following period [2 pi k + pi/2, 2 pi (k+1) + pi/2] collapses
// to the four-term combination with offsets pi/2+u, 3pi/2-u, 3pi/2+u, 5pi/2-u
// against cos(u) over [0, pi/2].  Same stopping and error contract as
// cos_transform; odd in x.
TransformResult sin_transform(const OscIntegrand& g, double x,
                              const PairingConfig& cfg = {});

// (1/x^2) int_{2 pi K/|x|}^inf G(y) dy, evaluated as a panel-wise upper
// Riemann sum so the result over-estimates.  Throws DivergenceError when the
// panel sums fail to contract.  K >= 1.
double tail_bound(const std::function<double(double)>& envelope_G, double x, long K);

// Plain dense quadrature of f(xi) * cos(x xi) (or sin) over [-Xi, Xi]:
// half-period panels, fixed-order Gauss per panel, compensated summation.
// Only meaningful when int |f| converges; callers probe that by doubling Xi
// and watching for stabilization.
double reference_integral(const std::function<double(double)>& f, double x,
                          double Xi, Trig trig = Trig::Cos);

} // namespace oscint
} // namespace levydens

#endif
