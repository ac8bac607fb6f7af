#ifndef LEVYDENS_BOUNDS_HPP
#define LEVYDENS_BOUNDS_HPP

#include <vector>

#include <json.hpp>

#include "levydens/symbol.hpp"

namespace levydens {

struct DensityResult; // density.hpp

namespace bounds {

// One density envelope (upper or lower): the tower the shape is built from,
// the exponential rate constant (growth fit for the upper side, decay fit for
// the lower), the fitted prefactor at fixed t, and whether the sharpened
// |x|^-2 large-x branch applies (integrable curvature near 0, eps = 1 only).
struct EnvelopeParams {
    IterLogParams params;
    double alpha = 1.0;
    double c_t = 1.0;
    bool refined_large_x = false;
};

// Constant-free piecewise shapes, split at |x| = 1.
//
// Small |x| (both sides share the form, with their own rate constant):
//   (1/|x|) exp(-alpha t s_n(1/|x|)^eps) s_n(1/|x|)^{eps-1} / r_{n-1}(1/|x|)
// with r_0 = 1 (empty product).
//
// Large |x|:
//   upper: |x|^{-1-eps} for eps < 1; |x|^{-2} ln(1+|x|) for eps = 1,
//          sharpened to |x|^{-2} when refined_large_x.
//   lower: |x|^{eps-2} for eps < 1; same eps = 1 branches as the upper side.
//
// The two branches need not agree at |x| = 1; each is positive and finite on
// its closed domain.  Throws DomainError for x = 0.
double upper_envelope_shape(const EnvelopeParams& ep, double t, double x);
double lower_envelope_shape(const EnvelopeParams& ep, double t, double x);

// c_t * shape.
double upper_envelope(const EnvelopeParams& ep, double t, double x);
double lower_envelope(const EnvelopeParams& ep, double t, double x);

// Result of fitting envelope prefactors against computed density samples.
// Ratios are taken per regime (|x| < 1 vs |x| >= 1); the fit passes when both
// constants are finite and positive and no regime's ratio set spreads by more
// than spread_factor, i.e. the shapes are tight up to constants.
struct SandwichFit {
    double c_up = 0.0;  // max over samples of p / upper_shape
    double c_low = 0.0; // min over samples of p / lower_shape
    double spread_small_upper = 0.0;
    double spread_small_lower = 0.0;
    double spread_large_upper = 0.0;
    double spread_large_lower = 0.0;
    double worst_up_x = 0.0;  // sample attaining c_up
    double worst_low_x = 0.0; // sample attaining c_low
    int n_small = 0;
    int n_large = 0;
    double t = 0.0;
    double spread_factor = 0.0;
    bool pass = false;

    // Copies of the input envelope parameters with c_t replaced by the fit;
    // ready to hand to normalization / sub-floor evaluation.
    EnvelopeParams fitted_upper;
    EnvelopeParams fitted_lower;

    nlohmann::json to_json() const;
};

// Fits c_up / c_low over density samples.  Requirements: all samples share
// one t (DomainError), the two envelopes share (n, eps) (DomainError), and
// each regime holds at least five samples (InsufficientCoverageError).
// Samples with |x| < 1 land in the small regime, |x| >= 1 in the large one.
SandwichFit sandwich_fit(const std::vector<DensityResult>& samples,
                         const EnvelopeParams& ep_upper, const EnvelopeParams& ep_lower,
                         double spread_factor = 1e3);

// Weighted-integral estimates for the envelope weight
//   w(z) = z^alpha exp(-t alpha_eps s_n(z)^eps) s_n(z)^{eps-1} / r_{n-1}(z)
// against the common right-hand shape
//   shape(a) = a^{alpha+1} exp(-t alpha_eps s_n(a)^eps) s_n(a)^{eps-1} / r_{n-1}(a).
//
//   case 1 (alpha > -1): integral_1^a w,   a >= 1
//   case 2 (alpha > -1): integral_{a0}^a w, a >= a0 (smaller a's are skipped;
//                         DomainError when the grid holds none)
//   case 3 (alpha < -1): integral_a^infty w, a > 0
//
// Out-of-range alpha for the requested case throws DivergenceError.  The
// report carries one entry per admissible a with the ratio lhs/shape; bounded
// means sup_ratio is finite.  Case 1's ratio tends to (alpha+1)^{-1} for
// large a.
struct Lemma22Entry {
    double a = 0.0;
    double lhs = 0.0;
    double rhs_shape = 0.0;
    double ratio = 0.0;
    double quad_err = 0.0; // quadrature error estimate for lhs
};

struct Lemma22Report {
    int case_id = 0;
    double alpha = 0.0;
    double t = 0.0;
    double alpha_eps = 0.0;
    IterLogParams params;
    double a0 = 0.0; // case 2 only; 0 otherwise
    std::vector<Lemma22Entry> entries;
    double sup_ratio = 0.0;
    bool bounded = false;

    nlohmann::json to_json() const;
};

Lemma22Report lemma22_check(int case_id, double alpha, double t, const IterLogParams& params,
                            const std::vector<double>& a_grid, double alpha_eps = 1.0);

// The case-2 starting point, from its defining equation
//   (1+alpha)^{-1} (n - eps + eps t alpha_eps) ln(1+a0)^{-1} = 1/2
// i.e. a0 = exp(2 (1+alpha)^{-1} (n - eps + eps t alpha_eps)) - 1.
// Requires alpha > -1.
double a0(double alpha, double t, const IterLogParams& params, double alpha_eps = 1.0);

// Exact one-sided mass of the small-|x| envelope on (0, delta), 0 < delta <= 1.
// Substituting u = s_n(1/x) reduces the integral to a closed form J times a
// factor between 1 and Q(1/delta) >= 1:
//   J = exp(-alpha t s_n(1/delta)^eps) / (alpha t eps),
//   Q(y) = (1+y)/y * prod_{k<n} (1+s_k(y))/s_k(y).
// Returns c_t * J (underestimate) or c_t * Q * J (overestimate).
double small_x_envelope_mass(const EnvelopeParams& ep, double t, double delta,
                             bool overestimate);

// Closed-form one-sided tail masses integral_X^infty c_t * shape(x) dx, X >= 1.
double upper_large_x_mass(const EnvelopeParams& ep, double X);
double lower_large_x_mass(const EnvelopeParams& ep, double X);

} // namespace bounds
} // namespace levydens

#endif
