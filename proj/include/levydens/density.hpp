#ifndef LEVYDENS_DENSITY_HPP
#define LEVYDENS_DENSITY_HPP

#include <optional>
#include <string>
#include <vector>

#include "levydens/bounds.hpp"
#include "levydens/checker.hpp"
#include "levydens/symbol.hpp"

namespace levydens {

// automatic resolves to reference when the plain truncated integral provably
// stabilizes fast (n = 1, eps = 1, t >= 2: the amplitude decays like a power
// of exponent -t or faster), else to the period-pairing integrator.  envelope
// reports the midpoint of the fitted two-sided envelopes instead of running
// quadrature; it is also what sub-floor |x| falls back to.
enum class DensityMethod { automatic, pairing, reference, envelope };

std::string method_name(DensityMethod m);

// Fitted two-sided density envelopes (prefactors from sandwich_fit).
struct EnvelopeBracket {
    bounds::EnvelopeParams upper;
    bounds::EnvelopeParams lower;
};

struct DensityConfig {
    DensityMethod method = DensityMethod::automatic;
    double tol_abs = 1e-8; // absolute target for the density value
    double tol_rel = 1e-6; // relative target for the density value
    int quad_order = 16;
    long k_max = 1000000;
    // Below this |x| the density is reported from the envelope bracket rather
    // than quadrature (the small-x envelope is the sharp answer there); set to
    // 0 to force quadrature at arbitrarily small |x|.
    double x_floor = 1e-6;
    bool use_block_extrapolation = true;
    // Majorant constants for the certified truncation envelope; fitted on the
    // default grids when absent.
    std::optional<checker::FittedConstants> fitted;
    // Two-sided envelopes; required for sub-floor or envelope-method queries.
    std::optional<EnvelopeBracket> bracket;
};

struct DensityResult {
    double x = 0.0;
    double t = 0.0;
    double p = 0.0;
    double err_est = 0.0;
    DensityMethod method_used = DensityMethod::pairing;
    long k_used = 0;
    // False when the value is an embedded partial from a per-point failure in
    // density_grid (see its contract); not part of the CSV schema.
    bool converged = true;
};

struct DensityQuery {
    LevySymbol symbol;
    double t = 1.0;
    std::vector<double> xs;
    DensityConfig cfg;
};

// Transition density p_t(x) = (2 pi)^{-1} integral_R e^{-t eta(xi)} e^{-i x xi} dxi,
// evaluated as (2 pi)^{-1} [cos_transform(f1, x) + sin_transform(f2, x)] with
// f1 = Re e^{-t eta}, f2 = Im e^{-t eta}; for symmetric symbols f2 = 0 and only
// the cosine transform runs.  Throws DomainError (t <= 0), SingularityError
// (x = 0), EnvelopeConstantsMissingError (sub-floor |x| without a bracket),
// and propagates NoConvergenceError from the integrator.
DensityResult density(const LevySymbol& symbol, double t, double x,
                      const DensityConfig& cfg = {});

// Maps density over query.xs concurrently (worker count from LEVYDENS_THREADS,
// default hardware concurrency); results ordered as the input.  Per-point
// NoConvergenceError is embedded as the partial value with its error estimate;
// other per-point failures yield p = NaN with err_est = infinity.  Query-level
// validation errors (t <= 0, x = 0 present) still throw.
std::vector<DensityResult> density_grid(const DensityQuery& query);

struct NormalizationResult {
    double mass = 0.0; // estimate of integral p_t over the support
    double err = 0.0;  // bracket half-width: quadrature + point errors + tails
};

// Integrates the density over log-spaced panels on [grid.lo, grid.hi] (both
// support sides for symmetric symbols), then closes the two ends with envelope
// integrals: the exact small-x substitution below grid.lo and the closed-form
// large-x tail beyond grid.hi, each calibrated by the boundary density value
// and widened by the envelope bracket.  Throws EnvelopeConstantsMissingError
// when bracket is absent.
NormalizationResult normalization(const LevySymbol& symbol, double t,
                                  const checker::GridSpec& grid,
                                  const std::optional<EnvelopeBracket>& bracket,
                                  const DensityConfig& cfg = {});

// Semigroup cross-check: compares (p_{t1} * p_{t2}) against p_{t1+t2} on
// interior points of a uniform auxiliary grid interpolated from log-spaced
// samples on [grid.lo, grid.hi]; returns the maximum absolute deviation.
// Mass missing from the auxiliary grid (below its first cell or beyond
// grid.hi) is re-injected as boundary point masses before convolving.
// Throws GridTooCoarseError when the quadrature error estimate exceeds the
// deviation budget.
double convolution_check(const LevySymbol& symbol, double t1, double t2,
                         const checker::GridSpec& grid, const DensityConfig& cfg = {},
                         double err_budget = 1e-2);

// Characteristic-function roundtrip: trapezoid sum of p_t(x) e^{i xi_probe x}
// over log-spaced samples on [grid.lo, grid.hi] (mirrored for symmetric
// symbols) against exp(-t eta(xi_probe)); returns the absolute deviation.
// At xi_probe = 0 this is |mass - 1| for the truncated grid.
double cf_roundtrip(const LevySymbol& symbol, double t, double xi_probe,
                    const checker::GridSpec& grid, const DensityConfig& cfg = {});

// CSV with header exactly `x,t,p,err_est,method,k_used`; floating-point fields
// in shortest round-trip decimal form.
std::string to_csv(const std::vector<DensityResult>& results);

} // namespace levydens

#endif
