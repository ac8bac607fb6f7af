#ifndef LEVYDENS_CHECKER_HPP
#define LEVYDENS_CHECKER_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "levydens/symbol.hpp"

namespace levydens {
namespace checker {

// Deterministic log-spaced grid description; endpoints are included and the
// points are lo * (hi/lo)^(j/(count-1)).  Nested refinement: a grid with
// 2*count - 1 points over the same [lo, hi] contains this grid exactly.
struct GridSpec {
    double lo = 1.0;
    double hi = 1e6;
    int count = 400;
};
std::vector<double> log_grid(const GridSpec& g);

// One inequality failure on the grid: which bound, where, and by how much
// (margin is the offending ratio, e.g. eta1/s^eps when it dips under the floor).
struct Violation {
    double xi;
    std::string inequality;
    double margin;
};

// Constants fitted by grid extrema.  Directions: alpha_eps is an infimum
// (lower-bound constant), every c is a supremum (majorant constant), alpha_0
// is a supremum, c_curv_lower an infimum.  Enlarging the grid can therefore
// only decrease alpha_eps / c_curv_lower and increase alpha_0 / c values.
struct FittedConstants {
    double alpha_eps = 0.0;              // inf eta1(xi) / s_n^eps(xi)
    double c_eta2 = 0.0;                 // sup |eta2| / eta2-shape
    double c_d1 = 0.0;                   // sup max(|eta1'|,|eta2'|) / d1-shape
    double c_d2 = 0.0;                   // sup max(|eta1''|,|eta2''|) / d2-shape
    std::optional<double> alpha_0;       // sup eta / s_n^eps (symmetric check)
    std::optional<double> c_curv_lower;  // inf (-eta'') / curvature-shape (symmetric check)
};

// The tower-scale growth/majorant certificate for one symbol on one grid.
// pass is true exactly when the violation list is empty.
struct AssumptionReport {
    std::string symbol;
    std::string direction;  // "upper" (growth + majorants) or "lower" (decay + curvature)
    GridSpec eta1_grid;     // domain of the growth-constant fit
    GridSpec majorant_grid; // domain of the majorant/curvature fits
    FittedConstants fitted;
    std::vector<Violation> violations;
    bool pass = false;

    // Stable JSON form: alphabetical keys, carries schema_version, byte-identical
    // for identical inputs (no timestamps, no addresses, no randomness).
    nlohmann::json to_json() const;
};

// A fitted growth constant at or below this floor counts as a failed fit: the
// lower bound eta1 >= alpha * s_n^eps has degenerated to nothing numerically.
inline constexpr double alpha_floor = 1e-3;

// Reference shapes the assumption constants multiply.  Exposed so other
// modules (notably the oscillatory-tail envelope assembly in the density
// evaluator) can reuse the exact same shape the constants were fitted
// against.  All take xi != 0 and use |xi|.
//   eta2 / d1 / d2: small-argument power branch for |xi| <= 1, iterated-log
//   branch s_n^{eps-1} r_{n-1}^{-1} (times (1+|xi|)^{-1} per derivative
//   order) for |xi| > 1.
double majorant_shape_eta2(const IterLogParams& params, double xi);
double majorant_shape_d1(const IterLogParams& params, double xi);
double majorant_shape_d2(const IterLogParams& params, double xi);
// Curvature floor shape for symmetric symbols: |xi|^{eps-2} for |xi| <= 1,
// s_{n-1}^{eps-1} r_{n-1}^{-1} (1+|xi|)^{-2} for |xi| > 1 (s_0(x) = x).
double lower_curvature_shape(const IterLogParams& params, double xi);

// Certify the upper-bound assumption set on a grid:
//   eta1(xi)           >= alpha_eps * s_n^eps(xi)        on eta1_grid,
//   |eta2(xi)|         <= c * (|xi|<=1 ? |xi|^eps : s_n^{eps-1} r_{n-1}^{-1}),
//   |eta1'|, |eta2'|   <= c * (|xi|<=1 ? |xi|^{eps-1} : s_n^{eps-1} r_{n-1}^{-1} (1+|xi|)^{-1}),
//   |eta1''|, |eta2''| <= c * (|xi|<=1 ? |xi|^{eps-2} : s_n^{eps-1} r_{n-1}^{-1} (1+|xi|)^{-2}),
// fitting the best admissible constants by grid extrema.  The growth bound is
// checked on [1, 1e6] by default because it provably degenerates as xi -> 0
// for the subordinator-chain family (eta1 ~ xi^2/2 against s_n^eps ~ |xi|^eps);
// extending eta1_grid toward 0 reproduces that failure on purpose.
AssumptionReport check_upper_assumptions(const LevySymbol& sym,
                                         const GridSpec& eta1_grid = {1.0, 1e6, 400},
                                         const GridSpec& majorant_grid = {1e-6, 1e6, 400});

// Certify the lower-bound assumption set for a symmetric (real) symbol:
//   eta(xi)      <= alpha_0 * s_n^eps(xi),
//   -eta''(xi)   >= c * s_{n-1}^{eps-1}(xi) r_{n-1}^{-1}(xi) (1+xi)^{-2}   (|xi| >= 1),
//                >= c * |xi|^{eps-2}                                        (|xi| <= 1),
// with s_0(xi) = xi so the n = 1 shape collapses to (1+xi)^{-2} at eps = 1.
// For the pure tower family the exact -eta'' is also cross-checked against the
// certified curvature floor from second_derivative_lower at every grid point.
// Throws NotSymmetricError for complex-valued symbols.
AssumptionReport check_lower_assumptions(const LevySymbol& sym,
                                         const GridSpec& grid = {1.0, 1e6, 400});

// Worst relative disagreement between analytic jets and central finite
// differences over the grid: d1 against differenced values, d2 against
// differenced analytic d1 (never a second difference of values).  Step
// h = xi * 1e-6 + 1e-9.  Callers choose grids that avoid origin cusps.
double derivative_selftest(const LevySymbol& sym,
                           const GridSpec& grid = {1e-3, 1e6, 200});

// Sign-alternation spot check for the tower Laplace exponent
// psi(x) = s_n(x)^eps on x > 0: psi >= 0 and (-1)^k psi^(k) <= 0 for
// k = 1..max_order.  Orders 1 and 2 are analytic; orders 3..6 use central
// finite differences with one step-halving for an error estimate.  A point
// where the difference noise swamps the signal is recorded as inconclusive
// rather than failed.
struct SpotcheckResult {
    bool pass = false;        // no sign violation beyond the noise band
    bool conclusive = false;  // every (point, order) resolved its sign
    int checked = 0;          // (point, order) pairs examined
    int inconclusive = 0;     // pairs whose sign was lost in difference noise
    std::string detail;       // first failure/inconclusive description, if any
};
SpotcheckResult bernstein_spotcheck(const IterLogParams& params, int max_order,
                                    const std::vector<double>& grid);

} // namespace checker
} // namespace levydens

#endif
