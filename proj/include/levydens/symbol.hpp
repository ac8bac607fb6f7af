#ifndef LEVYDENS_SYMBOL_HPP
#define LEVYDENS_SYMBOL_HPP

#include <complex>
#include <string>
#include <utility>

namespace levydens {

// Tower parameters shared by every symbol family: depth n and exponent eps.
struct IterLogParams {
    int n = 1;
    double eps = 1.0;
};

// Value and first two xi-derivatives of a symbol at one point.
struct SymbolJet {
    std::complex<double> value{0.0, 0.0};
    std::complex<double> d1{0.0, 0.0};
    std::complex<double> d2{0.0, 0.0};
};

enum class SymbolKind {
    SubordinatorChain,  // eta = (u_n)^eps, u_1 = ln(1 - i xi), u_{k+1} = ln(1 + u_k)
    SymmetricIterLog,   // eta = s_n(|xi|)^eps  (real, even)
    SubordinatedSquare, // eta = s_n(xi^2)^eps  (real, even, smooth at 0 for eps = 1)
};

// Jet of the nested complex logarithm u_n along the principal branch.  The
// recursion asserts Re(1 + u_k) > 0 at every level and throws BranchError if
// the iterate ever leaves the right half-plane.
SymbolJet chain_jet(int n, double xi);

// A characteristic exponent eta with E e^{i xi X_t} = e^{-t eta(xi)}.
//
// Convention: eta() returns the principal-branch complex exponent, so for the
// chain family Im(eta(xi)) < 0 when xi > 0.  eta_parts() flips the imaginary
// part, returning (eta1, eta2) = (Re eta, -Im eta); with that orientation the
// inversion integrand splits as e^{-t eta1} (cos(t eta2) + i sin(t eta2)) and
// the density is (2 pi)^{-1} (cos-transform + sin-transform).  The convention
// is pinned by the closed-form gamma-density acceptance test.
class LevySymbol {
public:
    LevySymbol(SymbolKind kind, IterLogParams params);

    SymbolKind kind() const { return kind_; }
    const IterLogParams& params() const { return params_; }
    bool symmetric() const { return kind_ != SymbolKind::SubordinatorChain; }

    // Full jet.  Always returns a value; at origin cusps (|xi| factors, or
    // eps < 1 powers of a vanishing base) d1/d2 are quiet NaN.
    SymbolJet eta(double xi) const;

    // Same, but throws SingularityError instead of returning NaN derivatives.
    SymbolJet eta_checked(double xi) const;

    // (eta1, eta2) in the orientation described above; eta2(-xi) = -eta2(xi).
    std::pair<double, double> eta_parts(double xi) const;
    double eta1(double xi) const { return eta_parts(xi).first; }
    double eta2(double xi) const { return eta_parts(xi).second; }

    // Round-trip text form ("chain:n=2,eps=0.5").
    std::string spec_string() const;

private:
    SymbolKind kind_;
    IterLogParams params_;
};

// Curvature information for the real tower symbol psi = s_n(x)^eps on x > 0.
struct CurvatureBound {
    double b0;          // B_0(x) = A_{n-1}(x) (1+x)^{-1}, the eps = 1 floor
    double floor_value; // certified lower bound for -psi'': B_0 at eps = 1,
                        // eps * s_{n-1}^{eps-1} * B_0 for eps < 1
    double neg_second;  // exact -psi''(x)
};
CurvatureBound second_derivative_lower(const IterLogParams& params, double x);

// Parses "chain:n=2,eps=1.0" / "sym:n=2,eps=0.5" / "sq:n=1,eps=1.0".
LevySymbol parse_symbol_spec(const std::string& spec);

} // namespace levydens

#endif
