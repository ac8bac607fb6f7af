#ifndef LEVYDENS_ITERLOG_HPP
#define LEVYDENS_ITERLOG_HPP

#include <vector>

namespace levydens {

// Nested-logarithm tower on x >= 0:
//
//   s(1, x) = ln(1 + x),        s(n, x) = ln(1 + s(n-1, x)),
//   r(n, x) = s(n, x) * s(n-1, x) * ... * s(1, x),
//
// together with their first derivatives and the product chains the derivatives
// are built from.  Everything is evaluated through log1p so that values stay
// accurate down to x = 0 (s(1, x) - x = O(x^2) holds numerically).
namespace iterlog {

// Tower depth guard; deeper towers are indistinguishable from n = 64 in double
// precision for any representable x.
inline constexpr int max_depth = 64;

// s(n, x); domain error for n < 1, x < 0, or non-finite x.
double s(int n, double x);

// r(n, x) = prod_{k=1..n} s(k, x); same domain as s.  r(n, 0) = 0.
double r(int n, double x);

// By convention s(0, x) = x: it is the natural base of the recursion and makes
// shape formulas with s_{n-1} valid at n = 1.
double s0_aware(int n, double x);

// ds(n, x) = d/dx s(n, x) = (1+x)^{-1} * prod_{k=1..n-1} (1 + s(k, x))^{-1}.
// Defined for x >= 0 (the product is finite at 0 for every n; ds(n, 0) = 1).
double ds(int n, double x);

// dr(n, x) = d/dx r(n, x) = sum_{k=1..n} (r(n,x)/s(k,x)) * ds(k, x).
// Requires x > 0 (the k-th term is 0/0 at the origin).
double dr(int n, double x);

// d^2/dx^2 s(n, x) = -ds(n,x) * [ (1+x)^{-1} + sum_{k=1..n-1} ds(k,x)/(1+s_k) ].
// Always negative; needed for curvature bounds.  x >= 0.
double d2s(int n, double x);

// Fills out[0..n-1] with s(1,x) .. s(n,x) in one pass.
void s_tower(int n, double x, std::vector<double>& out);

} // namespace iterlog
} // namespace levydens

#endif
