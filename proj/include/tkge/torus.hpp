#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Torus geometry: canonical representatives in [0,1)^n, the group
// operation, wrapped differences, the three distance functions and the
// three normalized scoring kernels with their (sub)gradients.
//
// Conventions:
//   - A point of T^n is stored as its canonical representative, each
//     coordinate in [0,1).
//   - A wrapped difference delta is the signed minimal representative of
//     the per-coordinate difference modulo 1, each entry in (-0.5, 0.5];
//     the antipodal case |delta| = 0.5 canonicalizes to +0.5.
//   - Scores are normalized so the maximum over T^n is exactly n,
//     attained iff every delta coordinate equals 0.5.

namespace tkge::torus {

enum class ScoreKind { L1, L2, EL2 };

// Fractional part mapped to [0,1). Requires a finite argument.
double frac(double x);

// Signed minimal representative in (-0.5, 0.5] of s mod 1, for s in [0,1).
inline double wrap_unit(double s) { return s > 0.5 ? s - 1.0 : s; }

class TorusPoint {
 public:
  TorusPoint() = default;

  // Takes ownership of already-canonical coordinates; throws
  // std::invalid_argument if any coordinate is outside [0,1).
  explicit TorusPoint(std::vector<double> canonical);

  std::size_t dimension() const noexcept { return coords_.size(); }
  std::span<const double> coords() const noexcept { return coords_; }
  double operator[](std::size_t i) const { return coords_[i]; }

  friend bool operator==(const TorusPoint&, const TorusPoint&) = default;

 private:
  std::vector<double> coords_;
};

struct WrappedDiff {
  std::vector<double> deltas;  // each in (-0.5, 0.5]

  std::size_t dimension() const noexcept { return deltas.size(); }
};

// Canonical representative of an arbitrary real vector: coordinate-wise
// fractional part. Throws std::invalid_argument on non-finite input.
TorusPoint canonicalize(std::span<const double> raw);

// Group operation [a] + [b]. Throws on dimension mismatch.
TorusPoint torus_add(const TorusPoint& a, const TorusPoint& b);

// Signed minimal per-coordinate difference a - b modulo 1.
WrappedDiff wrapped_diff(const TorusPoint& a, const TorusPoint& b);

// Metric distances on T^n:
//   L1   sum |delta_i|
//   L2   sqrt(sum delta_i^2)
//   EL2  sqrt(sum 4 sin^2(pi delta_i))   (chord length through C^n)
double distance(ScoreKind kind, const TorusPoint& a, const TorusPoint& b);

// Normalized scoring kernels over delta = wrapped_diff(h + r, t):
//   L1   2 sum |delta_i|
//   L2   4 sum delta_i^2
//   EL2  sum sin^2(pi delta_i)
// Zero iff [h] + [r] = [t]; maximum exactly n at delta = 0.5 everywhere.
double score(ScoreKind kind, const TorusPoint& h, const TorusPoint& r,
             const TorusPoint& t);

// d(score)/d(delta_i) per coordinate:
//   L1   2 sign(delta_i)        (0 at delta_i = 0)
//   L2   8 delta_i
//   EL2  pi sin(2 pi delta_i)
// The gradient with respect to h and r coordinates equals this vector;
// with respect to t it is the negation.
std::vector<double> score_gradient(ScoreKind kind, const WrappedDiff& delta);

// Span kernels used by the embedding tables; no allocation, no checks.
// Rows need not be canonical: the fractional part is folded in.
void triple_delta(std::span<const double> h, std::span<const double> r,
                  std::span<const double> t, std::span<double> out);
double score_from_delta(ScoreKind kind, std::span<const double> delta);
double score_span(ScoreKind kind, std::span<const double> h,
                  std::span<const double> r, std::span<const double> t);
double delta_gradient(ScoreKind kind, double delta);
void gradient_from_delta(ScoreKind kind, std::span<const double> delta,
                         std::span<double> out);

}  // namespace tkge::torus
