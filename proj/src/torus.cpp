#include "tkge/torus.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace tkge::torus {

namespace {

constexpr double kPi = std::numbers::pi;

void require_same_dimension(std::size_t a, std::size_t b) {
  if (a != b) {
    throw std::invalid_argument("dimension mismatch: " + std::to_string(a) +
                                " vs " + std::to_string(b));
  }
}

}  // namespace

double frac(double x) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument("non-finite torus coordinate");
  }
  double f = x - std::floor(x);
  // x slightly below an integer can round to 1.0; fold back to the
  // canonical representative.
  if (f >= 1.0) f = 0.0;
  return f;
}

TorusPoint::TorusPoint(std::vector<double> canonical)
    : coords_(std::move(canonical)) {
  for (double c : coords_) {
    if (!(c >= 0.0 && c < 1.0)) {
      throw std::invalid_argument("coordinate outside [0,1): " +
                                  std::to_string(c));
    }
  }
}

TorusPoint canonicalize(std::span<const double> raw) {
  std::vector<double> coords(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) coords[i] = frac(raw[i]);
  return TorusPoint(std::move(coords));
}

TorusPoint torus_add(const TorusPoint& a, const TorusPoint& b) {
  require_same_dimension(a.dimension(), b.dimension());
  std::vector<double> coords(a.dimension());
  for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = frac(a[i] + b[i]);
  return TorusPoint(std::move(coords));
}

WrappedDiff wrapped_diff(const TorusPoint& a, const TorusPoint& b) {
  require_same_dimension(a.dimension(), b.dimension());
  WrappedDiff diff;
  diff.deltas.resize(a.dimension());
  for (std::size_t i = 0; i < diff.deltas.size(); ++i) {
    double d = a[i] - b[i];  // in (-1, 1)
    if (d <= -0.5) d += 1.0;
    if (d > 0.5) d -= 1.0;
    diff.deltas[i] = d;
  }
  return diff;
}

double distance(ScoreKind kind, const TorusPoint& a, const TorusPoint& b) {
  const WrappedDiff diff = wrapped_diff(a, b);
  double acc = 0.0;
  switch (kind) {
    case ScoreKind::L1:
      for (double d : diff.deltas) acc += std::abs(d);
      return acc;
    case ScoreKind::L2:
      for (double d : diff.deltas) acc += d * d;
      return std::sqrt(acc);
    case ScoreKind::EL2:
      for (double d : diff.deltas) {
        const double s = std::sin(kPi * d);
        acc += 4.0 * s * s;
      }
      return std::sqrt(acc);
  }
  return acc;
}

double score(ScoreKind kind, const TorusPoint& h, const TorusPoint& r,
             const TorusPoint& t) {
  require_same_dimension(h.dimension(), r.dimension());
  require_same_dimension(h.dimension(), t.dimension());
  return score_span(kind, h.coords(), r.coords(), t.coords());
}

std::vector<double> score_gradient(ScoreKind kind, const WrappedDiff& delta) {
  std::vector<double> grad(delta.dimension());
  gradient_from_delta(kind, delta.deltas, grad);
  return grad;
}

void triple_delta(std::span<const double> h, std::span<const double> r,
                  std::span<const double> t, std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = wrap_unit(frac(h[i] + r[i] - t[i]));
  }
}

double score_from_delta(ScoreKind kind, std::span<const double> delta) {
  double acc = 0.0;
  switch (kind) {
    case ScoreKind::L1:
      for (double d : delta) acc += std::abs(d);
      return 2.0 * acc;
    case ScoreKind::L2:
      for (double d : delta) acc += d * d;
      return 4.0 * acc;
    case ScoreKind::EL2:
      for (double d : delta) {
        const double s = std::sin(kPi * d);
        acc += s * s;
      }
      return acc;
  }
  return acc;
}

double score_span(ScoreKind kind, std::span<const double> h,
                  std::span<const double> r, std::span<const double> t) {
  double acc = 0.0;
  switch (kind) {
    case ScoreKind::L1:
      for (std::size_t i = 0; i < h.size(); ++i) {
        acc += std::abs(wrap_unit(frac(h[i] + r[i] - t[i])));
      }
      return 2.0 * acc;
    case ScoreKind::L2:
      for (std::size_t i = 0; i < h.size(); ++i) {
        const double d = wrap_unit(frac(h[i] + r[i] - t[i]));
        acc += d * d;
      }
      return 4.0 * acc;
    case ScoreKind::EL2:
      for (std::size_t i = 0; i < h.size(); ++i) {
        const double s =
            std::sin(kPi * wrap_unit(frac(h[i] + r[i] - t[i])));
        acc += s * s;
      }
      return acc;
  }
  return acc;
}

double delta_gradient(ScoreKind kind, double delta) {
  switch (kind) {
    case ScoreKind::L1:
      // Subgradient 0 at the kink.
      if (delta > 0.0) return 2.0;
      if (delta < 0.0) return -2.0;
      return 0.0;
    case ScoreKind::L2:
      return 8.0 * delta;
    case ScoreKind::EL2:
      return kPi * std::sin(2.0 * kPi * delta);
  }
  return 0.0;
}

void gradient_from_delta(ScoreKind kind, std::span<const double> delta,
                         std::span<double> out) {
  for (std::size_t i = 0; i < delta.size(); ++i) {
    out[i] = delta_gradient(kind, delta[i]);
  }
}

}  // namespace tkge::torus
