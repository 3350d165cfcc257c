#pragma once

// Bregman generators on [0, 1], the divergences they induce, and the
// auxiliary quantities used by the accuracy bounds (G-tilde and its concave
// envelope, the c-approximate triangle ratio).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "agreement/errors.hpp"
#include "agreement/structure.hpp"

namespace agreement {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// A strictly convex differentiable potential G on [0, 1].
///
/// `divergence` is an optional closed form of D_G(y || x) that callers
/// prefer when present (better conditioned than the definition near y = x).
class BregmanGenerator {
 public:
  using Scalar = std::function<double(double)>;
  using Binary = std::function<double(double, double)>;

  BregmanGenerator(std::string name, Scalar value, Scalar derivative, Binary divergence = {})
      : name_(std::move(name)),
        value_(std::move(value)),
        derivative_(std::move(derivative)),
        divergence_(std::move(divergence)) {
    summarize();
  }

  const std::string& name() const noexcept { return name_; }
  double value(double x) const { return value_(x); }
  double derivative(double x) const { return derivative_(x); }
  bool has_closed_divergence() const noexcept { return static_cast<bool>(divergence_); }
  double closed_divergence(double y, double x) const { return divergence_(y, x); }

  /// M = max G - min G over [0, 1].
  double range() const noexcept { return range_; }
  double argmin() const noexcept { return argmin_; }
  double min_value() const noexcept { return minValue_; }
  bool symmetric() const noexcept { return symmetric_; }

 private:
  void summarize() {
    // Golden-section search is exact enough for a convex function and avoids
    // relying on the derivative at the endpoints.
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = 0.0, hi = 1.0;
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = value(x1), f2 = value(x2);
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      if (f1 <= f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - phi * (hi - lo);
        f1 = value(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + phi * (hi - lo);
        f2 = value(x2);
      }
    }
    argmin_ = 0.5 * (lo + hi);
    minValue_ = value(argmin_);
    for (double edge : {0.0, 1.0}) {
      if (value(edge) < minValue_) {
        minValue_ = value(edge);
        argmin_ = edge;
      }
    }
    range_ = std::max(value(0.0), value(1.0)) - minValue_;

    symmetric_ = true;
    const double scale = std::max(1.0, range_);
    for (int k = 0; k <= 200 && symmetric_; ++k) {
      const double x = k / 200.0;
      if (std::abs(value(x) - value(1.0 - x)) > 1e-12 * scale) symmetric_ = false;
    }
  }

  std::string name_;
  Scalar value_;
  Scalar derivative_;
  Binary divergence_;
  double range_ = 0.0;
  double argmin_ = 0.0;
  double minValue_ = 0.0;
  bool symmetric_ = false;
};

namespace detail {
// x log(x / y) with the 0 log 0 = 0 convention; y > 0 is required when x > 0.
inline double xlogx_over_y(double x, double y) {
  if (x == 0.0) return 0.0;
  if (y == 0.0) return kInfinity;
  return x * std::log1p((x - y) / y);
}
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }
}  // namespace detail

/// G(x) = x^2; D_G is squared distance.
inline BregmanGenerator squared_generator() {
  return BregmanGenerator(
      "squared", [](double x) { return x * x; }, [](double x) { return 2.0 * x; },
      [](double y, double x) { return (y - x) * (y - x); });
}

/// Negative Shannon entropy; D_G is the KL divergence between Bernoulli laws.
inline BregmanGenerator negative_entropy_generator() {
  return BregmanGenerator(
      "kl", [](double x) { return detail::xlogx(x) + detail::xlogx(1.0 - x); },
      [](double x) {
        if (x <= 0.0) return -kInfinity;
        if (x >= 1.0) return kInfinity;
        return std::log(x) - std::log1p(-x);
      },
      [](double y, double x) { return detail::xlogx_over_y(y, x) + detail::xlogx_over_y(1.0 - y, 1.0 - x); });
}

/// G(x) = x^r for r > 1.
inline BregmanGenerator power_generator(double r) {
  if (!(r > 1.0) || !std::isfinite(r)) {
    throw Error(ErrorCode::DomainError, "power generator needs a finite exponent r > 1");
  }
  std::string name = "power:" + std::to_string(r);
  while (name.back() == '0') name.pop_back();
  if (name.back() == '.') name.pop_back();
  return BregmanGenerator(
      name, [r](double x) { return std::pow(x, r); }, [r](double x) { return r * std::pow(x, r - 1.0); });
}

/// "squared", "kl" or "power:r".
inline BregmanGenerator generator_by_name(const std::string& name) {
  if (name == "squared") return squared_generator();
  if (name == "kl") return negative_entropy_generator();
  if (name.rfind("power:", 0) == 0) {
    const std::string arg = name.substr(6);
    std::size_t used = 0;
    double r = 0.0;
    try {
      r = std::stod(arg, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != arg.size()) {
      throw Error(ErrorCode::InvalidInput, "cannot parse exponent in '" + name + "'");
    }
    return power_generator(r);
  }
  throw Error(ErrorCode::InvalidInput, "unknown generator '" + name + "' (expected squared, kl or power:r)");
}

namespace detail {
inline void require_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(ErrorCode::DomainError, std::string(what) + " = " + std::to_string(v) + " is outside [0, 1]");
  }
}
}  // namespace detail

/// D_G(y || x). Returns +infinity when G' is unbounded at x and y != x.
inline double bregman(const BregmanGenerator& g, double y, double x) {
  detail::require_unit(y, "y");
  detail::require_unit(x, "x");
  if (y == x) return 0.0;
  double d;
  if (g.has_closed_divergence()) {
    d = g.closed_divergence(y, x);
  } else {
    const double slope = g.derivative(x);
    if (!std::isfinite(slope)) return kInfinity;
    d = g.value(y) - g.value(x) - (y - x) * slope;
  }
  if (std::isnan(d)) return kInfinity;
  return std::max(d, 0.0);
}

/// JB_G(a, b) = (G(a) + G(b)) / 2 - G((a + b) / 2). Always finite.
inline double jensen_bregman(const BregmanGenerator& g, double a, double b) {
  detail::require_unit(a, "a");
  detail::require_unit(b, "b");
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  double v;
  if (g.has_closed_divergence()) {
    v = 0.5 * (g.closed_divergence(a, m) + g.closed_divergence(b, m));
  } else {
    v = 0.5 * (g.value(a) + g.value(b)) - g.value(m);
  }
  return std::max(v, 0.0);
}

/// True when every grid chord lies above G by more than 1e-15.
inline bool is_strictly_convex_on_grid(const BregmanGenerator& g, std::size_t steps = 60) {
  for (std::size_t ia = 0; ia < steps; ++ia) {
    for (std::size_t ib = ia + 2; ib <= steps; ++ib) {
      const double a = double(ia) / steps, b = double(ib) / steps;
      const double ga = g.value(a), gb = g.value(b);
      for (std::size_t ix = ia + 1; ix < ib; ++ix) {
        const double x = double(ix) / steps;
        const double chord = ((b - x) * ga + (x - a) * gb) / (b - a);
        if (!(g.value(x) < chord - 1e-15)) return false;
      }
    }
  }
  return true;
}

struct TriangleRatio {
  double ratio = kInfinity;
  double a = 0.0;
  double x = 0.0;
  double b = 0.0;
};

/// min over grid triples a < x < b of (JB(a,x) + JB(x,b)) / JB(a,b).
inline TriangleRatio c_approx_min_ratio(const BregmanGenerator& g, double gridStep = 1e-3) {
  if (!(gridStep > 0.0 && gridStep <= 0.1)) {
    throw Error(ErrorCode::DomainError, "grid step must lie in (0, 0.1]");
  }
  const auto n = static_cast<std::size_t>(std::llround(1.0 / gridStep));
  const std::size_t k = n + 1;
  std::vector<double> grid(k);
  for (std::size_t i = 0; i < k; ++i) grid[i] = double(i) / double(n);
  std::vector<double> jb(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      jb[i * k + j] = jb[j * k + i] = jensen_bregman(g, grid[i], grid[j]);
    }
  }
  TriangleRatio best;
  for (std::size_t ia = 0; ia < k; ++ia) {
    const double* rowA = &jb[ia * k];
    for (std::size_t ib = ia + 2; ib < k; ++ib) {
      const double whole = rowA[ib];
      if (!(whole > 0.0)) continue;
      const double* colB = &jb[ib * k];
      double local = kInfinity;
      std::size_t arg = ia + 1;
      for (std::size_t ix = ia + 1; ix < ib; ++ix) {
        const double s = rowA[ix] + colB[ix];
        if (s < local) {
          local = s;
          arg = ix;
        }
      }
      const double r = local / whole;
      if (r < best.ratio) best = {r, grid[ia], grid[arg], grid[ib]};
    }
  }
  return best;
}

/// G-tilde(x) = max over |a - b| <= x of G(a) - G(b). By convexity the
/// maximum puts a at an endpoint and b as close to argmin G as the gap allows.
inline double tilde_g(const BregmanGenerator& g, double x) {
  x = std::clamp(x, 0.0, 1.0);
  const double m = g.argmin();
  const double left = g.value(0.0) - g.value(std::min(x, m));
  const double right = g.value(1.0) - g.value(std::max(1.0 - x, m));
  return std::max({left, right, 0.0});
}

/// Grid tabulation of G-tilde and its upper concave envelope G-tilde*.
struct EnvelopeTable {
  std::vector<double> gridX;
  std::vector<double> tildeG;
  std::vector<double> tildeGStar;
  std::optional<BregmanGenerator> source;

  /// Linear interpolation of the hull, never below the exact G-tilde(x).
  double star(double x) const {
    x = std::clamp(x, 0.0, 1.0);
    auto it = std::upper_bound(gridX.begin(), gridX.end(), x);
    double hull;
    if (it == gridX.end()) {
      hull = tildeGStar.back();
    } else if (it == gridX.begin()) {
      hull = tildeGStar.front();
    } else {
      const std::size_t hiIdx = static_cast<std::size_t>(it - gridX.begin());
      const std::size_t loIdx = hiIdx - 1;
      const double t = (x - gridX[loIdx]) / (gridX[hiIdx] - gridX[loIdx]);
      hull = tildeGStar[loIdx] + t * (tildeGStar[hiIdx] - tildeGStar[loIdx]);
    }
    return source ? std::max(hull, tilde_g(*source, x)) : hull;
  }
};

/// Builds the table on a uniform grid.
inline EnvelopeTable envelope(const BregmanGenerator& g, std::size_t gridSize = 2001) {
  if (gridSize < 101) throw Error(ErrorCode::DomainError, "envelope grid needs at least 101 points");
  EnvelopeTable t;
  t.source = g;
  t.gridX.resize(gridSize);
  t.tildeG.resize(gridSize);
  for (std::size_t i = 0; i < gridSize; ++i) {
    t.gridX[i] = double(i) / double(gridSize - 1);
    t.tildeG[i] = tilde_g(g, t.gridX[i]);
  }
  // Monotone-chain upper hull over points sorted by x.
  std::vector<std::size_t> hull;
  for (std::size_t i = 0; i < gridSize; ++i) {
    while (hull.size() >= 2) {
      const std::size_t p = hull[hull.size() - 2], q = hull.back();
      const double cross = (t.gridX[q] - t.gridX[p]) * (t.tildeG[i] - t.tildeG[p]) -
                           (t.tildeG[q] - t.tildeG[p]) * (t.gridX[i] - t.gridX[p]);
      if (cross >= 0.0) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(i);
  }
  t.tildeGStar.resize(gridSize);
  for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
    const std::size_t p = hull[h], q = hull[h + 1];
    for (std::size_t i = p; i <= q; ++i) {
      const double w = (t.gridX[i] - t.gridX[p]) / (t.gridX[q] - t.gridX[p]);
      t.tildeGStar[i] = t.tildeG[p] + w * (t.tildeG[q] - t.tildeG[p]);
    }
  }
  if (hull.size() == 1) t.tildeGStar[0] = t.tildeG[0];
  return t;
}

enum class Side { Alice, Bob };

/// |E[D(A||C)] - E[D(A||B)] - E[D(B||C)]| conditioned on `rect`, with
/// A = mu_{sigma tau}, B = the side's belief inside the rectangle and
/// C = mu_{ST}. Cells where any of the three terms is infinite are skipped.
inline double pythagorean_residual(const InformationStructure& s, const BregmanGenerator& g, const Rectangle& rect,
                                   Side side = Side::Alice) {
  const double total = mass(s, rect);
  if (!(total > 0.0)) throw Error(ErrorCode::ZeroMassSlice, "rectangle has zero probability");
  const RectangleStats st = rectangle_stats(s, rect);
  const double c = std::clamp(st.joint_mean(), 0.0, 1.0);
  double ac = 0.0, ab = 0.0, bc = 0.0;
  for (std::size_t r = 0; r < rect.rows.size(); ++r) {
    for (std::size_t q = 0; q < rect.cols.size(); ++q) {
      const std::size_t i = rect.rows[r], j = rect.cols[q];
      const double p = s.prob(i, j);
      if (p == 0.0) continue;
      const double a = s.mean(i, j);
      const double b = side == Side::Alice ? std::clamp(st.rowWeighted[r] / st.rowMass[r], 0.0, 1.0)
                                           : std::clamp(st.colWeighted[q] / st.colMass[q], 0.0, 1.0);
      const double dac = bregman(g, a, c), dab = bregman(g, a, b), dbc = bregman(g, b, c);
      if (!std::isfinite(dac) || !std::isfinite(dab) || !std::isfinite(dbc)) continue;
      ac += p * dac;
      ab += p * dab;
      bc += p * dbc;
    }
  }
  return std::abs(ac - ab - bc) / total;
}

}  // namespace agreement
