#pragma once

// Weak and rectangle substitutes checks, and the delta of approximate
// rectangle substitutes.
//
// On a rectangle S x T the substitutes inequality in mean-only form reads
//   E[D(mu_{sigma tau} || mu_{S tau}) | S,T] <= E[D(mu_{sigma T} || mu_{ST}) | S,T].
// The violation of a rectangle is LHS - RHS.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "agreement/divergence.hpp"
#include "agreement/structure.hpp"

namespace agreement {

enum class SubstitutesMode { Weak, Rectangle, Delta };

constexpr std::string_view to_string(SubstitutesMode m) {
  switch (m) {
    case SubstitutesMode::Weak: return "weak";
    case SubstitutesMode::Rectangle: return "rectangle";
    case SubstitutesMode::Delta: return "delta";
  }
  return "unknown";
}

inline SubstitutesMode substitutes_mode_from_string(std::string_view name) {
  if (name == "weak") return SubstitutesMode::Weak;
  if (name == "rectangle") return SubstitutesMode::Rectangle;
  if (name == "delta") return SubstitutesMode::Delta;
  throw Error(ErrorCode::InvalidInput, "unknown substitutes mode '" + std::string(name) + "'");
}

/// Standard: LHS uses Bob's line beliefs. Transposed: the rearranged form
/// E[D(mu_{sigma tau} || mu_{sigma T})] <= E[D(mu_{S tau} || mu_{ST})].
enum class Orientation { Standard, Transposed };

struct CheckOptions {
  double tolerance = 1e-10;
  std::size_t maxSide = 12;
  Orientation orientation = Orientation::Standard;
};

struct SubstitutesReport {
  bool holds = true;
  std::optional<Rectangle> worstRect;
  double worstViolation = -kInfinity;
  double worstLhs = 0.0;
  double worstRhs = 0.0;
  double fullLhs = 0.0;
  double fullRhs = 0.0;
  std::size_t rectanglesChecked = 0;
  SubstitutesMode mode = SubstitutesMode::Weak;
  std::string generator;
  double tolerance = 1e-10;
};

struct RectangleSides {
  double mass = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double violation() const { return lhs - rhs; }
};

/// Both sides of the inequality on one rectangle, by direct summation.
inline RectangleSides substitutes_sides(const InformationStructure& s, const BregmanGenerator& g,
                                        const Rectangle& rect) {
  const RectangleStats st = rectangle_stats(s, rect);
  RectangleSides out;
  out.mass = st.mass;
  if (!(st.mass > 0.0)) throw Error(ErrorCode::ZeroMassSlice, "rectangle has zero probability");
  const double c = std::clamp(st.joint_mean(), 0.0, 1.0);
  for (std::size_t r = 0; r < rect.rows.size(); ++r) {
    if (!(st.rowMass[r] > 0.0)) continue;
    const double a = std::clamp(st.rowWeighted[r] / st.rowMass[r], 0.0, 1.0);
    out.rhs += st.rowMass[r] * bregman(g, a, c);
    for (std::size_t q = 0; q < rect.cols.size(); ++q) {
      const std::size_t i = rect.rows[r], j = rect.cols[q];
      const double p = s.prob(i, j);
      if (p == 0.0) continue;
      const double b = std::clamp(st.colWeighted[q] / st.colMass[q], 0.0, 1.0);
      out.lhs += p * bregman(g, s.mean(i, j), b);
    }
  }
  out.lhs /= st.mass;
  out.rhs /= st.mass;
  return out;
}

namespace detail {

inline IndexSet bits_to_indices(std::uint32_t mask) {
  IndexSet out;
  for (std::size_t k = 0; mask; ++k, mask >>= 1) {
    if (mask & 1u) out.push_back(k);
  }
  return out;
}

/// Visits every nonempty S x T with positive mass, passing (rowMask, colMask,
/// sides). Per row subset the column-side LHS terms are tabulated once; per
/// column subset the row masses are tabulated once, so each rectangle costs
/// O(m + n) divergence evaluations.
template <class Visit>
void for_each_rectangle(const InformationStructure& s, const BregmanGenerator& g, Visit&& visit) {
  const std::size_t m = s.rows(), n = s.cols();
  const std::uint32_t rowsAll = (std::uint32_t{1} << m) - 1;
  const std::uint32_t colsAll = (std::uint32_t{1} << n) - 1;

  // Row masses and weighted sums restricted to each column subset.
  std::vector<double> rowMassT((colsAll + 1) * m, 0.0), rowWT((colsAll + 1) * m, 0.0);
  for (std::uint32_t T = 1; T <= colsAll; ++T) {
    const std::size_t low = static_cast<std::size_t>(__builtin_ctz(T));
    const std::uint32_t rest = T & (T - 1);
    for (std::size_t i = 0; i < m; ++i) {
      const double p = s.prob(i, low);
      rowMassT[T * m + i] = rowMassT[rest * m + i] + p;
      rowWT[T * m + i] = rowWT[rest * m + i] + p * s.mean(i, low);
    }
  }

  std::vector<double> colMass(n), colW(n), lhsCol(n);
  for (std::uint32_t S = 1; S <= rowsAll; ++S) {
    const IndexSet rows = bits_to_indices(S);
    for (std::size_t j = 0; j < n; ++j) {
      double cm = 0.0, cw = 0.0;
      for (std::size_t i : rows) {
        cm += s.prob(i, j);
        cw += s.prob(i, j) * s.mean(i, j);
      }
      colMass[j] = cm;
      colW[j] = cw;
      double l = 0.0;
      if (cm > 0.0) {
        const double b = std::clamp(cw / cm, 0.0, 1.0);
        for (std::size_t i : rows) {
          const double p = s.prob(i, j);
          if (p > 0.0) l += p * bregman(g, s.mean(i, j), b);
        }
      }
      lhsCol[j] = l;
    }
    for (std::uint32_t T = 1; T <= colsAll; ++T) {
      double total = 0.0, weighted = 0.0, lhs = 0.0;
      for (std::uint32_t bits = T; bits; bits &= bits - 1) {
        const std::size_t j = static_cast<std::size_t>(__builtin_ctz(bits));
        total += colMass[j];
        weighted += colW[j];
        lhs += lhsCol[j];
      }
      if (!(total > 0.0)) continue;
      const double c = std::clamp(weighted / total, 0.0, 1.0);
      double rhs = 0.0;
      for (std::size_t i : rows) {
        const double rm = rowMassT[T * m + i];
        if (rm > 0.0) rhs += rm * bregman(g, std::clamp(rowWT[T * m + i] / rm, 0.0, 1.0), c);
      }
      visit(S, T, RectangleSides{total, lhs / total, rhs / total});
    }
  }
}

inline void require_enumerable(const InformationStructure& s, std::size_t maxSide) {
  if (s.rows() > maxSide || s.cols() > maxSide || s.rows() > 24 || s.cols() > 24) {
    throw Error(ErrorCode::TooLargeForEnumeration,
                std::to_string(s.rows()) + "x" + std::to_string(s.cols()) + " exceeds the enumeration limit of " +
                    std::to_string(std::min<std::size_t>(maxSide, 24)) + " per side");
  }
}

}  // namespace detail

/// Weak mode checks the full rectangle only; rectangle mode checks every
/// nonempty sub-rectangle of positive mass.
inline SubstitutesReport rectangle_check(const InformationStructure& input, const BregmanGenerator& g,
                                         SubstitutesMode mode, const CheckOptions& options = {}) {
  if (mode == SubstitutesMode::Delta) {
    throw Error(ErrorCode::InvalidInput, "use delta_estimate for delta mode");
  }
  const bool transposed = options.orientation == Orientation::Transposed;
  const InformationStructure s = transposed ? transpose(input) : input;
  auto orient = [&](Rectangle r) {
    return transposed ? Rectangle(std::move(r.cols), std::move(r.rows)) : r;
  };

  SubstitutesReport rep;
  rep.mode = mode;
  rep.generator = g.name();
  rep.tolerance = options.tolerance;
  const RectangleSides full = substitutes_sides(s, g, s.full());
  rep.fullLhs = full.lhs;
  rep.fullRhs = full.rhs;

  if (mode == SubstitutesMode::Weak) {
    rep.rectanglesChecked = 1;
    rep.worstViolation = full.violation();
    rep.worstLhs = full.lhs;
    rep.worstRhs = full.rhs;
    rep.worstRect = orient(s.full());
  } else {
    detail::require_enumerable(s, options.maxSide);
    std::uint32_t bestS = 0, bestT = 0;
    detail::for_each_rectangle(s, g, [&](std::uint32_t S, std::uint32_t T, const RectangleSides& sides) {
      ++rep.rectanglesChecked;
      if (sides.violation() > rep.worstViolation) {
        rep.worstViolation = sides.violation();
        rep.worstLhs = sides.lhs;
        rep.worstRhs = sides.rhs;
        bestS = S;
        bestT = T;
      }
    });
    if (rep.rectanglesChecked > 0) {
      rep.worstRect = orient(Rectangle(detail::bits_to_indices(bestS), detail::bits_to_indices(bestT)));
    }
  }
  rep.holds = !(rep.worstViolation > options.tolerance);
  return rep;
}

struct DeltaEstimate {
  double lowerBound = 0.0;
  std::optional<Rectangle> lowerBoundRect;
  std::optional<double> exact;
  std::uint64_t partitionsEnumerated = 0;
};

/// lowerBound = max over rectangles of mass * violation (the rest of the grid
/// completed by singletons, which contribute zero). exact = max over all
/// partitions of the grid into rectangles of the summed mass * violation,
/// computed when rows * cols <= exactLimit.
inline DeltaEstimate delta_estimate(const InformationStructure& s, const BregmanGenerator& g,
                                    std::size_t exactLimit = 9, std::size_t maxSide = 12) {
  detail::require_enumerable(s, maxSide);
  const std::size_t m = s.rows(), n = s.cols(), cells = m * n;
  const bool wantExact = cells <= exactLimit && cells <= 20;

  DeltaEstimate est;
  std::uint32_t bestS = 0, bestT = 0;
  // Cell masks of every rectangle with its weight; zero-mass rectangles weigh 0.
  std::vector<std::pair<std::uint32_t, double>> rects;
  std::unordered_map<std::uint64_t, double> weight;
  detail::for_each_rectangle(s, g, [&](std::uint32_t S, std::uint32_t T, const RectangleSides& sides) {
    const double w = sides.mass * sides.violation();
    if (w > est.lowerBound) {
      est.lowerBound = w;
      bestS = S;
      bestT = T;
    }
    if (wantExact) weight[(std::uint64_t{S} << 32) | T] = w;
  });
  if (bestS != 0) est.lowerBoundRect = Rectangle(detail::bits_to_indices(bestS), detail::bits_to_indices(bestT));
  if (!wantExact) return est;

  for (std::uint32_t S = 1; S < (std::uint32_t{1} << m); ++S) {
    for (std::uint32_t T = 1; T < (std::uint32_t{1} << n); ++T) {
      std::uint32_t cellMask = 0;
      for (std::uint32_t rb = S; rb; rb &= rb - 1) {
        const std::size_t i = static_cast<std::size_t>(__builtin_ctz(rb));
        for (std::uint32_t cb = T; cb; cb &= cb - 1) {
          cellMask |= std::uint32_t{1} << (i * n + static_cast<std::size_t>(__builtin_ctz(cb)));
        }
      }
      const auto it = weight.find((std::uint64_t{S} << 32) | T);
      rects.emplace_back(cellMask, it == weight.end() ? 0.0 : it->second);
    }
  }

  // best[used] = max total weight over tilings of the free cells; the first
  // free cell is always covered next, so every partition is counted once.
  const std::uint32_t fullMask = (std::uint32_t{1} << cells) - 1;
  std::vector<double> best(fullMask + 1, -kInfinity);
  std::vector<std::uint64_t> ways(fullMask + 1, 0);
  best[fullMask] = 0.0;
  ways[fullMask] = 1;
  for (std::uint32_t used = fullMask; used-- > 0;) {
    const std::uint32_t freeCells = ~used & fullMask;
    const std::uint32_t first = freeCells & (~freeCells + 1);
    for (const auto& [mask, w] : rects) {
      if (!(mask & first) || (mask & used)) continue;
      const std::uint32_t next = used | mask;
      if (ways[next] == 0) continue;
      best[used] = std::max(best[used], w + best[next]);
      ways[used] += ways[next];
    }
  }
  est.exact = std::max(best[0], 0.0);
  est.partitionsEnumerated = ways[0];
  return est;
}

}  // namespace agreement
