#pragma once

// Agreement and accuracy measures of a protocol state.

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "agreement/divergence.hpp"
#include "agreement/partition.hpp"

namespace agreement {

using CellIndex = std::pair<std::size_t, std::size_t>;

/// a = Alice's belief, b = Bob's, c = Charlie's, all per cell.
struct AgreementProfile {
  double quad = 0.0;          // E[(a - b)^2] / 4
  double jb = 0.0;            // E[JB(a, b)]
  double withCharlie = 0.0;   // E[D(a||c) + D(b||c)] / 2
  double symmetrized = 0.0;   // E[D(a||b) + D(b||a)] / 2
  std::vector<CellIndex> infiniteCells;
};

struct AccuracyProfile {
  double aliceQuad = 0.0;     // E[(mu - a)^2]
  double bobQuad = 0.0;
  double aliceBregman = 0.0;  // E[D(mu||a)]
  double bobBregman = 0.0;
  double midpoint = 0.0;      // E[D(mu||(a+b)/2)]
  std::vector<CellIndex> infiniteCells;
};

namespace detail {
// p * v, keeping 0 * inf out of the sum and flagging the cell.
inline void accumulate(double& total, double p, double v, bool& infinite) {
  if (std::isinf(v)) {
    infinite = true;
    total = kInfinity;
  } else if (!std::isinf(total)) {
    total += p * v;
  }
}
}  // namespace detail

inline AgreementProfile agreement_profile(const InformationStructure& s, const ProtocolPartition& partition,
                                          const BregmanGenerator& g) {
  const CellBeliefs cb = beliefs(s, partition);
  AgreementProfile out;
  for (std::size_t i = 0; i < s.rows(); ++i) {
    for (std::size_t j = 0; j < s.cols(); ++j) {
      const double p = s.prob(i, j);
      if (p == 0.0) continue;
      const std::size_t k = i * s.cols() + j;
      const double a = cb.alice[k], b = cb.bob[k], c = cb.charlie[k];
      out.quad += p * 0.25 * (a - b) * (a - b);
      out.jb += p * jensen_bregman(g, a, b);
      bool inf = false;
      detail::accumulate(out.withCharlie, p, 0.5 * (bregman(g, a, c) + bregman(g, b, c)), inf);
      detail::accumulate(out.symmetrized, p, 0.5 * (bregman(g, a, b) + bregman(g, b, a)), inf);
      if (inf) out.infiniteCells.emplace_back(i, j);
    }
  }
  return out;
}

inline AccuracyProfile accuracy_profile(const InformationStructure& s, const ProtocolPartition& partition,
                                        const BregmanGenerator& g) {
  const CellBeliefs cb = beliefs(s, partition);
  AccuracyProfile out;
  for (std::size_t i = 0; i < s.rows(); ++i) {
    for (std::size_t j = 0; j < s.cols(); ++j) {
      const double p = s.prob(i, j);
      if (p == 0.0) continue;
      const std::size_t k = i * s.cols() + j;
      const double y = s.mean(i, j), a = cb.alice[k], b = cb.bob[k];
      out.aliceQuad += p * (y - a) * (y - a);
      out.bobQuad += p * (y - b) * (y - b);
      bool inf = false;
      detail::accumulate(out.aliceBregman, p, bregman(g, y, a), inf);
      detail::accumulate(out.bobBregman, p, bregman(g, y, b), inf);
      detail::accumulate(out.midpoint, p, bregman(g, y, 0.5 * (a + b)), inf);
      if (inf) out.infiniteCells.emplace_back(i, j);
    }
  }
  return out;
}

/// Decrease of Charlie's expected error between two nested partitions:
/// E[D(mu_to || mu_from)], where mu_* is Charlie's belief under each.
inline double monovariant_decrease(const InformationStructure& s, const BregmanGenerator& g,
                                   const ProtocolPartition& from, const ProtocolPartition& to) {
  if (!refines(to, from)) throw Error(ErrorCode::NotARefinement, "target partition does not refine the source");
  const CellBeliefs before = beliefs(s, from);
  const CellBeliefs after = beliefs(s, to);
  double total = 0.0;
  for (std::size_t k = 0; k < s.cells(); ++k) {
    const double p = s.prob_data()[k];
    if (p == 0.0) continue;
    total += p * bregman(g, after.charlie[k], before.charlie[k]);
  }
  return total;
}

/// Charlie's expected error E[D(Y || c)] minus the unknown constant E[G(Y)].
/// Differences of this quantity between rounds are exact.
inline double charlie_error_excess(const InformationStructure& s, const BregmanGenerator& g,
                                   const ProtocolPartition& partition) {
  const CellBeliefs cb = beliefs(s, partition);
  double total = 0.0;
  for (std::size_t k = 0; k < s.cells(); ++k) {
    const double p = s.prob_data()[k];
    if (p == 0.0) continue;
    const double c = cb.charlie[k];
    const double slope = g.derivative(c);
    const double tilt = s.mean_data()[k] - c;
    total += p * (-g.value(c) - (tilt == 0.0 ? 0.0 : tilt * slope));
  }
  return total;
}

/// The orderings every state must satisfy: jb <= withCharlie, jb <= symmetrized
/// and midpoint <= aliceBregman + bobBregman, each up to `slack`.
inline bool metric_orderings_hold(const AgreementProfile& ag, const AccuracyProfile& ac, double slack = 1e-12) {
  return ag.jb <= ag.withCharlie + slack && ag.jb <= ag.symmetrized + slack &&
         ac.midpoint <= ac.aliceBregman + ac.bobBregman + slack;
}

}  // namespace agreement
