#pragma once

// Accuracy bounds, the interval partitions behind them, and audits that run
// a protocol and compare measured accuracy with the bound at the measured
// agreement level.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agreement/divergence.hpp"
#include "agreement/metrics.hpp"
#include "agreement/protocol.hpp"
#include "agreement/structure.hpp"
#include "agreement/substitutes.hpp"

namespace agreement {

inline constexpr double kBoundSlack = 1e-9;
inline constexpr double kBetaFloor = 1e-12;

// ---------------------------------------------------------------------------
// Bounds
// ---------------------------------------------------------------------------

/// 10 eps^(1/3) + delta.
inline double bound_quadratic(double epsilon, double delta = 0.0) {
  if (!(epsilon >= 0.0) || !(delta >= 0.0)) {
    throw Error(ErrorCode::DomainError, "bound_quadratic needs epsilon >= 0 and delta >= 0");
  }
  return 10.0 * std::cbrt(epsilon) + delta;
}

/// 1 / (1 - log2 c), the exponent applied to eps / beta.
inline double bregman_exponent(double c) { return 1.0 / (1.0 - std::log2(c)); }

namespace detail {
inline void require_c(double c) {
  if (!(c > 0.0 && c < 1.0)) throw Error(ErrorCode::DomainError, "c must lie in (0, 1)");
}
}  // namespace detail

/// (8 / c^2) beta + 16 G~*(min(1, (eps / beta)^(1 / (1 - log2 c)))).
inline double bregman_bound_at(const EnvelopeTable& table, double c, double epsilon, double beta) {
  detail::require_c(c);
  if (!(beta > 0.0)) throw Error(ErrorCode::DomainError, "beta must be positive");
  const double q = std::min(1.0, std::pow(epsilon / beta, bregman_exponent(c)));
  return 8.0 / (c * c) * beta + 16.0 * table.star(q);
}

/// Symmetric-generator form with G(0) - G(q) in place of G~*(q).
inline double bregman_bound_symmetric(const BregmanGenerator& g, double c, double epsilon, double beta) {
  detail::require_c(c);
  if (!(beta > 0.0)) throw Error(ErrorCode::DomainError, "beta must be positive");
  const double q = std::min(1.0, std::pow(epsilon / beta, bregman_exponent(c)));
  return 8.0 / (c * c) * beta + 16.0 * (g.value(0.0) - g.value(q));
}

struct BregmanBound {
  double value = 0.0;
  double beta = 0.0;
  double c = 0.5;
  double argument = 0.0;  // the point where G~* is evaluated
  bool vacuous = false;
  /// beta = eps^(r / (r + 1 - log2 c)) with r = 1, for generators with bounded G'.
  std::optional<double> corollaryBeta;
  std::optional<double> corollaryValue;
  /// beta = eps^(1/3) (log 1/eps)^(2/3), reported for the entropy generator.
  std::optional<double> entropyBeta;
  std::optional<double> entropyValue;
};

/// Evaluates the Bregman accuracy bound. Without `beta` the bound is
/// minimized over 200 log-spaced values in [1e-8, max(1, JB(0, 1))].
inline BregmanBound bound_bregman(const BregmanGenerator& g, double c, double epsilon,
                                  std::optional<double> beta = std::nullopt) {
  detail::require_c(c);
  if (!(epsilon >= 0.0)) throw Error(ErrorCode::DomainError, "epsilon must be nonnegative");
  const EnvelopeTable table = envelope(g);
  BregmanBound out;
  out.c = c;
  const double ex = bregman_exponent(c);
  if (beta) {
    out.beta = *beta;
    out.value = bregman_bound_at(table, c, epsilon, *beta);
  } else if (epsilon == 0.0) {
    out.beta = kBetaFloor;
    out.value = 0.0;
  } else {
    const double lo = 1e-8, hi = std::max(1.0, jensen_bregman(g, 0.0, 1.0));
    out.value = kInfinity;
    for (int k = 0; k < 200; ++k) {
      const double b = lo * std::pow(hi / lo, k / 199.0);
      const double v = bregman_bound_at(table, c, epsilon, b);
      if (v < out.value) {
        out.value = v;
        out.beta = b;
      }
    }
  }
  out.argument = std::min(1.0, std::pow(epsilon / std::max(out.beta, kBetaFloor), ex));
  out.vacuous = out.value >= g.range();

  if (epsilon > 0.0) {
    const bool boundedSlope = std::isfinite(g.derivative(0.0)) && std::isfinite(g.derivative(1.0));
    if (boundedSlope) {
      const double r = 1.0;
      const double b = std::pow(epsilon, r / (r + 1.0 - std::log2(c)));
      out.corollaryBeta = b;
      out.corollaryValue = bregman_bound_at(table, c, epsilon, b);
    }
    if (g.name() == "kl" && epsilon < 1.0) {
      const double b = std::cbrt(epsilon) * std::pow(std::log(1.0 / epsilon), 2.0 / 3.0);
      out.entropyBeta = b;
      out.entropyValue = bregman_bound_at(table, c, epsilon, b);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Thwart density and interval partitions
// ---------------------------------------------------------------------------

/// (probability, min belief, max belief) per positive-mass signal pair, with
/// the initial beliefs mu_sigma and mu_tau.
struct BeliefPair {
  double p;
  double lo;
  double hi;
};

inline std::vector<BeliefPair> belief_pairs(const InformationStructure& s) {
  const MarginalBeliefs mb = marginal_beliefs(s);
  std::vector<BeliefPair> out;
  for (std::size_t i = 0; i < s.rows(); ++i) {
    for (std::size_t j = 0; j < s.cols(); ++j) {
      const double p = s.prob(i, j);
      if (p == 0.0) continue;
      out.push_back({p, std::min(mb.alice[i], mb.bob[j]), std::max(mb.alice[i], mb.bob[j])});
    }
  }
  return out;
}

namespace detail {
inline double thwart(const std::vector<BeliefPair>& pairs, double x, bool inclusive) {
  double total = 0.0;
  for (const BeliefPair& bp : pairs) {
    if (bp.lo <= x && x <= bp.hi && (inclusive || bp.lo != bp.hi)) total += bp.p;
  }
  return total;
}

/// Points at which a piecewise-constant density on [lo, hi] takes every
/// value: the ends and the midpoints between consecutive distinct beliefs.
inline std::vector<double> thwart_candidates(const std::vector<BeliefPair>& pairs, double lo, double hi) {
  std::vector<double> marks{lo, hi};
  for (const BeliefPair& bp : pairs) {
    for (double v : {bp.lo, bp.hi}) {
      if (v > lo && v < hi) marks.push_back(v);
    }
  }
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
  std::vector<double> out;
  for (std::size_t k = 0; k < marks.size(); ++k) {
    out.push_back(marks[k]);
    if (k + 1 < marks.size()) out.push_back(0.5 * (marks[k] + marks[k + 1]));
  }
  return out;
}
}  // namespace detail

/// Probability that the initial beliefs straddle x. The strict version
/// requires the two beliefs to differ; the inclusive one does not.
inline double thwart_density(const InformationStructure& s, double x, bool inclusive) {
  return detail::thwart(belief_pairs(s), x, inclusive);
}

enum class PartitionConstruction { Claim33, Algorithm1 };

struct IntervalPartition {
  /// Interior boundaries x_1 <= ... <= x_{N-1}; intervals are [x_{k-1}, x_k)
  /// with the last one closed at 1.
  std::vector<double> boundaries;
  /// Equal windows: admissible window per boundary. Beta-scaled: coarse intervals.
  std::vector<std::pair<double, double>> windows;
  /// Algorithm1: minimum strict thwart density per coarse interval.
  std::vector<double> alphas;
  PartitionConstruction construction = PartitionConstruction::Claim33;
  bool trivial = false;

  std::size_t intervals() const { return boundaries.size() + 1; }
  /// 0-based interval holding v.
  std::size_t index_of(double v) const {
    return static_cast<std::size_t>(std::upper_bound(boundaries.begin(), boundaries.end(), v) - boundaries.begin());
  }
  std::vector<double> edges() const {
    std::vector<double> e{0.0};
    e.insert(e.end(), boundaries.begin(), boundaries.end());
    e.push_back(1.0);
    return e;
  }
};

/// N intervals whose i-th boundary minimizes the inclusive thwart density over
/// [i/N - 1/(2N), i/N + 1/(2N)]; ties go to the point nearest i/N.
inline IntervalPartition partition_claim33(const InformationStructure& s, std::size_t N) {
  if (N < 2) throw Error(ErrorCode::DomainError, "partition needs N >= 2");
  const std::vector<BeliefPair> pairs = belief_pairs(s);
  IntervalPartition out;
  out.construction = PartitionConstruction::Claim33;
  const double n = static_cast<double>(N);
  for (std::size_t i = 1; i < N; ++i) {
    const double centre = i / n;
    const double lo = centre - 0.5 / n, hi = centre + 0.5 / n;
    double best = 0.0, bestRho = kInfinity;
    for (double x : detail::thwart_candidates(pairs, lo, hi)) {
      const double rho = detail::thwart(pairs, x, true);
      if (rho < bestRho || (rho == bestRho && std::abs(x - centre) < std::abs(best - centre))) {
        bestRho = rho;
        best = x;
      }
    }
    out.boundaries.push_back(best);
    out.windows.emplace_back(lo, hi);
  }
  return out;
}

/// P[k(sigma) != k(tau)] for the intervals of `part`, using initial beliefs.
inline double mismatch_probability(const InformationStructure& s, const IntervalPartition& part) {
  const MarginalBeliefs mb = marginal_beliefs(s);
  double total = 0.0;
  for (std::size_t i = 0; i < s.rows(); ++i) {
    for (std::size_t j = 0; j < s.cols(); ++j) {
      const double p = s.prob(i, j);
      if (p > 0.0 && part.index_of(mb.alice[i]) != part.index_of(mb.bob[j])) total += p;
    }
  }
  return total;
}

namespace detail {
/// Smallest y in [lo, hi] with f(y) >= 0 for increasing f, to 1e-12.
template <class F>
double bisect(F&& f, double lo, double hi) {
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) >= 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}
}  // namespace detail

/// Coarse intervals with JB between beta and 2 beta / c, then one boundary
/// per coarse interval at the minimum of the strict thwart density.
inline IntervalPartition partition_algorithm1(const InformationStructure& s, const BregmanGenerator& g, double beta,
                                              double c) {
  detail::require_c(c);
  if (!(beta > 0.0)) throw Error(ErrorCode::DomainError, "beta must be positive");
  IntervalPartition out;
  out.construction = PartitionConstruction::Algorithm1;
  const double target = 2.0 * beta / c;
  if (jensen_bregman(g, 0.0, 1.0) <= target) {
    out.trivial = true;
    out.windows.emplace_back(0.0, 1.0);
    return out;
  }

  std::vector<double> coarse{0.0};
  while (true) {
    const double x = coarse.back();
    const double y = detail::bisect([&](double v) { return jensen_bregman(g, x, v) - target; }, x, 1.0);
    if (jensen_bregman(g, y, 1.0) < target) {
      const double z = detail::bisect(
          [&](double v) { return jensen_bregman(g, x, v) - jensen_bregman(g, v, 1.0); }, x, 1.0);
      coarse.push_back(z);
      break;
    }
    coarse.push_back(y);
  }
  coarse.push_back(1.0);

  const std::vector<BeliefPair> pairs = belief_pairs(s);
  for (std::size_t k = 1; k < coarse.size(); ++k) {
    const double lo = coarse[k - 1], hi = coarse[k];
    out.windows.emplace_back(lo, hi);
    double best = 0.5 * (lo + hi), bestRho = kInfinity;
    for (double x : detail::thwart_candidates(pairs, lo, hi)) {
      if (x <= 0.0 || x >= 1.0) continue;
      const double rho = detail::thwart(pairs, x, false);
      if (rho < bestRho) {
        bestRho = rho;
        best = x;
      }
    }
    out.alphas.push_back(bestRho);
    out.boundaries.push_back(best);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lemma-level checks on a single structure (no protocol involved)
// ---------------------------------------------------------------------------

struct LemmaCheck {
  double epsilon = 0.0;  // agreement of the initial beliefs
  double lhs = 0.0;      // Bob's initial error
  double rhs = 0.0;      // the bound
  bool holds = true;
};

/// E[(mu_{sigma tau} - mu_tau)^2] <= 6 eps^(1/3), eps = E[(mu_sigma - mu_tau)^2].
inline LemmaCheck lemma_quadratic(const InformationStructure& s) {
  const MarginalBeliefs mb = marginal_beliefs(s);
  LemmaCheck out;
  for (std::size_t i = 0; i < s.rows(); ++i) {
    for (std::size_t j = 0; j < s.cols(); ++j) {
      const double p = s.prob(i, j);
      if (p == 0.0) continue;
      out.epsilon += p * (mb.alice[i] - mb.bob[j]) * (mb.alice[i] - mb.bob[j]);
      out.lhs += p * (s.mean(i, j) - mb.bob[j]) * (s.mean(i, j) - mb.bob[j]);
    }
  }
  out.rhs = 6.0 * std::cbrt(out.epsilon);
  out.holds = out.lhs <= out.rhs + kBoundSlack;
  return out;
}

/// E[D(mu_{sigma tau} || mu_tau)] against the Bregman bound at
/// eps = E[JB(mu_sigma, mu_tau)] and the given beta.
inline LemmaCheck lemma_bregman(const InformationStructure& s, const BregmanGenerator& g, const EnvelopeTable& table,
                                double c, double beta) {
  const MarginalBeliefs mb = marginal_beliefs(s);
  LemmaCheck out;
  for (std::size_t i = 0; i < s.rows(); ++i) {
    for (std::size_t j = 0; j < s.cols(); ++j) {
      const double p = s.prob(i, j);
      if (p == 0.0) continue;
      out.epsilon += p * jensen_bregman(g, mb.alice[i], mb.bob[j]);
      out.lhs += p * bregman(g, s.mean(i, j), mb.bob[j]);
    }
  }
  out.rhs = bregman_bound_at(table, c, out.epsilon, beta);
  out.holds = out.lhs <= out.rhs + kBoundSlack;
  return out;
}

struct Algorithm1Check {
  IntervalPartition partition;
  double epsilon = 0.0;        // E[JB(mu_sigma, mu_tau)]
  double coarseMinJB = 0.0;
  double coarseMaxJB = 0.0;
  double fineMaxJB = 0.0;
  double alphaSum = 0.0;       // 2 * sum of alpha_k
  double alphaBound = 0.0;     // 4 (eps / (beta c))^(1 / (1 - log2 c))
  double mismatch = 0.0;       // Q = P[k(sigma) != k(tau)]
  double firstSummand = 0.0;   // E[D(mu_sigma || mu_{S^(k(sigma))})]
  double firstBound = 0.0;     // 8 beta / c^2
  double secondSummand = 0.0;  // E[D(mu_{S^(k(sigma)) tau} || mu_tau)]
  double secondBound = 0.0;    // 2 G~*(Q)
  bool coarseOk = true;
  bool fineOk = true;
  bool alphaOk = true;
  bool firstOk = true;
  bool secondOk = true;

  bool all() const { return coarseOk && fineOk && alphaOk && firstOk && secondOk; }
};

/// Builds the beta-scaled partition and checks each inequality of the
/// accuracy proof on it. Coarse-interval checks allow a relative slack of
/// 1e-9 for the bisection.
inline Algorithm1Check check_algorithm1(const InformationStructure& s, const BregmanGenerator& g,
                                        const EnvelopeTable& table, double beta, double c) {
  Algorithm1Check out;
  out.partition = partition_algorithm1(s, g, beta, c);
  const IntervalPartition& part = out.partition;
  const MarginalBeliefs mb = marginal_beliefs(s);
  const double upper = 2.0 * beta / c;
  const double slack = 1e-9 * std::max(1.0, upper);

  if (!part.trivial) {
    out.coarseMinJB = kInfinity;
    for (const auto& [lo, hi] : part.windows) {
      const double jb = jensen_bregman(g, lo, hi);
      out.coarseMinJB = std::min(out.coarseMinJB, jb);
      out.coarseMaxJB = std::max(out.coarseMaxJB, jb);
    }
    out.coarseOk = out.coarseMinJB >= beta - slack && out.coarseMaxJB <= upper + slack;
  }
  const std::vector<double> e = part.edges();
  for (std::size_t k = 1; k < e.size(); ++k) out.fineMaxJB = std::max(out.fineMaxJB, jensen_bregman(g, e[k - 1], e[k]));
  out.fineOk = part.trivial || out.fineMaxJB <= 4.0 * beta / (c * c) + slack;

  for (std::size_t i = 0; i < s.rows(); ++i) {
    for (std::size_t j = 0; j < s.cols(); ++j) {
      const double p = s.prob(i, j);
      if (p > 0.0) out.epsilon += p * jensen_bregman(g, mb.alice[i], mb.bob[j]);
    }
  }
  for (double a : part.alphas) out.alphaSum += 2.0 * a;
  out.alphaBound = 4.0 * std::pow(out.epsilon / (beta * c), bregman_exponent(c));
  out.alphaOk = part.trivial || out.alphaSum <= out.alphaBound + kBoundSlack;

  // Alice's rows grouped by the interval of their initial belief.
  const std::size_t K = part.intervals();
  std::vector<std::size_t> group(s.rows());
  std::vector<double> gMass(K, 0.0), gW(K, 0.0);
  std::vector<double> gColMass(K * s.cols(), 0.0), gColW(K * s.cols(), 0.0);
  for (std::size_t i = 0; i < s.rows(); ++i) {
    group[i] = part.index_of(mb.alice[i]);
    for (std::size_t j = 0; j < s.cols(); ++j) {
      const double p = s.prob(i, j);
      gMass[group[i]] += p;
      gW[group[i]] += p * s.mean(i, j);
      gColMass[group[i] * s.cols() + j] += p;
      gColW[group[i] * s.cols() + j] += p * s.mean(i, j);
    }
  }
  for (std::size_t i = 0; i < s.rows(); ++i) {
    for (std::size_t j = 0; j < s.cols(); ++j) {
      const double p = s.prob(i, j);
      if (p == 0.0) continue;
      const std::size_t k = group[i];
      const double groupBelief = std::clamp(gW[k] / gMass[k], 0.0, 1.0);
      const double cellGroup = std::clamp(gColW[k * s.cols() + j] / gColMass[k * s.cols() + j], 0.0, 1.0);
      out.firstSummand += p * bregman(g, mb.alice[i], groupBelief);
      out.secondSummand += p * bregman(g, cellGroup, mb.bob[j]);
      if (part.index_of(mb.alice[i]) != part.index_of(mb.bob[j])) out.mismatch += p;
    }
  }
  out.firstBound = 8.0 * beta / (c * c);
  out.firstOk = out.firstSummand <= out.firstBound + kBoundSlack;
  out.secondBound = 2.0 * table.star(std::min(1.0, out.mismatch));
  out.secondOk = out.secondSummand <= out.secondBound + kBoundSlack;
  return out;
}

struct Claim33Check {
  IntervalPartition partition;
  std::size_t N = 0;
  double epsilon = 0.0;  // E[(mu_sigma - mu_tau)^2]
  double mismatch = 0.0;
  double bound = 0.0;    // sqrt(eps) N
  double maxLength = 0.0;
  bool holds = true;
};

/// Equal-window partition with N = max(2, ceil(eps^(-1/6))) unless N is given.
inline Claim33Check check_claim33(const InformationStructure& s, std::optional<std::size_t> N = std::nullopt) {
  Claim33Check out;
  const MarginalBeliefs mb = marginal_beliefs(s);
  for (std::size_t i = 0; i < s.rows(); ++i) {
    for (std::size_t j = 0; j < s.cols(); ++j) {
      const double p = s.prob(i, j);
      if (p > 0.0) out.epsilon += p * (mb.alice[i] - mb.bob[j]) * (mb.alice[i] - mb.bob[j]);
    }
  }
  if (N) {
    out.N = *N;
  } else {
    const double raw = out.epsilon > 0.0 ? std::ceil(std::pow(out.epsilon, -1.0 / 6.0)) : 2.0;
    out.N = static_cast<std::size_t>(std::clamp(raw, 2.0, 1e6));
  }
  out.partition = partition_claim33(s, out.N);
  out.mismatch = mismatch_probability(s, out.partition);
  out.bound = std::sqrt(out.epsilon) * double(out.N);
  const std::vector<double> e = out.partition.edges();
  for (std::size_t k = 1; k < e.size(); ++k) out.maxLength = std::max(out.maxLength, e[k] - e[k - 1]);
  out.holds = out.mismatch <= out.bound + 1e-12 && out.maxLength <= 2.0 / double(out.N) + 1e-12;
  return out;
}

// ---------------------------------------------------------------------------
// Audits
// ---------------------------------------------------------------------------

struct AuditOptions {
  std::size_t maxRounds = 200;
  double c = 0.5;
  std::optional<double> beta;
  bool withDelta = true;
  std::size_t exactLimit = 9;
  CheckOptions check;
};

/// Measured agreement and accuracy next to the matching bound.
struct BoundReport {
  std::string label;
  std::string protocol;
  std::string generator;
  double epsilonTarget = 0.0;
  double epsilonMeasured = 0.0;
  double accuracyAlice = 0.0;
  double accuracyBob = 0.0;
  double accuracyMeasured = 0.0;  // max of the two
  double boundValue = 0.0;
  bool satisfied = false;
  bool vacuous = false;
  /// True when the structure satisfies rectangle substitutes for the generator.
  bool applicable = false;
  std::string boundKind;
  std::map<std::string, double> parameters;
  double deltaLowerBound = 0.0;
  std::optional<double> deltaExact;
  std::uint64_t bits = 0;
  std::size_t tEnd = 0;
  /// max over rounds t < t' of quad(t') - 10 quad(t)^(1/3); <= 1e-9 passes.
  double continuedAgreementWorst = -kInfinity;
  bool continuedAgreementHolds = true;
  bool orderingsHold = true;
  AgreementProfile finalAgreement;
  AccuracyProfile finalAccuracy;
};

/// Worst excess of quad(t') over 10 quad(t)^(1/3) across all t < t' in the
/// simulated evolution.
inline double continued_agreement_excess(const InformationStructure& s, const Evolution& ev) {
  std::vector<double> quad;
  const BregmanGenerator sq = squared_generator();
  quad.reserve(ev.states.size());
  for (const ProtocolPartition& p : ev.states) quad.push_back(0.25 * detail::expected_squared_gap(s, p));
  double worst = -kInfinity;
  double tightest = kInfinity;  // min over earlier t of 10 quad(t)^(1/3)
  for (std::size_t t = 0; t < quad.size(); ++t) {
    if (t > 0) worst = std::max(worst, quad[t] - tightest);
    tightest = std::min(tightest, 10.0 * std::cbrt(quad[t]));
  }
  return worst;
}

inline BoundReport audit_transcript(const InformationStructure& s, const BregmanGenerator& g, const Transcript& tr,
                                    const AuditOptions& options = {}) {
  BoundReport rep;
  rep.label = s.label();
  rep.protocol = std::string(to_string(tr.kind));
  rep.generator = g.name();
  rep.epsilonTarget = tr.epsilon;
  rep.bits = tr.bits;
  rep.tEnd = tr.tEnd;

  const ProtocolPartition& fin = tr.final_state();
  rep.finalAgreement = agreement_profile(s, fin, g);
  rep.finalAccuracy = accuracy_profile(s, fin, g);
  for (std::size_t t = 0; t <= tr.tEnd; ++t) {
    const ProtocolPartition& p = tr.evolution.state(t);
    if (!metric_orderings_hold(agreement_profile(s, p, g), accuracy_profile(s, p, g))) rep.orderingsHold = false;
  }

  bool enumerable = s.rows() <= options.check.maxSide && s.cols() <= options.check.maxSide;
  rep.applicable = enumerable && rectangle_check(s, g, SubstitutesMode::Rectangle, options.check).holds;
  double delta = 0.0;
  if (options.withDelta && enumerable) {
    const DeltaEstimate d = delta_estimate(s, g, options.exactLimit, options.check.maxSide);
    rep.deltaLowerBound = d.lowerBound;
    rep.deltaExact = d.exact;
    if (!rep.applicable && d.exact) delta = *d.exact;
  }

  const bool quadratic = g.name() == "squared";
  if (quadratic) {
    rep.epsilonMeasured = rep.finalAgreement.quad;
    rep.accuracyAlice = rep.finalAccuracy.aliceQuad;
    rep.accuracyBob = rep.finalAccuracy.bobQuad;
    rep.boundValue = bound_quadratic(rep.epsilonMeasured, delta);
    rep.boundKind = delta > 0.0 ? "quadratic+delta" : "quadratic";
    rep.parameters["delta"] = delta;
    rep.vacuous = rep.boundValue >= 1.0;
  } else {
    rep.epsilonMeasured = rep.finalAgreement.jb;
    rep.accuracyAlice = rep.finalAccuracy.aliceBregman;
    rep.accuracyBob = rep.finalAccuracy.bobBregman;
    const BregmanBound b = bound_bregman(g, options.c, rep.epsilonMeasured, options.beta);
    rep.boundValue = b.value;
    rep.boundKind = "bregman";
    rep.parameters["beta"] = b.beta;
    rep.parameters["c"] = b.c;
    rep.vacuous = b.vacuous;
  }
  rep.accuracyMeasured = std::max(rep.accuracyAlice, rep.accuracyBob);
  rep.satisfied = rep.accuracyMeasured <= rep.boundValue + kBoundSlack;

  rep.continuedAgreementWorst = continued_agreement_excess(s, tr.evolution);
  rep.continuedAgreementHolds = rep.continuedAgreementWorst <= kBoundSlack;
  return rep;
}

/// Runs the protocol and audits its final state.
inline BoundReport audit_agreement_accuracy(const InformationStructure& s, const BregmanGenerator& g,
                                            ProtocolKind kind, double epsilon, const AuditOptions& options = {}) {
  const Transcript tr = run_protocol(s, kind, g, epsilon, options.maxRounds);
  return audit_transcript(s, g, tr, options);
}

// ---------------------------------------------------------------------------
// Boolean functions
// ---------------------------------------------------------------------------

struct BooleanResult {
  double errorProbability = 0.0;
  std::uint64_t bits = 0;
  double epsilon = 0.0;
};

/// Runs the rounding protocol with eps = sqrt(delta / 8) and outputs Bob's
/// message rounded to {0, 1} (0.5 goes to 1).
inline BooleanResult compute_boolean(const InformationStructure& s, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::DomainError, "delta must lie in (0, 1)");
  for (std::size_t k = 0; k < s.cells(); ++k) {
    if (s.prob_data()[k] == 0.0) continue;
    const double y = s.mean_data()[k];
    if (y != 0.0 && y != 1.0) throw Error(ErrorCode::NotBoolean, "positive-mass mean entries must be 0 or 1");
  }
  BooleanResult out;
  out.epsilon = std::sqrt(delta / 8.0);
  const Transcript tr = run_fast_rounding(s, out.epsilon);
  out.bits = tr.bits;
  for (std::size_t i = 0; i < s.rows(); ++i) {
    for (std::size_t j = 0; j < s.cols(); ++j) {
      const double p = s.prob(i, j);
      if (p == 0.0) continue;
      const double said = message_at(tr.evolution, 2, i, j);
      const double output = said >= 0.5 - 1e-12 ? 1.0 : 0.0;
      if (output != s.mean(i, j)) out.errorProbability += p;
    }
  }
  return out;
}

}  // namespace agreement
