#pragma once

// Deterministic two-party protocols executed as partition refinements.
//
// Every protocol here has the same shape: on her turn the speaker states a
// message that depends only on her own signal and the current block, and each
// block splits along the speaker's side by message value. Running the
// refinement jointly over all signal pairs yields every quantity the parties
// (and Charlie) could compute, including the public stopping time.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agreement/divergence.hpp"
#include "agreement/metrics.hpp"
#include "agreement/partition.hpp"

namespace agreement {

enum class ProtocolKind { Standard, DiscQuad, DiscBregman, Fast };

constexpr std::string_view to_string(ProtocolKind k) {
  switch (k) {
    case ProtocolKind::Standard: return "standard";
    case ProtocolKind::DiscQuad: return "disc-quad";
    case ProtocolKind::DiscBregman: return "disc-bregman";
    case ProtocolKind::Fast: return "fast";
  }
  return "unknown";
}

inline ProtocolKind protocol_kind_from_string(std::string_view name) {
  for (ProtocolKind k : {ProtocolKind::Standard, ProtocolKind::DiscQuad, ProtocolKind::DiscBregman, ProtocolKind::Fast}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::InvalidInput,
              "unknown protocol '" + std::string(name) + "' (expected standard, disc-quad, disc-bregman or fast)");
}

/// Trit message values.
inline constexpr double kLow = -1.0;
inline constexpr double kMedium = 0.0;
inline constexpr double kHigh = 1.0;

/// What the speaker said inside one block. `lines` are the speaker's signal
/// indices in block order; `values` holds the message per line (NaN for a
/// line of zero mass inside the block, which never speaks).
struct BlockMessage {
  std::size_t block = 0;
  Party speaker = Party::Alice;
  std::vector<std::size_t> lines;
  std::vector<double> values;
};

struct Evolution {
  std::vector<ProtocolPartition> states;             // states[t] for t = 0..last
  std::vector<std::vector<BlockMessage>> messages;   // messages[t - 1] are spoken at round t
  /// First round from which the partition never changes again, if reached.
  std::optional<std::size_t> fixedPoint;
  std::size_t infiniteDivergenceMessages = 0;

  std::size_t last() const { return states.size() - 1; }
  /// State at round t; rounds past the fixed point repeat it.
  const ProtocolPartition& state(std::size_t t) const { return states[std::min(t, last())]; }
};

struct TraceRow {
  std::size_t round = 0;
  double agreementQuad = 0.0;
  double agreementJB = 0.0;
  double monovariantDrop = 0.0;
};

struct RoundRecord {
  std::size_t round = 0;
  Party speaker = Party::Alice;
  std::vector<BlockMessage> messages;
  AgreementProfile agreement;
  double monovariantDrop = 0.0;
};

struct Transcript {
  ProtocolKind kind = ProtocolKind::Standard;
  double epsilon = 0.0;
  std::string generatorName;
  Evolution evolution;
  std::vector<RoundRecord> rounds;  // rounds 1..tEnd
  std::vector<TraceRow> trace;      // rounds 0..tEnd
  std::size_t tEnd = 0;
  std::uint64_t bits = 0;
  std::size_t messageAlphabet = 0;  // 0 for real-valued messages
  std::size_t horizon = 0;
  std::string stopReason;

  const ProtocolPartition& final_state() const { return evolution.state(tEnd); }
};

// ---------------------------------------------------------------------------

namespace detail {

struct Classified {
  double key;
  double value;
};

using Classifier = std::function<Classified(double speakerBelief, double blockBelief)>;

struct StepResult {
  ProtocolPartition next;
  std::vector<BlockMessage> messages;
  bool split = false;
};

inline StepResult step(const InformationStructure& s, const ProtocolPartition& current, const Classifier& classify,
                       double groupTolerance) {
  const Party speaker = current.speaker_next();
  const bool alice = speaker == Party::Alice;
  StepResult out;
  std::vector<Rectangle> blocks;
  blocks.reserve(current.blocks().size() * 2);

  for (std::size_t b = 0; b < current.blocks().size(); ++b) {
    const Rectangle& block = current.blocks()[b];
    const RectangleStats st = rectangle_stats(s, block);
    const IndexSet& lines = alice ? block.rows : block.cols;
    const auto& lineMass = alice ? st.rowMass : st.colMass;
    const auto& lineWeighted = alice ? st.rowWeighted : st.colWeighted;

    BlockMessage msg{b, speaker, lines, std::vector<double>(lines.size(), std::nan(""))};
    if (!(st.mass > 0.0)) {
      blocks.push_back(block);
      out.messages.push_back(std::move(msg));
      continue;
    }
    const double c = std::clamp(st.weighted / st.mass, 0.0, 1.0);

    std::vector<std::size_t> speaking, silent;
    std::vector<double> keys(lines.size(), 0.0);
    for (std::size_t k = 0; k < lines.size(); ++k) {
      if (!(lineMass[k] > 0.0)) {
        silent.push_back(k);
        continue;
      }
      const double e = std::clamp(lineWeighted[k] / lineMass[k], 0.0, 1.0);
      const Classified m = classify(e, c);
      keys[k] = m.key;
      msg.values[k] = m.value;
      speaking.push_back(k);
    }
    std::stable_sort(speaking.begin(), speaking.end(), [&](std::size_t x, std::size_t y) { return keys[x] < keys[y]; });

    std::vector<IndexSet> groups;
    double anchor = 0.0;
    for (std::size_t k : speaking) {
      if (groups.empty() || keys[k] - anchor > groupTolerance) {
        groups.emplace_back();
        anchor = keys[k];
      }
      groups.back().push_back(lines[k]);
    }
    for (std::size_t k : silent) groups.front().push_back(lines[k]);
    if (groups.size() > 1) out.split = true;
    for (IndexSet& grp : groups) {
      blocks.push_back(alice ? Rectangle(std::move(grp), block.cols) : Rectangle(block.rows, std::move(grp)));
    }
    out.messages.push_back(std::move(msg));
  }
  out.next = ProtocolPartition(s.rows(), s.cols(), std::move(blocks), current.round() + 1, other(speaker));
  return out;
}

/// Runs the refinement from round 0. Stops after `maxRounds`, at a fixed
/// point (two consecutive rounds without any split), or once `stopAt`
/// accepts a state.
inline Evolution evolve(const InformationStructure& s, const Classifier& classify, double groupTolerance,
                        std::size_t maxRounds,
                        const std::function<bool(const ProtocolPartition&)>& stopAt = {}) {
  Evolution ev;
  ev.states.push_back(ProtocolPartition::initial(s));
  if (stopAt && stopAt(ev.states.back())) return ev;
  std::size_t quiet = 0;
  for (std::size_t t = 1; t <= maxRounds; ++t) {
    StepResult r = step(s, ev.states.back(), classify, groupTolerance);
    ev.messages.push_back(std::move(r.messages));
    ev.states.push_back(std::move(r.next));
    quiet = r.split ? 0 : quiet + 1;
    if (quiet >= 2) {
      ev.fixedPoint = t - 2;
      break;
    }
    if (stopAt && stopAt(ev.states.back())) break;
  }
  return ev;
}

inline double max_disagreement(const InformationStructure& s, const ProtocolPartition& p) {
  const CellBeliefs cb = beliefs(s, p);
  double worst = 0.0;
  for (std::size_t k = 0; k < s.cells(); ++k) {
    if (s.prob_data()[k] == 0.0) continue;
    worst = std::max(worst, std::abs(cb.alice[k] - cb.bob[k]));
  }
  return worst;
}

inline double expected_squared_gap(const InformationStructure& s, const ProtocolPartition& p) {
  const CellBeliefs cb = beliefs(s, p);
  double total = 0.0;
  for (std::size_t k = 0; k < s.cells(); ++k) {
    const double w = s.prob_data()[k];
    if (w == 0.0) continue;
    total += w * (cb.alice[k] - cb.bob[k]) * (cb.alice[k] - cb.bob[k]);
  }
  return total;
}

inline double expected_bregman_gap(const InformationStructure& s, const BregmanGenerator& g,
                                   const ProtocolPartition& p) {
  const CellBeliefs cb = beliefs(s, p);
  double total = 0.0;
  for (std::size_t k = 0; k < s.cells(); ++k) {
    const double w = s.prob_data()[k];
    if (w == 0.0) continue;
    const double d = bregman(g, cb.alice[k], cb.bob[k]);
    if (std::isinf(d)) return kInfinity;
    total += w * d;
  }
  return total;
}

/// Smallest t <= horizon minimizing objective(state(t)). States past the
/// simulated range repeat the last one, so scanning the simulated range is
/// exhaustive.
inline std::size_t argmin_round(const Evolution& ev, std::size_t horizon,
                                const std::function<double(const ProtocolPartition&)>& objective) {
  std::size_t best = 0;
  double bestValue = objective(ev.states[0]);
  const std::size_t limit = std::min(horizon, ev.last());
  for (std::size_t t = 1; t <= limit; ++t) {
    const double v = objective(ev.states[t]);
    if (v < bestValue) {
      bestValue = v;
      best = t;
    }
  }
  return best;
}

inline std::uint64_t bits_for_alphabet(std::size_t messages, std::size_t alphabet) {
  if (messages == 0 || alphabet <= 1) return 0;
  return static_cast<std::uint64_t>(std::ceil(double(messages) * std::log2(double(alphabet)) - 1e-9));
}

inline void fill_records(Transcript& tr, const InformationStructure& s, const BregmanGenerator& g) {
  tr.rounds.clear();
  tr.trace.clear();
  AgreementProfile first = agreement_profile(s, tr.evolution.state(0), g);
  tr.trace.push_back({0, first.quad, first.jb, 0.0});
  for (std::size_t t = 1; t <= tr.tEnd; ++t) {
    const ProtocolPartition& prev = tr.evolution.state(t - 1);
    const ProtocolPartition& cur = tr.evolution.state(t);
    RoundRecord rec;
    rec.round = t;
    rec.speaker = prev.speaker_next();
    if (t - 1 < tr.evolution.messages.size()) rec.messages = tr.evolution.messages[t - 1];
    rec.agreement = agreement_profile(s, cur, g);
    rec.monovariantDrop = monovariant_decrease(s, g, prev, cur);
    tr.trace.push_back({t, rec.agreement.quad, rec.agreement.jb, rec.monovariantDrop});
    tr.rounds.push_back(std::move(rec));
  }
}

inline Classifier trit_quadratic(double epsilon) {
  return [epsilon](double e, double c) -> Classified {
    if (e < c - epsilon / 4.0) return {kLow, kLow};
    if (e > c + epsilon / 4.0) return {kHigh, kHigh};
    return {kMedium, kMedium};
  };
}

inline Classifier trit_bregman(const BregmanGenerator& g, double epsilon, std::size_t* infiniteCount) {
  return [&g, epsilon, infiniteCount](double e, double c) -> Classified {
    const double d = bregman(g, e, c);
    if (d < epsilon / 2.0) return {kMedium, kMedium};
    if (std::isinf(d) && infiniteCount) ++*infiniteCount;
    return e < c ? Classified{kLow, kLow} : Classified{kHigh, kHigh};
  };
}

inline Classifier nearest_multiple(double epsilon) {
  return [epsilon](double e, double) -> Classified {
    const double k = std::floor(e / epsilon + 0.5 + 1e-9);
    return {k, k * epsilon};
  };
}

inline std::uint64_t fast_bits(double epsilon) {
  const auto levels = static_cast<std::uint64_t>(std::floor(1.0 / epsilon + 1e-9)) + 1;
  std::uint64_t width = 0;
  while ((std::uint64_t{1} << width) < levels) ++width;
  return 2 * width;
}

}  // namespace detail

inline std::size_t disc_quadratic_horizon(double epsilon) {
  return static_cast<std::size_t>(std::ceil(1000.0 / epsilon - 1e-9));
}

inline std::size_t disc_bregman_horizon(const BregmanGenerator& g, double epsilon) {
  const double m = g.range();
  return static_cast<std::size_t>(std::ceil(24.0 * m * (4.0 * m + epsilon) / (epsilon * epsilon) - 1e-9));
}

/// Exact expectations each round; stops once every positive-mass cell has
/// |a - b| <= 1e-12, at a fixed point, or after maxRounds.
inline Transcript run_standard(const InformationStructure& s, std::size_t maxRounds,
                               const BregmanGenerator& g = squared_generator()) {
  if (maxRounds < 1) throw Error(ErrorCode::InvalidInput, "maxRounds must be at least 1");
  Transcript tr;
  tr.kind = ProtocolKind::Standard;
  tr.generatorName = g.name();
  tr.horizon = maxRounds;
  const auto agreed = [&s](const ProtocolPartition& p) { return detail::max_disagreement(s, p) <= 1e-12; };
  tr.evolution = detail::evolve(
      s, [](double e, double) { return detail::Classified{e, e}; }, 1e-12, maxRounds, agreed);
  const ProtocolPartition& last = tr.evolution.states.back();
  if (agreed(last)) {
    tr.tEnd = tr.evolution.last();
    tr.stopReason = "agreement";
  } else if (tr.evolution.fixedPoint) {
    tr.tEnd = *tr.evolution.fixedPoint;
    tr.stopReason = "fixed-point";
  } else {
    tr.tEnd = tr.evolution.last();
    tr.stopReason = "max-rounds";
  }
  tr.bits = 64 * static_cast<std::uint64_t>(tr.tEnd);
  detail::fill_records(tr, s, g);
  return tr;
}

inline Transcript run_discretized_quadratic(const InformationStructure& s, double epsilon,
                                            const BregmanGenerator& g = squared_generator()) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw Error(ErrorCode::EpsilonOutOfRange, "disc-quad needs 0 < epsilon < 1");
  }
  Transcript tr;
  tr.kind = ProtocolKind::DiscQuad;
  tr.epsilon = epsilon;
  tr.generatorName = g.name();
  tr.messageAlphabet = 3;
  tr.horizon = disc_quadratic_horizon(epsilon);
  tr.evolution = detail::evolve(s, detail::trit_quadratic(epsilon), 0.0, tr.horizon);
  tr.tEnd = detail::argmin_round(tr.evolution, tr.horizon,
                                 [&s](const ProtocolPartition& p) { return detail::expected_squared_gap(s, p); });
  tr.stopReason = "argmin";
  tr.bits = detail::bits_for_alphabet(tr.tEnd, 3);
  detail::fill_records(tr, s, g);
  return tr;
}

inline Transcript run_discretized_bregman(const InformationStructure& s, const BregmanGenerator& g, double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::EpsilonOutOfRange, "disc-bregman needs a finite epsilon > 0");
  }
  Transcript tr;
  tr.kind = ProtocolKind::DiscBregman;
  tr.epsilon = epsilon;
  tr.generatorName = g.name();
  tr.messageAlphabet = 3;
  tr.horizon = disc_bregman_horizon(g, epsilon);
  std::size_t infinite = 0;
  tr.evolution = detail::evolve(s, detail::trit_bregman(g, epsilon, &infinite), 0.0, tr.horizon);
  tr.evolution.infiniteDivergenceMessages = infinite;
  tr.tEnd = detail::argmin_round(tr.evolution, tr.horizon,
                                 [&](const ProtocolPartition& p) { return detail::expected_bregman_gap(s, g, p); });
  tr.stopReason = "argmin";
  tr.bits = detail::bits_for_alphabet(tr.tEnd, 3);
  detail::fill_records(tr, s, g);
  return tr;
}

/// Two messages: Alice's and then Bob's expectation rounded half-up to the
/// nearest multiple of epsilon.
inline Transcript run_fast_rounding(const InformationStructure& s, double epsilon,
                                    const BregmanGenerator& g = squared_generator()) {
  if (!(epsilon > 0.0 && epsilon <= 0.5)) {
    throw Error(ErrorCode::EpsilonOutOfRange, "fast rounding needs 0 < epsilon <= 0.5");
  }
  Transcript tr;
  tr.kind = ProtocolKind::Fast;
  tr.epsilon = epsilon;
  tr.generatorName = g.name();
  tr.horizon = 2;
  tr.messageAlphabet = static_cast<std::size_t>(std::floor(1.0 / epsilon + 1e-9)) + 1;
  const detail::Classifier round = detail::nearest_multiple(epsilon);
  tr.evolution.states.push_back(ProtocolPartition::initial(s));
  for (int t = 0; t < 2; ++t) {
    detail::StepResult r = detail::step(s, tr.evolution.states.back(), round, 0.0);
    tr.evolution.messages.push_back(std::move(r.messages));
    tr.evolution.states.push_back(std::move(r.next));
  }
  tr.tEnd = 2;
  tr.stopReason = "two-messages";
  tr.bits = detail::fast_bits(epsilon);
  detail::fill_records(tr, s, g);
  return tr;
}

/// Publicly computable stopping round of a discretized protocol.
inline std::size_t compute_t_end(const InformationStructure& s, ProtocolKind kind, const BregmanGenerator* g,
                                 double epsilon) {
  switch (kind) {
    case ProtocolKind::DiscQuad:
      return run_discretized_quadratic(s, epsilon).tEnd;
    case ProtocolKind::DiscBregman:
      if (!g) throw Error(ErrorCode::InvalidInput, "disc-bregman needs a generator");
      return run_discretized_bregman(s, *g, epsilon).tEnd;
    default:
      throw Error(ErrorCode::InvalidInput, "stopping round is only defined for discretized protocols");
  }
}

/// Dispatch by kind. `maxRounds` applies to the standard protocol only.
inline Transcript run_protocol(const InformationStructure& s, ProtocolKind kind, const BregmanGenerator& g,
                               double epsilon, std::size_t maxRounds = 200) {
  switch (kind) {
    case ProtocolKind::Standard: return run_standard(s, maxRounds, g);
    case ProtocolKind::DiscQuad: return run_discretized_quadratic(s, epsilon, g);
    case ProtocolKind::DiscBregman: return run_discretized_bregman(s, g, epsilon);
    case ProtocolKind::Fast: return run_fast_rounding(s, epsilon, g);
  }
  throw Error(ErrorCode::InvalidInput, "unknown protocol kind");
}

/// The message spoken at round t (1-based) by the speaker holding cell (i, j).
inline double message_at(const Evolution& ev, std::size_t t, std::size_t i, std::size_t j) {
  if (t == 0 || t > ev.messages.size()) throw Error(ErrorCode::InvalidInput, "no message at that round");
  const ProtocolPartition& before = ev.states[t - 1];
  const BlockMessage& msg = ev.messages[t - 1][before.block_of(i, j)];
  const std::size_t line = msg.speaker == Party::Alice ? i : j;
  const auto it = std::find(msg.lines.begin(), msg.lines.end(), line);
  return msg.values[static_cast<std::size_t>(it - msg.lines.begin())];
}

}  // namespace agreement
