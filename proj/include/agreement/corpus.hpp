#pragma once

// Canonical structures, seeded random structures and certified
// rectangle-substitutes corpora.
//
// Randomness comes from std::mt19937_64; a uniform double is
// (next() >> 11) * 2^-53. The identifier "mt19937_64" is written into every
// generated label together with the seed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "agreement/divergence.hpp"
#include "agreement/structure.hpp"
#include "agreement/substitutes.hpp"

namespace agreement {

inline constexpr const char* kPrngName = "mt19937_64";

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * double(n)) % n; }

 private:
  std::mt19937_64 engine_;
};

enum class CorpusKind { Xor, AppendixA, Identical, Random, Substitutes, BooleanSubstitutes, Perturbed, Correlated };

constexpr std::string_view to_string(CorpusKind k) {
  switch (k) {
    case CorpusKind::Xor: return "xor";
    case CorpusKind::AppendixA: return "appendix-a";
    case CorpusKind::Identical: return "identical";
    case CorpusKind::Random: return "random";
    case CorpusKind::Substitutes: return "substitutes";
    case CorpusKind::BooleanSubstitutes: return "boolean-substitutes";
    case CorpusKind::Perturbed: return "perturbed";
    case CorpusKind::Correlated: return "correlated";
  }
  return "unknown";
}

inline CorpusKind corpus_kind_from_string(std::string_view name) {
  for (CorpusKind k : {CorpusKind::Xor, CorpusKind::AppendixA, CorpusKind::Identical, CorpusKind::Random,
                       CorpusKind::Substitutes, CorpusKind::BooleanSubstitutes, CorpusKind::Perturbed,
                       CorpusKind::Correlated}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::InvalidInput, "unknown structure kind '" + std::string(name) + "'");
}

struct GeneratorSpec {
  CorpusKind kind = CorpusKind::Random;
  std::size_t rows = 4;
  std::size_t cols = 4;
  std::uint64_t seed = 0;
  /// Substitutes synthesis: fixed blend weight instead of the searched one.
  std::optional<double> mixWeight;
  std::string generator = "squared";
};

namespace detail {
inline RawStructure zero_raw(std::size_t rows, std::size_t cols, std::string label) {
  return {rows, cols, std::vector<std::vector<double>>(rows, std::vector<double>(cols, 0.0)),
          std::vector<std::vector<double>>(rows, std::vector<double>(cols, 0.0)), std::move(label)};
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Canonical instances
// ---------------------------------------------------------------------------

/// Two uniform bits, Y = their XOR.
inline InformationStructure make_xor() {
  RawStructure raw{2, 2, {{0.25, 0.25}, {0.25, 0.25}}, {{0.0, 1.0}, {1.0, 0.0}}, "xor"};
  return validate_structure(raw);
}

/// Shared fair coin plus one private bit each; signal index = 2 * coin + bit
/// (coin 0 = heads). Heads: bits equal with probability 0.9; tails: bits
/// differ with probability 0.9. Y is the XOR of the two bits.
inline InformationStructure make_appendix_a() {
  RawStructure raw = detail::zero_raw(4, 4, "appendix-a");
  for (std::size_t coin = 0; coin < 2; ++coin) {
    for (std::size_t a = 0; a < 2; ++a) {
      for (std::size_t b = 0; b < 2; ++b) {
        const bool equal = a == b;
        const double p = (equal == (coin == 0)) ? 0.225 : 0.025;
        raw.prob[2 * coin + a][2 * coin + b] = p;
        raw.mean[2 * coin + a][2 * coin + b] = static_cast<double>(a ^ b);
      }
    }
  }
  return validate_structure(raw);
}

/// Both experts see the same signal X with distribution `dist`; Y = values[X].
inline InformationStructure make_identical(const std::vector<double>& dist, const std::vector<double>& values,
                                           std::string label = "identical") {
  if (dist.size() != values.size() || dist.empty()) {
    throw Error(ErrorCode::DimensionMismatch, "dist and values must have the same nonzero length");
  }
  const std::size_t n = dist.size();
  RawStructure raw = detail::zero_raw(n, n, std::move(label));
  for (std::size_t i = 0; i < n; ++i) {
    raw.prob[i][i] = dist[i];
    raw.mean[i][i] = values[i];
  }
  return validate_structure(raw);
}

inline std::string corpus_label(std::string_view kind, std::size_t rows, std::size_t cols, std::uint64_t seed) {
  return std::string(kind) + "-" + std::to_string(rows) + "x" + std::to_string(cols) + "-" + kPrngName + "-seed" +
         std::to_string(seed);
}

/// Probabilities uniform in [0, 1) then normalized; means uniform in [0, 1).
inline InformationStructure random_structure(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  if (rows == 0 || cols == 0) throw Error(ErrorCode::DimensionMismatch, "rows and cols must be at least 1");
  Rng rng(seed);
  RawStructure raw = detail::zero_raw(rows, cols, corpus_label("random", rows, cols, seed));
  double total = 0.0;
  for (auto& row : raw.prob) {
    for (double& p : row) total += (p = rng.uniform() + 1e-3);
  }
  for (auto& row : raw.prob) {
    for (double& p : row) p /= total;
  }
  for (auto& row : raw.mean) {
    for (double& y : row) y = rng.uniform();
  }
  return validate_structure(raw);
}

/// Clamps every mean into [lo, 1 - lo]; keeps KL divergences finite.
inline InformationStructure clamp_means(const InformationStructure& s, double lo = 1e-6) {
  RawStructure raw = s.raw();
  for (auto& row : raw.mean) {
    for (double& y : row) y = std::clamp(y, lo, 1.0 - lo);
  }
  return validate_structure(raw);
}

// ---------------------------------------------------------------------------
// Certified synthesis
// ---------------------------------------------------------------------------

namespace detail {

/// (1 - w) * base + w * target, on both matrices.
inline InformationStructure blend(const InformationStructure& base, const RawStructure& target, double w,
                                  const std::string& label) {
  RawStructure raw = base.raw();
  for (std::size_t i = 0; i < raw.rows; ++i) {
    for (std::size_t j = 0; j < raw.cols; ++j) {
      raw.prob[i][j] = (1.0 - w) * raw.prob[i][j] + w * target.prob[i][j];
      raw.mean[i][j] = (1.0 - w) * raw.mean[i][j] + w * target.mean[i][j];
    }
  }
  raw.label = label;
  return validate_structure(raw);
}

/// Row i puts its mass on column floor(i * cols / rows); every mean in column
/// j equals v_j, so Bob's signal alone determines Y.
inline RawStructure diagonal_target(std::size_t rows, std::size_t cols, Rng& rng) {
  RawStructure t = zero_raw(rows, cols, "");
  std::vector<double> v(cols);
  for (double& x : v) x = rng.uniform();
  for (std::size_t i = 0; i < rows; ++i) {
    t.prob[i][(i * cols) / rows] = 1.0 / double(rows);
    for (std::size_t j = 0; j < cols; ++j) t.mean[i][j] = v[j];
  }
  return t;
}

inline bool certified(const InformationStructure& s, const BregmanGenerator& g) {
  CheckOptions opt;
  opt.maxSide = 8;
  return rectangle_check(s, g, SubstitutesMode::Rectangle, opt).holds;
}

}  // namespace detail

struct SynthesisResult {
  InformationStructure structure;
  double mixWeight = 0.0;
  std::size_t searchSteps = 0;
};

/// Blends a random structure toward `detail::diagonal_target` and
/// bisects for the smallest weight that passes rectangle_check for g. The
/// returned structure is re-checked before it is handed back.
inline SynthesisResult synthesize_substitutes(std::size_t rows, std::size_t cols, std::uint64_t seed,
                                              const BregmanGenerator& g,
                                              std::optional<double> fixedWeight = std::nullopt) {
  if (rows == 0 || cols == 0 || rows > 8 || cols > 8) {
    throw Error(ErrorCode::DimensionMismatch, "substitutes synthesis supports 1..8 rows and columns");
  }
  InformationStructure base = random_structure(rows, cols, seed);
  if (g.name() == "kl") base = clamp_means(base, 1e-3);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const RawStructure target = detail::diagonal_target(rows, cols, rng);
  const std::string label = corpus_label("substitutes-" + g.name(), rows, cols, seed);

  if (fixedWeight) {
    const double w = *fixedWeight;
    if (!(w >= 0.0 && w <= 1.0)) throw Error(ErrorCode::DomainError, "mixWeight must lie in [0, 1]");
    InformationStructure s = detail::blend(base, target, w, label);
    if (!detail::certified(s, g)) {
      throw Error(ErrorCode::SynthesisFailed, "blend at the given mixWeight is not rectangle substitutes");
    }
    return {s, w, 0};
  }

  InformationStructure at0 = detail::blend(base, target, 0.0, label);
  if (detail::certified(at0, g)) return {at0, 0.0, 1};
  double lo = 0.0, hi = 1.0;
  std::size_t steps = 1;
  for (; steps < 64 && hi - lo > 1e-6; ++steps) {
    const double mid = 0.5 * (lo + hi);
    if (detail::certified(detail::blend(base, target, mid, label), g)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  InformationStructure s = detail::blend(base, target, hi, label);
  if (!detail::certified(s, g)) {
    throw Error(ErrorCode::SynthesisFailed, "no certified blend found within 64 search steps");
  }
  return {s, hi, steps};
}

inline InformationStructure random_substitutes_structure(std::size_t rows, std::size_t cols, std::uint64_t seed,
                                                         const BregmanGenerator& g) {
  return synthesize_substitutes(rows, cols, seed, g).structure;
}

/// Y = f(sigma) for a random f, which is rectangle substitutes for every
/// generator, followed by single-cell flips of Y kept only when the result
/// stays certified.
inline InformationStructure random_boolean_substitutes_structure(std::size_t rows, std::size_t cols,
                                                                 std::uint64_t seed, std::size_t flips = 4) {
  if (rows == 0 || cols == 0 || rows > 8 || cols > 8) {
    throw Error(ErrorCode::DimensionMismatch, "boolean synthesis supports 1..8 rows and columns");
  }
  const BregmanGenerator sq = squared_generator();
  RawStructure raw = random_structure(rows, cols, seed).raw();
  raw.label = corpus_label("boolean-substitutes", rows, cols, seed);
  Rng rng(seed ^ 0xd1b54a32d192ed03ULL);
  for (std::size_t i = 0; i < rows; ++i) {
    const double bit = rng.uniform() < 0.5 ? 0.0 : 1.0;
    for (std::size_t j = 0; j < cols; ++j) raw.mean[i][j] = bit;
  }
  InformationStructure s = validate_structure(raw);
  for (std::size_t f = 0; f < flips; ++f) {
    RawStructure trial = s.raw();
    const std::size_t k = rng.index(rows * cols);
    double& y = trial.mean[k / cols][k % cols];
    y = 1.0 - y;
    InformationStructure candidate = validate_structure(trial);
    if (detail::certified(candidate, sq)) s = std::move(candidate);
  }
  return s;
}

/// Positively correlated signals with Y additive (or the geometric mean) in
/// per-signal scores: P(i, j) ~ r_i c_j exp(4 kappa (u_i - 1/2)(v_j - 1/2)),
/// with u and v sorted so the correlation runs along the score. Draws are
/// repeated until one passes rectangle_check for g.
inline InformationStructure correlated_substitutes_structure(std::size_t rows, std::size_t cols, std::uint64_t seed,
                                                             const BregmanGenerator& g, std::size_t attempts = 64) {
  if (rows == 0 || cols == 0 || rows > 8 || cols > 8) {
    throw Error(ErrorCode::DimensionMismatch, "correlated synthesis supports 1..8 rows and columns");
  }
  Rng rng(seed ^ 0x2545f4914f6cdd1dULL);
  const std::string label = corpus_label("correlated-" + g.name(), rows, cols, seed);
  for (std::size_t k = 0; k < attempts; ++k) {
    const double kappa = 1.0 + 3.0 * rng.uniform();
    const bool geometric = rng.uniform() < 0.5;
    std::vector<double> r(rows), c(cols), u(rows), v(cols);
    for (double& x : r) x = rng.uniform() + 0.05;
    for (double& x : c) x = rng.uniform() + 0.05;
    for (double& x : u) x = rng.uniform();
    for (double& x : v) x = rng.uniform();
    std::sort(u.begin(), u.end());
    std::sort(v.begin(), v.end());
    RawStructure raw = detail::zero_raw(rows, cols, label);
    double total = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        total += (raw.prob[i][j] = r[i] * c[j] * std::exp(4.0 * kappa * (u[i] - 0.5) * (v[j] - 0.5)));
        const double y = geometric ? std::sqrt(u[i] * v[j]) : 0.5 * (u[i] + v[j]);
        raw.mean[i][j] = std::clamp(y, 1e-3, 1.0 - 1e-3);
      }
    }
    for (auto& row : raw.prob) {
      for (double& p : row) p /= total;
    }
    InformationStructure s = validate_structure(raw);
    if (detail::certified(s, g)) return s;
  }
  throw Error(ErrorCode::SynthesisFailed, "no certified correlated structure in " + std::to_string(attempts) + " draws");
}

/// Blends the means of `s` toward fresh uniform means with weight `amount`.
inline InformationStructure perturb(const InformationStructure& s, double amount, std::uint64_t seed) {
  if (!(amount >= 0.0 && amount <= 1.0)) throw Error(ErrorCode::DomainError, "perturbation must lie in [0, 1]");
  Rng rng(seed);
  RawStructure raw = s.raw();
  for (auto& row : raw.mean) {
    for (double& y : row) y = (1.0 - amount) * y + amount * rng.uniform();
  }
  raw.label = s.label() + "-perturbed";
  return validate_structure(raw);
}

/// Dispatch on a GeneratorSpec.
inline InformationStructure generate(const GeneratorSpec& spec) {
  switch (spec.kind) {
    case CorpusKind::Xor: return make_xor();
    case CorpusKind::AppendixA: return make_appendix_a();
    case CorpusKind::Identical: {
      Rng rng(spec.seed);
      std::vector<double> dist(spec.rows), values(spec.rows);
      double total = 0.0;
      for (double& p : dist) total += (p = rng.uniform() + 1e-3);
      for (double& p : dist) p /= total;
      for (double& v : values) v = rng.uniform();
      return make_identical(dist, values, corpus_label("identical", spec.rows, spec.rows, spec.seed));
    }
    case CorpusKind::Random: return random_structure(spec.rows, spec.cols, spec.seed);
    case CorpusKind::Substitutes:
      return synthesize_substitutes(spec.rows, spec.cols, spec.seed, generator_by_name(spec.generator),
                                    spec.mixWeight)
          .structure;
    case CorpusKind::BooleanSubstitutes: return random_boolean_substitutes_structure(spec.rows, spec.cols, spec.seed);
    case CorpusKind::Correlated:
      return correlated_substitutes_structure(spec.rows, spec.cols, spec.seed, generator_by_name(spec.generator));
    case CorpusKind::Perturbed: {
      const InformationStructure base =
          synthesize_substitutes(spec.rows, spec.cols, spec.seed, generator_by_name(spec.generator)).structure;
      return perturb(base, spec.mixWeight.value_or(0.2), spec.seed + 1);
    }
  }
  throw Error(ErrorCode::InvalidInput, "unknown structure kind");
}

}  // namespace agreement
