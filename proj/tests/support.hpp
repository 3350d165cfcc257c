#pragma once

// Hand-rolled generators and brute-force oracles shared by the test suites.
// Oracles recompute quantities from their definitions over raw matrices and
// never call the library routine they are checking.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "agreement/structure.hpp"

namespace testing_support {

using Matrix = std::vector<std::vector<double>>;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}
  double unit() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double range(double lo, double hi) { return lo + (hi - lo) * unit(); }
  std::size_t size(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(engine_);
  }
  bool coin(double p = 0.5) { return unit() < p; }

 private:
  std::mt19937 engine_;
};

/// Random raw structure; `sparsity` is the chance of a zero-probability cell.
inline agreement::RawStructure random_raw(Gen& gen, std::size_t m, std::size_t n, double sparsity = 0.0,
                                          double meanLo = 0.0, double meanHi = 1.0) {
  agreement::RawStructure raw{m, n, Matrix(m, std::vector<double>(n)), Matrix(m, std::vector<double>(n)), "gen"};
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      raw.prob[i][j] = gen.coin(sparsity) ? 0.0 : gen.range(0.01, 1.0);
      raw.mean[i][j] = gen.range(meanLo, meanHi);
      total += raw.prob[i][j];
    }
  }
  if (total == 0.0) {
    raw.prob[0][0] = 1.0;
    total = 1.0;
  }
  for (auto& row : raw.prob) {
    for (double& p : row) p /= total;
  }
  return raw;
}

inline agreement::InformationStructure random_structure(Gen& gen, std::size_t maxSide, double sparsity = 0.0) {
  return agreement::validate_structure(random_raw(gen, gen.size(1, maxSide), gen.size(1, maxSide), sparsity));
}

/// Y is a balanced bit fixed by Bob's signal; Alice's signal is nearly
/// independent of it (`noise` controls how much). Bob is informed and Alice
/// is not, so the initial beliefs are far apart.
inline agreement::RawStructure informed_raw(Gen& gen, std::size_t n, double noise = 0.05) {
  agreement::RawStructure raw{n, n, Matrix(n, std::vector<double>(n)), Matrix(n, std::vector<double>(n)), "informed"};
  std::vector<double> row(n), col(n);
  for (double& r : row) r = gen.range(0.5, 1.0);
  for (double& c : col) c = gen.range(0.5, 1.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      raw.prob[i][j] = row[i] * col[j] * (1.0 + noise * gen.range(-1.0, 1.0));
      raw.mean[i][j] = j % 2 == 0 ? 1.0 : 0.0;
      total += raw.prob[i][j];
    }
  }
  for (auto& r : raw.prob) {
    for (double& p : r) p /= total;
  }
  return raw;
}

// ---------------------------------------------------------------------------
// Divergence oracles
// ---------------------------------------------------------------------------

inline double sq_div(double y, double x) { return (y - x) * (y - x); }

inline double kl_div(double y, double x) {
  auto term = [](double p, double q) {
    if (p == 0.0) return 0.0;
    if (q == 0.0) return double(INFINITY);
    return p * std::log(p / q);
  };
  return term(y, x) + term(1.0 - y, 1.0 - x);
}

inline double neg_entropy(double x) {
  auto h = [](double p) { return p > 0.0 ? p * std::log(p) : 0.0; };
  return h(x) + h(1.0 - x);
}

inline double jb_sq(double a, double b) { return 0.5 * (a * a + b * b) - 0.25 * (a + b) * (a + b); }

inline double jb_kl(double a, double b) {
  return 0.5 * (neg_entropy(a) + neg_entropy(b)) - neg_entropy(0.5 * (a + b));
}

// ---------------------------------------------------------------------------
// Belief oracles
// ---------------------------------------------------------------------------

struct Block {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
};

/// Per-cell Alice, Bob and Charlie beliefs for a list of blocks, by direct
/// summation over each block.
struct OracleBeliefs {
  Matrix alice, bob, charlie;
};

inline OracleBeliefs oracle_beliefs(const agreement::InformationStructure& s, const std::vector<Block>& blocks) {
  const std::size_t m = s.rows(), n = s.cols();
  OracleBeliefs out{Matrix(m, std::vector<double>(n, NAN)), Matrix(m, std::vector<double>(n, NAN)),
                    Matrix(m, std::vector<double>(n, NAN))};
  for (const Block& b : blocks) {
    double mass = 0.0, w = 0.0;
    for (std::size_t i : b.rows) {
      for (std::size_t j : b.cols) {
        mass += s.prob(i, j);
        w += s.prob(i, j) * s.mean(i, j);
      }
    }
    for (std::size_t i : b.rows) {
      for (std::size_t j : b.cols) {
        if (s.prob(i, j) == 0.0) continue;
        double rm = 0.0, rw = 0.0, cm = 0.0, cw = 0.0;
        for (std::size_t jj : b.cols) {
          rm += s.prob(i, jj);
          rw += s.prob(i, jj) * s.mean(i, jj);
        }
        for (std::size_t ii : b.rows) {
          cm += s.prob(ii, j);
          cw += s.prob(ii, j) * s.mean(ii, j);
        }
        out.alice[i][j] = rw / rm;
        out.bob[i][j] = cw / cm;
        out.charlie[i][j] = w / mass;
      }
    }
  }
  return out;
}

/// Unconditional beliefs mu_sigma (per row) and mu_tau (per column).
inline std::pair<std::vector<double>, std::vector<double>> oracle_marginals(const agreement::InformationStructure& s) {
  std::vector<double> a(s.rows(), NAN), b(s.cols(), NAN);
  for (std::size_t i = 0; i < s.rows(); ++i) {
    double m = 0.0, w = 0.0;
    for (std::size_t j = 0; j < s.cols(); ++j) {
      m += s.prob(i, j);
      w += s.prob(i, j) * s.mean(i, j);
    }
    if (m > 0.0) a[i] = w / m;
  }
  for (std::size_t j = 0; j < s.cols(); ++j) {
    double m = 0.0, w = 0.0;
    for (std::size_t i = 0; i < s.rows(); ++i) {
      m += s.prob(i, j);
      w += s.prob(i, j) * s.mean(i, j);
    }
    if (m > 0.0) b[j] = w / m;
  }
  return {a, b};
}

/// Both sides of the substitutes inequality on S x T with squared distance,
/// straight from the conditional expectations.
inline std::pair<double, double> oracle_substitutes_sq(const agreement::InformationStructure& s, const Block& r) {
  const OracleBeliefs ob = oracle_beliefs(s, {r});
  double mass = 0.0, lhs = 0.0, rhs = 0.0;
  for (std::size_t i : r.rows) {
    for (std::size_t j : r.cols) {
      const double p = s.prob(i, j);
      if (p == 0.0) continue;
      mass += p;
      lhs += p * sq_div(s.mean(i, j), ob.bob[i][j]);
      rhs += p * sq_div(ob.alice[i][j], ob.charlie[i][j]);
    }
  }
  return {lhs / mass, rhs / mass};
}

inline std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = k;
  return v;
}

}  // namespace testing_support
