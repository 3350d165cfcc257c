#pragma once

// Finite two-party information structures.
//
// A structure is a joint distribution over (Alice signal, Bob signal) pairs
// together with the conditional mean E[Y | sigma, tau] of a target in [0, 1]
// for every pair. All conditional expectations used by the protocols and the
// substitutes checks are probability-weighted averages of that mean matrix.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "agreement/errors.hpp"

namespace agreement {

using IndexSet = std::vector<std::size_t>;

inline constexpr double kMassTolerance = 1e-9;
inline constexpr double kRenormalizeThreshold = 1e-12;

/// A product set S x T of Alice-signal and Bob-signal indices.
/// Index sets are kept sorted and free of duplicates.
struct Rectangle {
  IndexSet rows;
  IndexSet cols;

  Rectangle() = default;
  Rectangle(IndexSet r, IndexSet c) : rows(std::move(r)), cols(std::move(c)) {
    normalize(rows);
    normalize(cols);
  }

  static Rectangle full(std::size_t m, std::size_t n) {
    IndexSet r(m), c(n);
    std::iota(r.begin(), r.end(), std::size_t{0});
    std::iota(c.begin(), c.end(), std::size_t{0});
    return Rectangle(std::move(r), std::move(c));
  }

  static Rectangle cell(std::size_t i, std::size_t j) { return Rectangle({i}, {j}); }

  bool empty() const noexcept { return rows.empty() || cols.empty(); }
  std::size_t size() const noexcept { return rows.size() * cols.size(); }

  bool has_row(std::size_t i) const { return std::binary_search(rows.begin(), rows.end(), i); }
  bool has_col(std::size_t j) const { return std::binary_search(cols.begin(), cols.end(), j); }
  bool contains(std::size_t i, std::size_t j) const { return has_row(i) && has_col(j); }

  friend bool operator==(const Rectangle&, const Rectangle&) = default;

 private:
  static void normalize(IndexSet& s) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
  }
};

inline Rectangle intersect(const Rectangle& a, const Rectangle& b) {
  IndexSet r, c;
  std::set_intersection(a.rows.begin(), a.rows.end(), b.rows.begin(), b.rows.end(), std::back_inserter(r));
  std::set_intersection(a.cols.begin(), a.cols.end(), b.cols.begin(), b.cols.end(), std::back_inserter(c));
  return Rectangle(std::move(r), std::move(c));
}

/// Unvalidated structure data as read from a file or built by a generator.
struct RawStructure {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::vector<double>> prob;
  std::vector<std::vector<double>> mean;
  std::string label;
};

class InformationStructure;
InformationStructure validate_structure(const RawStructure& raw);

/// Immutable, validated information structure. Obtain one through
/// validate_structure(); matrices are stored row-major.
class InformationStructure {
 public:
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t cells() const noexcept { return rows_ * cols_; }

  double prob(std::size_t i, std::size_t j) const { return prob_[i * cols_ + j]; }
  double mean(std::size_t i, std::size_t j) const { return mean_[i * cols_ + j]; }
  std::span<const double> prob_data() const noexcept { return prob_; }
  std::span<const double> mean_data() const noexcept { return mean_; }

  const std::string& label() const noexcept { return label_; }
  /// True when the input mass was off by more than 1e-12 and was rescaled.
  bool renormalized() const noexcept { return renormalized_; }
  double input_mass() const noexcept { return input_mass_; }

  Rectangle full() const { return Rectangle::full(rows_, cols_); }

  RawStructure raw() const {
    RawStructure r{rows_, cols_, {}, {}, label_};
    r.prob.assign(rows_, std::vector<double>(cols_));
    r.mean.assign(rows_, std::vector<double>(cols_));
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < cols_; ++j) {
        r.prob[i][j] = prob(i, j);
        r.mean[i][j] = mean(i, j);
      }
    }
    return r;
  }

  InformationStructure with_label(std::string label) const {
    InformationStructure copy = *this;
    copy.label_ = std::move(label);
    return copy;
  }

 private:
  InformationStructure() = default;
  friend InformationStructure validate_structure(const RawStructure& raw);

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> prob_;
  std::vector<double> mean_;
  std::string label_;
  bool renormalized_ = false;
  double input_mass_ = 1.0;
};

inline InformationStructure validate_structure(const RawStructure& raw) {
  if (raw.rows == 0 || raw.cols == 0) {
    throw Error(ErrorCode::DimensionMismatch, "structure needs at least one row and one column");
  }
  auto check_shape = [&](const std::vector<std::vector<double>>& mat, const char* name) {
    if (mat.size() != raw.rows) {
      throw Error(ErrorCode::DimensionMismatch,
                  std::string(name) + " has " + std::to_string(mat.size()) + " rows, expected " +
                      std::to_string(raw.rows));
    }
    for (std::size_t i = 0; i < mat.size(); ++i) {
      if (mat[i].size() != raw.cols) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::string(name) + " row " + std::to_string(i) + " has " + std::to_string(mat[i].size()) +
                        " entries, expected " + std::to_string(raw.cols));
      }
    }
  };
  check_shape(raw.prob, "prob");
  check_shape(raw.mean, "mean");

  InformationStructure s;
  s.rows_ = raw.rows;
  s.cols_ = raw.cols;
  s.label_ = raw.label;
  s.prob_.reserve(raw.rows * raw.cols);
  s.mean_.reserve(raw.rows * raw.cols);

  double total = 0.0;
  for (std::size_t i = 0; i < raw.rows; ++i) {
    for (std::size_t j = 0; j < raw.cols; ++j) {
      const double p = raw.prob[i][j];
      const double y = raw.mean[i][j];
      if (!std::isfinite(p) || p < 0.0) {
        throw Error(ErrorCode::NegativeProbability,
                    "prob[" + std::to_string(i) + "][" + std::to_string(j) + "] = " + std::to_string(p));
      }
      if (!std::isfinite(y) || y < 0.0 || y > 1.0) {
        throw Error(ErrorCode::MeanOutOfRange,
                    "mean[" + std::to_string(i) + "][" + std::to_string(j) + "] = " + std::to_string(y));
      }
      total += p;
      s.prob_.push_back(p);
      s.mean_.push_back(y);
    }
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    throw Error(ErrorCode::MassNotOne, "total probability is " + std::to_string(total));
  }
  s.input_mass_ = total;
  if (std::abs(total - 1.0) > kRenormalizeThreshold) {
    for (double& p : s.prob_) p /= total;
    s.renormalized_ = true;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Conditional expectations
// ---------------------------------------------------------------------------

/// Per-rectangle sufficient statistics: line masses and Y-weighted sums.
struct RectangleStats {
  double mass = 0.0;
  double weighted = 0.0;        // sum of p * mean over the rectangle
  std::vector<double> rowMass;  // indexed like rect.rows
  std::vector<double> rowWeighted;
  std::vector<double> colMass;  // indexed like rect.cols
  std::vector<double> colWeighted;

  double joint_mean() const { return weighted / mass; }
};

inline RectangleStats rectangle_stats(const InformationStructure& s, const Rectangle& rect) {
  RectangleStats st;
  st.rowMass.assign(rect.rows.size(), 0.0);
  st.rowWeighted.assign(rect.rows.size(), 0.0);
  st.colMass.assign(rect.cols.size(), 0.0);
  st.colWeighted.assign(rect.cols.size(), 0.0);
  for (std::size_t a = 0; a < rect.rows.size(); ++a) {
    const std::size_t i = rect.rows[a];
    for (std::size_t b = 0; b < rect.cols.size(); ++b) {
      const std::size_t j = rect.cols[b];
      const double p = s.prob(i, j);
      if (p == 0.0) continue;
      const double py = p * s.mean(i, j);
      st.rowMass[a] += p;
      st.rowWeighted[a] += py;
      st.colMass[b] += p;
      st.colWeighted[b] += py;
      st.mass += p;
      st.weighted += py;
    }
  }
  return st;
}

inline double mass(const InformationStructure& s, const Rectangle& rect) {
  double total = 0.0;
  for (std::size_t i : rect.rows) {
    for (std::size_t j : rect.cols) total += s.prob(i, j);
  }
  return total;
}

enum class Slice { Joint, AliceRow, BobCol, Cell };

namespace detail {
inline void require_in_range(const InformationStructure& s, const Rectangle& rect) {
  if (rect.empty()) throw Error(ErrorCode::InvalidInput, "rectangle has an empty side");
  if (rect.rows.back() >= s.rows() || rect.cols.back() >= s.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "rectangle index outside the structure");
  }
}
inline double clamp_unit(double x) { return std::clamp(x, 0.0, 1.0); }
}  // namespace detail

/// mu_{ST}: expectation of Y given sigma in S and tau in T.
inline double joint_mean(const InformationStructure& s, const Rectangle& rect) {
  detail::require_in_range(s, rect);
  double m = 0.0, w = 0.0;
  for (std::size_t i : rect.rows) {
    for (std::size_t j : rect.cols) {
      const double p = s.prob(i, j);
      m += p;
      w += p * s.mean(i, j);
    }
  }
  if (!(m > 0.0)) throw Error(ErrorCode::ZeroMassSlice, "rectangle has zero probability");
  return detail::clamp_unit(w / m);
}

/// Conditional means over a rectangle.
///  Joint    -> { mu_ST }
///  AliceRow -> mu_{sigma T} for every sigma in S (in rect.rows order)
///  BobCol   -> mu_{S tau} for every tau in T
///  Cell     -> mu_{sigma tau} for every cell, row-major
inline std::vector<double> conditional_mean(const InformationStructure& s, const Rectangle& rect, Slice mode) {
  detail::require_in_range(s, rect);
  switch (mode) {
    case Slice::Joint:
      return {joint_mean(s, rect)};
    case Slice::AliceRow:
    case Slice::BobCol: {
      const RectangleStats st = rectangle_stats(s, rect);
      const bool rows = mode == Slice::AliceRow;
      const auto& m = rows ? st.rowMass : st.colMass;
      const auto& w = rows ? st.rowWeighted : st.colWeighted;
      std::vector<double> out(m.size());
      for (std::size_t k = 0; k < m.size(); ++k) {
        if (!(m[k] > 0.0)) {
          throw Error(ErrorCode::ZeroMassSlice, std::string(rows ? "row " : "column ") +
                                                    std::to_string(rows ? rect.rows[k] : rect.cols[k]) +
                                                    " has zero probability inside the rectangle");
        }
        out[k] = detail::clamp_unit(w[k] / m[k]);
      }
      return out;
    }
    case Slice::Cell: {
      std::vector<double> out;
      out.reserve(rect.size());
      for (std::size_t i : rect.rows) {
        for (std::size_t j : rect.cols) {
          if (!(s.prob(i, j) > 0.0)) {
            throw Error(ErrorCode::ZeroMassSlice,
                        "cell (" + std::to_string(i) + "," + std::to_string(j) + ") has zero probability");
          }
          out.push_back(s.mean(i, j));
        }
      }
      return out;
    }
  }
  return {};
}

/// The structure conditioned on sigma in S, tau in T, with rows and columns
/// re-indexed in the rectangle's order.
inline InformationStructure restrict(const InformationStructure& s, const Rectangle& rect) {
  detail::require_in_range(s, rect);
  const double m = mass(s, rect);
  if (!(m > 0.0)) throw Error(ErrorCode::ZeroMassSlice, "cannot restrict to a zero-probability rectangle");
  RawStructure raw;
  raw.rows = rect.rows.size();
  raw.cols = rect.cols.size();
  raw.label = s.label();
  raw.prob.assign(raw.rows, std::vector<double>(raw.cols));
  raw.mean.assign(raw.rows, std::vector<double>(raw.cols));
  for (std::size_t a = 0; a < raw.rows; ++a) {
    for (std::size_t b = 0; b < raw.cols; ++b) {
      raw.prob[a][b] = s.prob(rect.rows[a], rect.cols[b]) / m;
      raw.mean[a][b] = s.mean(rect.rows[a], rect.cols[b]);
    }
  }
  return validate_structure(raw);
}

/// Swaps the roles of Alice and Bob.
inline InformationStructure transpose(const InformationStructure& s) {
  RawStructure raw;
  raw.rows = s.cols();
  raw.cols = s.rows();
  raw.label = s.label();
  raw.prob.assign(raw.rows, std::vector<double>(raw.cols));
  raw.mean.assign(raw.rows, std::vector<double>(raw.cols));
  for (std::size_t i = 0; i < s.rows(); ++i) {
    for (std::size_t j = 0; j < s.cols(); ++j) {
      raw.prob[j][i] = s.prob(i, j);
      raw.mean[j][i] = s.mean(i, j);
    }
  }
  return validate_structure(raw);
}

/// Initial beliefs mu_sigma (per row) and mu_tau (per column); zero-mass lines get NaN.
struct MarginalBeliefs {
  std::vector<double> alice;
  std::vector<double> bob;
};

inline MarginalBeliefs marginal_beliefs(const InformationStructure& s) {
  const RectangleStats st = rectangle_stats(s, s.full());
  MarginalBeliefs out{std::vector<double>(s.rows()), std::vector<double>(s.cols())};
  for (std::size_t i = 0; i < s.rows(); ++i) {
    out.alice[i] = st.rowMass[i] > 0.0 ? detail::clamp_unit(st.rowWeighted[i] / st.rowMass[i]) : std::nan("");
  }
  for (std::size_t j = 0; j < s.cols(); ++j) {
    out.bob[j] = st.colMass[j] > 0.0 ? detail::clamp_unit(st.colWeighted[j] / st.colMass[j]) : std::nan("");
  }
  return out;
}

}  // namespace agreement
