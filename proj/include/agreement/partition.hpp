#pragma once

// Rectangle partitions of the signal grid as produced by a protocol
// transcript, and the per-cell beliefs they induce.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string_view>
#include <vector>

#include "agreement/errors.hpp"
#include "agreement/structure.hpp"

namespace agreement {

enum class Party { Alice, Bob };

constexpr std::string_view to_string(Party p) { return p == Party::Alice ? "alice" : "bob"; }
constexpr Party other(Party p) { return p == Party::Alice ? Party::Bob : Party::Alice; }

/// Blocks partition the whole m x n grid; one block per realized transcript
/// prefix. `cellBlock` maps row-major cell index to block index.
class ProtocolPartition {
 public:
  ProtocolPartition() = default;
  ProtocolPartition(std::size_t rows, std::size_t cols, std::vector<Rectangle> blocks, std::size_t round,
                    Party speakerNext)
      : rows_(rows), cols_(cols), blocks_(std::move(blocks)), round_(round), speakerNext_(speakerNext) {
    cellBlock_.assign(rows_ * cols_, kUnassigned);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      if (blocks_[b].empty()) throw Error(ErrorCode::InvalidInput, "partition block has an empty side");
      for (std::size_t i : blocks_[b].rows) {
        for (std::size_t j : blocks_[b].cols) {
          if (i >= rows_ || j >= cols_) throw Error(ErrorCode::DimensionMismatch, "block index out of range");
          std::size_t& slot = cellBlock_[i * cols_ + j];
          if (slot != kUnassigned) throw Error(ErrorCode::InvalidInput, "partition blocks overlap");
          slot = b;
        }
      }
    }
    for (std::size_t slot : cellBlock_) {
      if (slot == kUnassigned) throw Error(ErrorCode::InvalidInput, "partition does not cover the grid");
    }
  }

  /// The single-block partition at round 0; Alice speaks first.
  static ProtocolPartition initial(const InformationStructure& s) {
    return ProtocolPartition(s.rows(), s.cols(), {s.full()}, 0, Party::Alice);
  }

  /// Every cell in its own block.
  static ProtocolPartition singletons(std::size_t rows, std::size_t cols) {
    std::vector<Rectangle> blocks;
    blocks.reserve(rows * cols);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) blocks.push_back(Rectangle::cell(i, j));
    }
    return ProtocolPartition(rows, cols, std::move(blocks), 0, Party::Alice);
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  const std::vector<Rectangle>& blocks() const noexcept { return blocks_; }
  std::size_t round() const noexcept { return round_; }
  Party speaker_next() const noexcept { return speakerNext_; }
  std::size_t block_of(std::size_t i, std::size_t j) const { return cellBlock_[i * cols_ + j]; }

 private:
  static constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Rectangle> blocks_;
  std::vector<std::size_t> cellBlock_;
  std::size_t round_ = 0;
  Party speakerNext_ = Party::Alice;
};

/// True when every block of `finer` lies inside a single block of `coarser`.
inline bool refines(const ProtocolPartition& finer, const ProtocolPartition& coarser) {
  if (finer.rows() != coarser.rows() || finer.cols() != coarser.cols()) return false;
  for (const Rectangle& block : finer.blocks()) {
    const std::size_t target = coarser.block_of(block.rows.front(), block.cols.front());
    for (std::size_t i : block.rows) {
      for (std::size_t j : block.cols) {
        if (coarser.block_of(i, j) != target) return false;
      }
    }
  }
  return true;
}

/// Alice's, Bob's and Charlie's expectations at every cell, row-major.
/// Zero-probability cells hold NaN.
struct CellBeliefs {
  std::vector<double> alice;
  std::vector<double> bob;
  std::vector<double> charlie;
};

inline CellBeliefs beliefs(const InformationStructure& s, const ProtocolPartition& partition) {
  if (partition.rows() != s.rows() || partition.cols() != s.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "partition shape does not match the structure");
  }
  const std::size_t n = s.cols();
  CellBeliefs out;
  out.alice.assign(s.cells(), std::nan(""));
  out.bob.assign(s.cells(), std::nan(""));
  out.charlie.assign(s.cells(), std::nan(""));
  for (const Rectangle& block : partition.blocks()) {
    const RectangleStats st = rectangle_stats(s, block);
    if (!(st.mass > 0.0)) continue;
    const double c = std::clamp(st.joint_mean(), 0.0, 1.0);
    for (std::size_t r = 0; r < block.rows.size(); ++r) {
      for (std::size_t q = 0; q < block.cols.size(); ++q) {
        const std::size_t i = block.rows[r], j = block.cols[q];
        if (s.prob(i, j) == 0.0) continue;
        const std::size_t k = i * n + j;
        out.alice[k] = std::clamp(st.rowWeighted[r] / st.rowMass[r], 0.0, 1.0);
        out.bob[k] = std::clamp(st.colWeighted[q] / st.colMass[q], 0.0, 1.0);
        out.charlie[k] = c;
      }
    }
  }
  return out;
}

}  // namespace agreement
