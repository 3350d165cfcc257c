#include <catch_amalgamated.hpp>

#include "agreement/structure.hpp"
#include "support.hpp"

using namespace agreement;
using testing_support::Gen;
using Catch::Matchers::WithinAbs;

namespace {

RawStructure two_by_two(std::vector<std::vector<double>> prob, std::vector<std::vector<double>> mean) {
  return RawStructure{2, 2, std::move(prob), std::move(mean), "t"};
}

ErrorCode code_of(const RawStructure& raw) {
  try {
    validate_structure(raw);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected validation to throw");
  return ErrorCode::InvalidInput;
}

}  // namespace

TEST_CASE("validation rejects malformed structures with specific codes") {
  CHECK(code_of(two_by_two({{0.5, 0.5}}, {{0, 0}, {0, 0}})) == ErrorCode::DimensionMismatch);
  CHECK(code_of(two_by_two({{0.5, 0.5}, {0.5}}, {{0, 0}, {0, 0}})) == ErrorCode::DimensionMismatch);
  CHECK(code_of(two_by_two({{0.6, -0.1}, {0.25, 0.25}}, {{0, 0}, {0, 0}})) == ErrorCode::NegativeProbability);
  CHECK(code_of(two_by_two({{0.3, 0.3}, {0.3, 0.3}}, {{0, 0}, {0, 0}})) == ErrorCode::MassNotOne);
  CHECK(code_of(two_by_two({{0.25, 0.25}, {0.25, 0.25}}, {{0, 1.5}, {0, 0}})) == ErrorCode::MeanOutOfRange);
  CHECK(code_of(two_by_two({{0.25, 0.25}, {0.25, NAN}}, {{0, 0}, {0, 0}})) == ErrorCode::NegativeProbability);
  CHECK(code_of(RawStructure{0, 2, {}, {}, ""}) == ErrorCode::DimensionMismatch);
}

TEST_CASE("mass within the tolerance is renormalized and reported") {
  const auto exact = validate_structure(two_by_two({{0.25, 0.25}, {0.25, 0.25}}, {{0, 1}, {1, 0}}));
  CHECK_FALSE(exact.renormalized());
  const auto off = validate_structure(two_by_two({{0.25, 0.25}, {0.25, 0.25 + 5e-10}}, {{0, 1}, {1, 0}}));
  CHECK(off.renormalized());
  double total = 0.0;
  for (double p : off.prob_data()) total += p;
  CHECK_THAT(total, WithinAbs(1.0, 1e-15));
}

TEST_CASE("conditional means agree with direct summation") {
  Gen gen(21);
  for (int trial = 0; trial < 200; ++trial) {
    const InformationStructure s = testing_support::random_structure(gen, 6, 0.2);
    IndexSet rows, cols;
    for (std::size_t i = 0; i < s.rows(); ++i) {
      if (gen.coin(0.6)) rows.push_back(i);
    }
    for (std::size_t j = 0; j < s.cols(); ++j) {
      if (gen.coin(0.6)) cols.push_back(j);
    }
    if (rows.empty() || cols.empty()) continue;
    const Rectangle r(rows, cols);
    double m = 0.0, w = 0.0;
    for (std::size_t i : rows) {
      for (std::size_t j : cols) {
        m += s.prob(i, j);
        w += s.prob(i, j) * s.mean(i, j);
      }
    }
    if (m == 0.0) {
      CHECK_THROWS_AS(joint_mean(s, r), Error);
      continue;
    }
    CHECK_THAT(joint_mean(s, r), WithinAbs(w / m, 1e-12));
    const auto ob = testing_support::oracle_beliefs(s, {{rows, cols}});
    bool rowsPositive = true;
    for (std::size_t i : rows) {
      double rm = 0.0;
      for (std::size_t j : cols) rm += s.prob(i, j);
      rowsPositive = rowsPositive && rm > 0.0;
    }
    if (rowsPositive) {
      const auto a = conditional_mean(s, r, Slice::AliceRow);
      for (std::size_t k = 0; k < rows.size(); ++k) {
        for (std::size_t j : cols) {
          if (s.prob(rows[k], j) > 0.0) CHECK_THAT(a[k], WithinAbs(ob.alice[rows[k]][j], 1e-12));
        }
      }
    } else {
      CHECK_THROWS_AS(conditional_mean(s, r, Slice::AliceRow), Error);
    }
  }
}

TEST_CASE("zero-mass slices raise ZeroMassSlice") {
  const auto s = validate_structure(two_by_two({{0.5, 0.0}, {0.0, 0.5}}, {{0.2, 0.3}, {0.4, 0.6}}));
  try {
    joint_mean(s, Rectangle({0}, {1}));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroMassSlice);
  }
  CHECK_THROWS_AS(conditional_mean(s, Rectangle({0, 1}, {1}), Slice::AliceRow), Error);
  CHECK_THROWS_AS(conditional_mean(s, Rectangle({0}, {0, 1}), Slice::Cell), Error);
  CHECK_THAT(conditional_mean(s, Rectangle({0}, {0}), Slice::Cell)[0], WithinAbs(0.2, 0.0));
}

TEST_CASE("restriction renormalizes and preserves conditional means") {
  Gen gen(5);
  for (int trial = 0; trial < 100; ++trial) {
    const InformationStructure s = testing_support::random_structure(gen, 5);
    const Rectangle r({0, s.rows() - 1}, {0, s.cols() - 1});
    const InformationStructure sub = restrict(s, r);
    CHECK(sub.rows() == r.rows.size());
    CHECK_THAT(joint_mean(sub, sub.full()), WithinAbs(joint_mean(s, r), 1e-12));
  }
}

TEST_CASE("transpose swaps the experts") {
  Gen gen(8);
  const InformationStructure s = testing_support::random_structure(gen, 6);
  const InformationStructure t = transpose(s);
  REQUIRE(t.rows() == s.cols());
  const auto ms = marginal_beliefs(s);
  const auto mt = marginal_beliefs(t);
  for (std::size_t i = 0; i < s.rows(); ++i) CHECK_THAT(mt.bob[i], WithinAbs(ms.alice[i], 1e-15));
  CHECK(transpose(t).raw().prob == s.raw().prob);
}

TEST_CASE("marginal beliefs are NaN on zero-mass lines") {
  const auto s = validate_structure(two_by_two({{0.5, 0.5}, {0.0, 0.0}}, {{0.2, 0.4}, {0.9, 0.9}}));
  const auto mb = marginal_beliefs(s);
  CHECK_THAT(mb.alice[0], WithinAbs(0.3, 1e-15));
  CHECK(std::isnan(mb.alice[1]));
  CHECK_THAT(mb.bob[1], WithinAbs(0.4, 1e-15));
}
