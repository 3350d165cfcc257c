#include <catch_amalgamated.hpp>

#include "agreement/corpus.hpp"
#include "agreement/substitutes.hpp"
#include "support.hpp"

using namespace agreement;
using namespace testing_support;
using Catch::Matchers::WithinAbs;

namespace {

std::vector<std::size_t> from_mask(std::uint32_t mask) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; mask; ++k, mask >>= 1) {
    if (mask & 1u) out.push_back(k);
  }
  return out;
}

/// Worst mass-free violation over all sub-rectangles, squared distance.
double oracle_worst_violation(const InformationStructure& s) {
  double worst = -INFINITY;
  for (std::uint32_t S = 1; S < (1u << s.rows()); ++S) {
    for (std::uint32_t T = 1; T < (1u << s.cols()); ++T) {
      const Block b{from_mask(S), from_mask(T)};
      double mass = 0.0;
      for (std::size_t i : b.rows) {
        for (std::size_t j : b.cols) mass += s.prob(i, j);
      }
      if (mass == 0.0) continue;
      const auto [lhs, rhs] = oracle_substitutes_sq(s, b);
      worst = std::max(worst, lhs - rhs);
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("XOR violates weak substitutes by one quarter") {
  const InformationStructure x = make_xor();
  const auto [lhs, rhs] = oracle_substitutes_sq(x, {{0, 1}, {0, 1}});
  CHECK_THAT(lhs, WithinAbs(0.25, 1e-15));
  CHECK_THAT(rhs, WithinAbs(0.0, 1e-15));
  const SubstitutesReport rep = rectangle_check(x, squared_generator(), SubstitutesMode::Weak);
  CHECK_FALSE(rep.holds);
  CHECK_THAT(rep.fullLhs, WithinAbs(lhs, 1e-15));
  CHECK_THAT(rep.fullRhs, WithinAbs(rhs, 1e-15));
  CHECK_THAT(rep.worstViolation, WithinAbs(0.25, 1e-15));
}

TEST_CASE("the shared-coin example is weak but not rectangle substitutes") {
  const InformationStructure s = make_appendix_a();
  const auto [lhs, rhs] = oracle_substitutes_sq(s, {all_indices(4), all_indices(4)});
  CHECK(lhs <= rhs);
  const SubstitutesReport weak = rectangle_check(s, squared_generator(), SubstitutesMode::Weak);
  CHECK(weak.holds);
  CHECK_THAT(weak.fullLhs, WithinAbs(lhs, 1e-14));
  CHECK_THAT(weak.fullRhs, WithinAbs(rhs, 1e-14));
  const SubstitutesReport rect = rectangle_check(s, squared_generator(), SubstitutesMode::Rectangle);
  CHECK_FALSE(rect.holds);
  CHECK(rect.rectanglesChecked <= 225);
  CHECK_THAT(rect.worstViolation, WithinAbs(oracle_worst_violation(s), 1e-14));
  REQUIRE(rect.worstRect.has_value());
  const auto [wl, wr] = oracle_substitutes_sq(s, {rect.worstRect->rows, rect.worstRect->cols});
  CHECK_THAT(wl - wr, WithinAbs(rect.worstViolation, 1e-14));
}

TEST_CASE("identical signals have zero left-hand side") {
  const InformationStructure s = make_identical({0.2, 0.3, 0.5}, {0.1, 0.7, 0.4});
  const SubstitutesReport rep = rectangle_check(s, squared_generator(), SubstitutesMode::Rectangle);
  CHECK(rep.holds);
  CHECK_THAT(rep.fullLhs, WithinAbs(0.0, 1e-15));
}

TEST_CASE("rectangle worst violation matches brute force on random structures") {
  Gen gen(51);
  for (int trial = 0; trial < 80; ++trial) {
    const InformationStructure s = random_structure(gen, 5, 0.2);
    const SubstitutesReport rep = rectangle_check(s, squared_generator(), SubstitutesMode::Rectangle);
    CHECK_THAT(rep.worstViolation, WithinAbs(oracle_worst_violation(s), 1e-12));
    CHECK(rep.holds == (oracle_worst_violation(s) <= 1e-10));
  }
}

TEST_CASE("delta for XOR is one quarter by both estimates") {
  const DeltaEstimate d = delta_estimate(make_xor(), squared_generator());
  CHECK_THAT(d.lowerBound, WithinAbs(0.25, 1e-15));
  REQUIRE(d.exact.has_value());
  CHECK_THAT(*d.exact, WithinAbs(0.25, 1e-15));
  // Whole, two halvings, four half-plus-singletons, all singletons.
  CHECK(d.partitionsEnumerated == 8);
}

TEST_CASE("exact delta is zero exactly when rectangle substitutes hold") {
  Gen gen(52);
  int holds = 0, fails = 0;
  for (int trial = 0; trial < 120; ++trial) {
    RawStructure raw = random_raw(gen, gen.size(1, 3), gen.size(1, 3), 0.2);
    if (gen.coin(0.5)) {
      // Y determined by Alice's signal makes the inequality hold everywhere.
      for (auto& row : raw.mean) std::fill(row.begin(), row.end(), gen.unit());
    }
    const InformationStructure s = validate_structure(raw);
    const DeltaEstimate d = delta_estimate(s, squared_generator());
    REQUIRE(d.exact.has_value());
    CHECK(*d.exact >= d.lowerBound - 1e-15);
    const bool rect = rectangle_check(s, squared_generator(), SubstitutesMode::Rectangle).holds;
    CHECK(rect == (*d.exact <= 1e-10));
    (rect ? holds : fails)++;
  }
  CHECK(holds > 0);
  CHECK(fails > 0);
}

TEST_CASE("rectangle substitutes are closed under restriction") {
  Gen gen(53);
  const BregmanGenerator sq = squared_generator();
  int tested = 0;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const InformationStructure s = synthesize_substitutes(4, 4, seed, sq).structure;
    for (int k = 0; k < 5; ++k) {
      IndexSet rows, cols;
      for (std::size_t i = 0; i < 4; ++i) {
        if (gen.coin()) rows.push_back(i);
        if (gen.coin()) cols.push_back(i);
      }
      if (rows.empty() || cols.empty() || !(rectangle_stats(s, Rectangle(rows, cols)).mass > 0.0)) continue;
      const InformationStructure sub = restrict(s, Rectangle(rows, cols));
      CHECK(rectangle_check(sub, sq, SubstitutesMode::Rectangle).holds);
      ++tested;
    }
  }
  CHECK(tested > 10);
}

TEST_CASE("transposed orientation gives the same verdict") {
  Gen gen(54);
  for (int trial = 0; trial < 60; ++trial) {
    const InformationStructure s = random_structure(gen, 4, 0.1);
    CheckOptions t;
    t.orientation = Orientation::Transposed;
    const auto a = rectangle_check(s, squared_generator(), SubstitutesMode::Rectangle);
    const auto b = rectangle_check(s, squared_generator(), SubstitutesMode::Rectangle, t);
    CHECK(a.holds == b.holds);
    CHECK_THAT(a.worstViolation, WithinAbs(b.worstViolation, 1e-12));
  }
}

TEST_CASE("enumeration refuses oversized grids") {
  Gen gen(55);
  const InformationStructure big = validate_structure(random_raw(gen, 13, 2));
  try {
    rectangle_check(big, squared_generator(), SubstitutesMode::Rectangle);
    FAIL("expected TooLargeForEnumeration");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooLargeForEnumeration);
  }
  CHECK(rectangle_check(big, squared_generator(), SubstitutesMode::Weak).rectanglesChecked == 1);
  CHECK_THROWS_AS(delta_estimate(big, squared_generator()), Error);
  CHECK_THROWS_AS(rectangle_check(big, squared_generator(), SubstitutesMode::Delta), Error);
  CHECK_THROWS_AS(substitutes_mode_from_string("strong"), Error);
}
