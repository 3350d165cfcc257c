#include <catch_amalgamated.hpp>

#include "agreement/divergence.hpp"
#include "support.hpp"

using namespace agreement;
using namespace testing_support;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("squared and KL divergences match their textbook forms") {
  const BregmanGenerator sq = squared_generator();
  const BregmanGenerator kl = negative_entropy_generator();
  Gen gen(1);
  for (int n = 0; n < 5000; ++n) {
    const double y = gen.unit(), x = gen.range(1e-9, 1.0 - 1e-9);
    CHECK(bregman(sq, y, x) == sq_div(y, x));
    CHECK_THAT(bregman(kl, y, x), WithinAbs(kl_div(y, x), 1e-12 * std::max(1.0, kl_div(y, x))));
  }
  CHECK_THAT(bregman(kl, 0.5, 0.25), WithinAbs(0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0), 1e-15));
}

TEST_CASE("KL is infinite at the endpoints and zero on the diagonal") {
  const BregmanGenerator kl = negative_entropy_generator();
  CHECK(std::isinf(bregman(kl, 0.3, 0.0)));
  CHECK(std::isinf(bregman(kl, 0.3, 1.0)));
  CHECK(bregman(kl, 0.0, 0.0) == 0.0);
  CHECK(bregman(kl, 1.0, 1.0) == 0.0);
  CHECK_THAT(bregman(kl, 0.0, 0.5), WithinAbs(std::log(2.0), 1e-15));
}

TEST_CASE("arguments outside [0, 1] are domain errors") {
  const BregmanGenerator sq = squared_generator();
  CHECK_THROWS_AS(bregman(sq, -0.1, 0.5), Error);
  CHECK_THROWS_AS(jensen_bregman(sq, 0.5, 1.1), Error);
  CHECK_THROWS_AS(power_generator(1.0), Error);
  CHECK_THROWS_AS(generator_by_name("power:abc"), Error);
  CHECK_THROWS_AS(generator_by_name("entropy"), Error);
}

TEST_CASE("generator metadata") {
  const BregmanGenerator kl = negative_entropy_generator();
  CHECK_THAT(kl.range(), WithinAbs(std::log(2.0), 1e-9));
  CHECK_THAT(kl.argmin(), WithinAbs(0.5, 1e-6));
  CHECK(kl.symmetric());
  const BregmanGenerator sq = squared_generator();
  CHECK_THAT(sq.range(), WithinAbs(1.0, 1e-12));
  CHECK_FALSE(sq.symmetric());
  CHECK(generator_by_name("power:3").name() == "power:3");
  CHECK(generator_by_name("power:2.5").name() == "power:2.5");
  for (const char* name : {"squared", "kl", "power:2", "power:4"}) {
    CHECK(is_strictly_convex_on_grid(generator_by_name(name)));
  }
}

TEST_CASE("power:2 reproduces squared distance without a closed form") {
  const BregmanGenerator p2 = power_generator(2.0);
  Gen gen(2);
  for (int n = 0; n < 1000; ++n) {
    const double y = gen.unit(), x = gen.unit();
    CHECK_THAT(bregman(p2, y, x), WithinAbs(sq_div(y, x), 1e-14));
  }
}

TEST_CASE("Jensen-Bregman matches its definition and the midpoint identity") {
  const BregmanGenerator sq = squared_generator();
  const BregmanGenerator kl = negative_entropy_generator();
  Gen gen(3);
  for (int n = 0; n < 5000; ++n) {
    const double a = gen.unit(), b = gen.unit();
    CHECK_THAT(jensen_bregman(sq, a, b), WithinAbs(jb_sq(a, b), 1e-15));
    CHECK_THAT(jensen_bregman(sq, a, b), WithinAbs(0.25 * (a - b) * (a - b), 1e-15));
    CHECK_THAT(jensen_bregman(kl, a, b), WithinAbs(jb_kl(a, b), 1e-12));
    CHECK(jensen_bregman(kl, a, b) == jensen_bregman(kl, b, a));
  }
  CHECK_THAT(jensen_bregman(kl, 0.0, 1.0), WithinAbs(std::log(2.0), 1e-15));
}

TEST_CASE("JB facts hold on random instances") {
  Gen gen(4);
  for (const BregmanGenerator& g : {squared_generator(), negative_entropy_generator(), power_generator(3.0)}) {
    for (int n = 0; n < 3000; ++n) {
      double a = gen.unit(), b = gen.unit();
      if (a > b) std::swap(a, b);
      const double jb = jensen_bregman(g, a, b);
      const double tol = 1e-12;
      const double x = gen.unit();
      CHECK(0.5 * (bregman(g, a, x) + bregman(g, b, x)) >= jb - tol);
      const double inner = gen.range(a, b);
      CHECK(jensen_bregman(g, a, inner) + jensen_bregman(g, inner, b) <= jb + tol);
      const double a2 = gen.range(a, inner), b2 = gen.range(inner, b);
      CHECK(jensen_bregman(g, a2, b2) <= jb + tol);
      double ex = 0.0, eg = 0.0, wt = 0.0;
      double pts[5], w[5];
      for (int k = 0; k < 5; ++k) {
        pts[k] = gen.range(a, b);
        w[k] = gen.unit() + 1e-9;
        wt += w[k];
      }
      for (int k = 0; k < 5; ++k) {
        ex += w[k] / wt * pts[k];
        eg += w[k] / wt * g.value(pts[k]);
      }
      CHECK(eg - g.value(ex) <= 2.0 * jb + tol);
    }
  }
}

TEST_CASE("grid triangle ratio is at least one half for squared and KL") {
  const TriangleRatio sq = c_approx_min_ratio(squared_generator(), 1e-2);
  CHECK(sq.ratio >= 0.5 - 1e-6);
  CHECK_THAT(sq.ratio, WithinAbs(0.5, 1e-9));  // midpoint of a symmetric pair
  CHECK(c_approx_min_ratio(negative_entropy_generator(), 1e-2).ratio >= 0.5 - 1e-6);
  CHECK_THROWS_AS(c_approx_min_ratio(squared_generator(), 0.5), Error);
}

TEST_CASE("G-tilde equals the brute-force maximum gap") {
  for (const BregmanGenerator& g : {squared_generator(), negative_entropy_generator(), power_generator(3.0)}) {
    const int n = 400;
    for (int k = 0; k <= 40; ++k) {
      const double x = k / 40.0;
      double best = 0.0;
      for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
          const double a = double(i) / n, b = double(j) / n;
          if (std::abs(a - b) <= x + 1e-12) best = std::max(best, g.value(a) - g.value(b));
        }
      }
      // The grid maximum can only undershoot the continuous one.
      CHECK(tilde_g(g, x) >= best - 1e-12);
      CHECK(tilde_g(g, x) <= best + 0.02);
    }
  }
  const BregmanGenerator sq = squared_generator();
  CHECK_THAT(tilde_g(sq, 0.3), WithinAbs(2 * 0.3 - 0.09, 1e-15));
}

TEST_CASE("envelope is concave, dominates G-tilde and is exact for concave G-tilde") {
  const EnvelopeTable sq = envelope(squared_generator());
  CHECK_THAT(sq.star(0.01), WithinAbs(0.0199, 1e-12));
  CHECK_THAT(sq.star(0.5), WithinAbs(0.75, 1e-12));
  for (const BregmanGenerator& g : {negative_entropy_generator(), power_generator(4.0)}) {
    const EnvelopeTable t = envelope(g, 501);
    for (std::size_t i = 0; i < t.gridX.size(); ++i) CHECK(t.tildeGStar[i] >= t.tildeG[i] - 1e-12);
    for (std::size_t i = 1; i + 1 < t.gridX.size(); ++i) {
      CHECK(t.tildeGStar[i] >= 0.5 * (t.tildeGStar[i - 1] + t.tildeGStar[i + 1]) - 1e-12);
    }
    Gen gen(9);
    for (int n = 0; n < 200; ++n) {
      const double x = gen.unit();
      CHECK(t.star(x) >= tilde_g(g, x) - 1e-15);
    }
  }
  CHECK_THROWS_AS(envelope(squared_generator(), 50), Error);
}

TEST_CASE("Pythagorean residual vanishes on random structures") {
  Gen gen(10);
  for (int n = 0; n < 100; ++n) {
    const auto s = validate_structure(random_raw(gen, gen.size(1, 6), gen.size(1, 6), 0.0, 1e-6, 1.0 - 1e-6));
    for (const BregmanGenerator& g : {squared_generator(), negative_entropy_generator()}) {
      CHECK(pythagorean_residual(s, g, s.full(), Side::Alice) <= 1e-10);
      CHECK(pythagorean_residual(s, g, s.full(), Side::Bob) <= 1e-10);
    }
  }
  const auto s = validate_structure(random_raw(gen, 3, 3));
  CHECK(pythagorean_residual(s, squared_generator(), Rectangle::cell(1, 1)) == 0.0);
}
