#include <catch_amalgamated.hpp>

#include "agreement/protocol.hpp"
#include "support.hpp"

using namespace agreement;
using namespace testing_support;
using Catch::Matchers::WithinAbs;

namespace {

std::vector<Block> blocks_of(const ProtocolPartition& p) {
  std::vector<Block> out;
  for (const Rectangle& r : p.blocks()) out.push_back({r.rows, r.cols});
  return out;
}

double oracle_quad(const InformationStructure& s, const ProtocolPartition& p) {
  const OracleBeliefs ob = oracle_beliefs(s, blocks_of(p));
  double total = 0.0;
  for (std::size_t i = 0; i < s.rows(); ++i) {
    for (std::size_t j = 0; j < s.cols(); ++j) {
      if (s.prob(i, j) > 0.0) total += s.prob(i, j) * sq_div(ob.alice[i][j], ob.bob[i][j]);
    }
  }
  return 0.25 * total;
}

/// Speaker's own belief (cell-wise) before round t, and the block mean.
void check_locality(const InformationStructure& s, const Evolution& ev,
                    const std::function<double(double, double)>& expected) {
  for (std::size_t t = 1; t <= ev.messages.size(); ++t) {
    const ProtocolPartition& before = ev.states[t - 1];
    const OracleBeliefs ob = oracle_beliefs(s, blocks_of(before));
    const bool alice = before.speaker_next() == Party::Alice;
    for (std::size_t i = 0; i < s.rows(); ++i) {
      for (std::size_t j = 0; j < s.cols(); ++j) {
        if (s.prob(i, j) == 0.0) continue;
        const double own = alice ? ob.alice[i][j] : ob.bob[i][j];
        CHECK(message_at(ev, t, i, j) == expected(own, ob.charlie[i][j]));
      }
    }
    // Every block of the next state lies in one block of this state and
    // splits only along the speaker's side.
    for (const Rectangle& r : ev.states[t].blocks()) {
      const Rectangle& parent = before.blocks()[before.block_of(r.rows.front(), r.cols.front())];
      CHECK((alice ? r.cols == parent.cols : r.rows == parent.rows));
    }
  }
}

}  // namespace

TEST_CASE("disc-quad messages are trits of the speaker's block belief") {
  Gen gen(41);
  for (int trial = 0; trial < 40; ++trial) {
    const InformationStructure s = random_structure(gen, 6, 0.1);
    const double eps = gen.range(0.01, 0.2);
    const Transcript tr = run_discretized_quadratic(s, eps);
    check_locality(s, tr.evolution, [eps](double e, double c) {
      if (e < c - eps / 4.0) return kLow;
      if (e > c + eps / 4.0) return kHigh;
      return kMedium;
    });
  }
}

TEST_CASE("fast rounding messages are nearest multiples of epsilon") {
  Gen gen(42);
  for (int trial = 0; trial < 40; ++trial) {
    const InformationStructure s = random_structure(gen, 6, 0.1);
    const double eps = gen.coin() ? 0.1 : 0.05;
    const Transcript tr = run_fast_rounding(s, eps);
    CHECK(tr.tEnd == 2);
    CHECK(tr.evolution.messages.size() == 2);
    check_locality(s, tr.evolution, [eps](double e, double) { return eps * std::floor(e / eps + 0.5 + 1e-9); });
  }
}

TEST_CASE("stopping round is the first minimizer of expected disagreement") {
  Gen gen(43);
  for (int trial = 0; trial < 60; ++trial) {
    const InformationStructure s = random_structure(gen, 6);
    const double eps = std::vector<double>{0.1, 0.05, 0.01}[gen.size(0, 2)];
    const Transcript tr = run_discretized_quadratic(s, eps);
    const Evolution& ev = tr.evolution;
    std::size_t best = 0;
    double bestValue = oracle_quad(s, ev.states[0]);
    for (std::size_t t = 1; t <= ev.last(); ++t) {
      const double v = oracle_quad(s, ev.states[t]);
      if (v < bestValue) {
        best = t;
        bestValue = v;
      }
    }
    CHECK(tr.tEnd == best);
    CHECK(tr.tEnd <= static_cast<std::size_t>(std::ceil(1000.0 / eps)));
    CHECK(bestValue <= eps + 1e-15);
    CHECK(tr.bits == static_cast<std::uint64_t>(std::ceil(double(tr.tEnd) * std::log2(3.0) - 1e-9)));
    CHECK(compute_t_end(s, ProtocolKind::DiscQuad, nullptr, eps) == tr.tEnd);
    for (std::size_t t = 1; t <= ev.last(); ++t) CHECK(refines(ev.states[t], ev.states[t - 1]));
  }
}

TEST_CASE("disc-quad horizon and bits at the standard epsilons") {
  CHECK(disc_quadratic_horizon(0.1) == 10000);
  CHECK(disc_quadratic_horizon(0.05) == 20000);
  CHECK(disc_quadratic_horizon(0.01) == 100000);
  CHECK(disc_bregman_horizon(squared_generator(), 0.2) == 2520);  // 24 * 4.2 / 0.04
}

TEST_CASE("identical signals agree immediately") {
  const std::vector<double> dist{0.2, 0.3, 0.5};
  const std::vector<double> values{0.1, 0.7, 0.4};
  RawStructure raw{3, 3, Matrix(3, std::vector<double>(3, 0.0)), Matrix(3, std::vector<double>(3, 0.0)), "id"};
  for (std::size_t i = 0; i < 3; ++i) {
    raw.prob[i][i] = dist[i];
    raw.mean[i][i] = values[i];
  }
  const InformationStructure s = validate_structure(raw);
  const Transcript dq = run_discretized_quadratic(s, 0.05);
  CHECK(dq.tEnd == 0);
  CHECK(dq.bits == 0);
  const Transcript st = run_standard(s, 10);
  CHECK(st.tEnd == 0);
  CHECK(st.stopReason == "agreement");
}

TEST_CASE("standard protocol reaches exact agreement or a fixed point") {
  Gen gen(44);
  for (int trial = 0; trial < 40; ++trial) {
    const InformationStructure s = random_structure(gen, 5);
    const Transcript tr = run_standard(s, 200);
    CHECK(tr.bits == 64 * tr.tEnd);
    const ProtocolPartition& fin = tr.final_state();
    if (tr.stopReason == "agreement") {
      const OracleBeliefs ob = oracle_beliefs(s, blocks_of(fin));
      for (std::size_t i = 0; i < s.rows(); ++i) {
        for (std::size_t j = 0; j < s.cols(); ++j) CHECK(std::abs(ob.alice[i][j] - ob.bob[i][j]) <= 1e-12);
      }
    } else {
      CHECK(tr.stopReason == "fixed-point");
    }
  }
  CHECK_THROWS_AS(run_standard(random_structure(gen, 3), 0), Error);
}

TEST_CASE("Bregman protocol: tEnd within horizon and the monovariant decreases") {
  Gen gen(45);
  const BregmanGenerator kl = negative_entropy_generator();
  for (int trial = 0; trial < 30; ++trial) {
    const auto s = validate_structure(random_raw(gen, 5, 5, 0.0, 1e-6, 1.0 - 1e-6));
    const double eps = gen.coin() ? 0.2 : 0.1;
    const Transcript tr = run_discretized_bregman(s, kl, eps);
    CHECK(tr.tEnd <= disc_bregman_horizon(kl, eps));
    for (const TraceRow& row : tr.trace) CHECK(row.monovariantDrop >= 0.0);
    CHECK(tr.trace.back().agreementJB <= eps);
  }
}

TEST_CASE("epsilon out of range is rejected") {
  Gen gen(46);
  const InformationStructure s = random_structure(gen, 3);
  for (double bad : {0.0, -0.1, 1.0, std::nan("")}) {
    CHECK_THROWS_AS(run_discretized_quadratic(s, bad), Error);
  }
  CHECK_THROWS_AS(run_fast_rounding(s, 0.6), Error);
  CHECK_THROWS_AS(run_discretized_bregman(s, squared_generator(), 0.0), Error);
  CHECK_THROWS_AS(protocol_kind_from_string("gossip"), Error);
  CHECK(protocol_kind_from_string("disc-bregman") == ProtocolKind::DiscBregman);
}

TEST_CASE("boundary values speak medium") {
  // 0.625 - 0.5 and 0.5 / 4 are both exactly 0.125 in binary.
  CHECK(detail::trit_quadratic(0.5)(0.625, 0.5).value == kMedium);
  CHECK(detail::trit_quadratic(0.5)(0.375, 0.5).value == kMedium);
  CHECK(detail::trit_quadratic(0.5)(0.6251, 0.5).value == kHigh);
  CHECK(detail::trit_quadratic(0.1)(0.25, 0.5).value == kLow);
}
