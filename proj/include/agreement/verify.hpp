#pragma once

// Built-in invariant suite behind `agreement_lab verify`.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "agreement/analysis.hpp"
#include "agreement/corpus.hpp"
#include "agreement/io.hpp"

namespace agreement {

struct VerifyCheck {
  std::string name;
  bool passed = true;
  std::size_t cases = 0;
  std::string detail;  // first failure, empty on success
};

namespace detail {

class CheckBuilder {
 public:
  explicit CheckBuilder(std::string name) { check_.name = std::move(name); }
  void expect(bool ok, const std::string& what) {
    ++check_.cases;
    if (!ok && check_.passed) {
      check_.passed = false;
      check_.detail = what;
    }
  }
  VerifyCheck done() { return std::move(check_); }

 private:
  VerifyCheck check_;
};

inline std::vector<BregmanGenerator> shipped_generators() {
  return {squared_generator(), negative_entropy_generator()};
}

inline VerifyCheck verify_divergence_facts(std::size_t instances) {
  CheckBuilder cb("divergence-facts");
  Rng rng(7);
  for (const BregmanGenerator& g : {squared_generator(), negative_entropy_generator(), power_generator(3.0)}) {
    for (std::size_t n = 0; n < instances; ++n) {
      double a = rng.uniform(), b = rng.uniform();
      if (a > b) std::swap(a, b);
      const double x = rng.uniform();
      const double inner = a + (b - a) * rng.uniform();
      const double a2 = a + (inner - a) * rng.uniform(), b2 = inner + (b - inner) * rng.uniform();
      const double jb = jensen_bregman(g, a, b);
      const double tol = 1e-12 * std::max(1.0, std::abs(jb));
      const std::string at = g.name() + " a=" + format_real(a) + " b=" + format_real(b);
      cb.expect(0.5 * (bregman(g, a, x) + bregman(g, b, x)) >= jb - tol, "fact (i) " + at);
      cb.expect(jensen_bregman(g, a, inner) + jensen_bregman(g, inner, b) <= jb + tol, "fact (ii) " + at);
      cb.expect(jensen_bregman(g, a2, b2) <= jb + tol, "fact (iii) " + at);
      double ex = 0.0, eg = 0.0, wsum = 0.0;
      std::vector<double> pts(5), w(5);
      for (std::size_t k = 0; k < 5; ++k) {
        pts[k] = a + (b - a) * rng.uniform();
        w[k] = rng.uniform() + 1e-6;
        wsum += w[k];
      }
      for (std::size_t k = 0; k < 5; ++k) {
        ex += w[k] / wsum * pts[k];
        eg += w[k] / wsum * g.value(pts[k]);
      }
      cb.expect(eg - g.value(ex) <= 2.0 * jb + tol, "fact (iv) " + at);
      const double m = 0.5 * (a + b);
      cb.expect(std::abs(jb - 0.5 * (bregman(g, a, m) + bregman(g, b, m))) <= 1e-12, "JB midpoint identity " + at);
    }
  }
  const BregmanGenerator sq = squared_generator();
  for (std::size_t n = 0; n < instances; ++n) {
    const double y = rng.uniform(), x = rng.uniform();
    cb.expect(std::abs(bregman(sq, y, x) - (y - x) * (y - x)) <= 1e-15, "squared divergence");
  }
  for (const BregmanGenerator& g : shipped_generators()) {
    cb.expect(c_approx_min_ratio(g).ratio >= 0.5 - 1e-6, "half-approximate triangle inequality for " + g.name());
  }
  return cb.done();
}

inline VerifyCheck verify_pythagorean(std::size_t structures) {
  CheckBuilder cb("pythagorean-residuals");
  Rng rng(11);
  for (std::size_t n = 0; n < structures; ++n) {
    const std::size_t m = 1 + rng.index(8), k = 1 + rng.index(8);
    const InformationStructure s = clamp_means(random_structure(m, k, 100 + n));
    for (const BregmanGenerator& g : shipped_generators()) {
      for (Side side : {Side::Alice, Side::Bob}) {
        const double r = pythagorean_residual(s, g, s.full(), side);
        cb.expect(r <= 1e-8, s.label() + " " + g.name() + " residual " + format_real(r));
      }
    }
  }
  return cb.done();
}

inline VerifyCheck verify_protocol_invariants(std::size_t structures) {
  CheckBuilder cb("protocol-invariants");
  for (std::size_t n = 0; n < structures; ++n) {
    const InformationStructure s = clamp_means(random_structure(5, 5, 300 + n));
    for (const BregmanGenerator& g : shipped_generators()) {
      for (ProtocolKind kind : {ProtocolKind::Standard, ProtocolKind::DiscQuad, ProtocolKind::DiscBregman,
                                ProtocolKind::Fast}) {
        if (kind == ProtocolKind::DiscQuad && g.name() != "squared") continue;
        const Transcript tr = run_protocol(s, kind, g, 0.1, 50);
        const Evolution& ev = tr.evolution;
        const std::string at = s.label() + " " + std::string(to_string(kind)) + " " + g.name();
        for (std::size_t t = 1; t <= ev.last(); ++t) {
          cb.expect(refines(ev.states[t], ev.states[t - 1]), "nesting " + at);
          const double drop = monovariant_decrease(s, g, ev.states[t - 1], ev.states[t]);
          const double excess =
              charlie_error_excess(s, g, ev.states[t - 1]) - charlie_error_excess(s, g, ev.states[t]);
          cb.expect(drop >= -1e-15, "monovariant sign " + at);
          cb.expect(std::abs(drop - excess) <= 1e-9 * std::max(1.0, std::abs(drop)), "monovariant identity " + at);
        }
        for (const ProtocolPartition& p : ev.states) {
          for (const Rectangle& block : p.blocks()) {
            const RectangleStats st = rectangle_stats(s, block);
            double w = 0.0;
            for (std::size_t i : block.rows) {
              for (std::size_t j : block.cols) w += s.prob(i, j) * s.mean(i, j);
            }
            cb.expect(std::abs(st.weighted - w) <= 1e-12, "Charlie consistency " + at);
          }
        }
        if (kind == ProtocolKind::DiscQuad || kind == ProtocolKind::DiscBregman) {
          cb.expect(tr.tEnd <= tr.horizon, "tEnd within horizon " + at);
          cb.expect(tr.bits == static_cast<std::uint64_t>(std::ceil(double(tr.tEnd) * std::log2(3.0) - 1e-9)),
                    "trit bit count " + at);
        }
        if (kind == ProtocolKind::Fast) {
          cb.expect(tr.tEnd == 2 && tr.bits == detail::fast_bits(0.1), "fast protocol shape " + at);
        }
      }
    }
  }
  return cb.done();
}

inline VerifyCheck verify_substitutes_closure(std::size_t structures) {
  CheckBuilder cb("substitutes-closure");
  const BregmanGenerator sq = squared_generator();
  for (std::size_t n = 0; n < structures; ++n) {
    for (const InformationStructure& s :
         {synthesize_substitutes(3, 3, 40 + n, sq).structure, random_structure(3, 3, 900 + n)}) {
      const SubstitutesReport rep = rectangle_check(s, sq, SubstitutesMode::Rectangle);
      CheckOptions transposed;
      transposed.orientation = Orientation::Transposed;
      const SubstitutesReport flipped = rectangle_check(s, sq, SubstitutesMode::Rectangle, transposed);
      cb.expect(rep.holds == flipped.holds, "transpose symmetry " + s.label());
      const DeltaEstimate d = delta_estimate(s, sq);
      cb.expect(d.exact && ((*d.exact <= 1e-10) == rep.holds), "exact delta zero iff substitutes " + s.label());
      if (rep.holds) {
        Rng rng(n);
        const Rectangle sub({0, 1 + rng.index(2)}, {rng.index(2), 2});
        if (mass(s, sub) > 0.0) {
          cb.expect(rectangle_check(restrict(s, sub), sq, SubstitutesMode::Rectangle).holds,
                    "restriction closure " + s.label());
        }
      }
    }
  }
  return cb.done();
}

inline VerifyCheck verify_canonical() {
  CheckBuilder cb("canonical-structures");
  const BregmanGenerator sq = squared_generator();
  const InformationStructure x = make_xor();
  const auto p0 = ProtocolPartition::initial(x);
  cb.expect(agreement_profile(x, p0, sq).quad == 0.0, "xor round-0 agreement");
  cb.expect(std::abs(accuracy_profile(x, p0, sq).aliceQuad - 0.25) <= 1e-12, "xor accuracy");
  const SubstitutesReport weak = rectangle_check(x, sq, SubstitutesMode::Weak);
  cb.expect(std::abs(weak.worstViolation - 0.25) <= 1e-12 && std::abs(weak.fullRhs) <= 1e-12, "xor weak violation");
  const InformationStructure a = make_appendix_a();
  cb.expect(rectangle_check(a, sq, SubstitutesMode::Weak).holds, "appendix-a weak substitutes");
  cb.expect(!rectangle_check(a, sq, SubstitutesMode::Rectangle).holds, "appendix-a rectangle substitutes fails");
  cb.expect(std::abs(accuracy_profile(a, ProtocolPartition::initial(a), sq).aliceQuad - 0.09) <= 1e-12,
            "appendix-a accuracy");
  return cb.done();
}

inline VerifyCheck verify_theorem_audits(std::size_t seeds) {
  CheckBuilder cb("theorem-audits");
  const BregmanGenerator sq = squared_generator();
  const BregmanGenerator kl = negative_entropy_generator();
  for (std::size_t n = 0; n < seeds; ++n) {
    const InformationStructure s = synthesize_substitutes(4, 4, n, sq).structure;
    for (ProtocolKind kind : {ProtocolKind::Standard, ProtocolKind::DiscQuad, ProtocolKind::Fast}) {
      const BoundReport r = audit_agreement_accuracy(s, sq, kind, 0.05);
      cb.expect(r.applicable && r.satisfied && r.continuedAgreementHolds && r.orderingsHold,
                "squared audit " + s.label() + " " + r.protocol);
    }
    const InformationStructure k = synthesize_substitutes(4, 4, n, kl).structure;
    for (ProtocolKind kind : {ProtocolKind::Standard, ProtocolKind::DiscBregman, ProtocolKind::Fast}) {
      const BoundReport r = audit_agreement_accuracy(k, kl, kind, 0.1);
      cb.expect(r.applicable && r.satisfied && r.orderingsHold, "kl audit " + k.label() + " " + r.protocol);
    }
    const InformationStructure b = random_boolean_substitutes_structure(4, 4, n);
    for (double delta : {0.5, 0.1}) {
      cb.expect(compute_boolean(b, delta).errorProbability <= delta, "boolean " + b.label());
    }
  }
  return cb.done();
}

}  // namespace detail

struct VerifyOptions {
  std::size_t scale = 1;  // multiplies instance counts
};

inline std::vector<VerifyCheck> run_verify_suite(const VerifyOptions& options = {}) {
  const std::size_t k = std::max<std::size_t>(1, options.scale);
  return {detail::verify_divergence_facts(2000 * k), detail::verify_pythagorean(50 * k),
          detail::verify_protocol_invariants(10 * k), detail::verify_substitutes_closure(10 * k),
          detail::verify_canonical(),              detail::verify_theorem_audits(20 * k)};
}

}  // namespace agreement
