#pragma once

// Command execution for the agreement_lab tool. Argument parsing lives in
// tools/agreement_lab.cpp; this header takes an already-parsed RunConfig.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "agreement/analysis.hpp"
#include "agreement/corpus.hpp"
#include "agreement/io.hpp"
#include "agreement/verify.hpp"

namespace agreement {

enum class Command { Gen, Run, Check, Audit, Sweep, Verify };

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitInvalidInput = 2;

struct RunConfig {
  Command command = Command::Verify;
  std::string structurePath;
  std::string protocol = "disc-quad";
  std::string generator = "squared";
  double epsilon = 0.1;
  double delta = 0.1;
  std::vector<std::uint64_t> seeds{0};
  std::vector<double> epsilons;
  std::vector<std::string> protocols;
  std::string outPath;  // JSON or structure output; stdout when empty
  std::string csvPath;  // CSV output, if any
  bool noTimestamp = false;

  // gen / sweep
  std::string kind = "random";
  std::size_t rows = 4;
  std::size_t cols = 4;
  std::optional<double> mixWeight;

  // check
  std::string mode = "rectangle";
  double tolerance = 1e-10;
  std::size_t maxSide = 12;
  std::size_t exactLimit = 9;
  bool transposed = false;

  // run / audit
  std::size_t maxRounds = 200;
  double c = 0.5;
  std::optional<double> beta;
  bool boolean = false;

  std::size_t verifyScale = 1;
};

/// Rejects values that no command could use.
inline void validate_config(const RunConfig& cfg) {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidInput, what); };
  if (!(cfg.epsilon > 0.0) || !std::isfinite(cfg.epsilon)) bad("--epsilon must be a positive number");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) bad("--delta must lie in (0, 1)");
  if (!(cfg.tolerance >= 0.0)) bad("--tolerance must be nonnegative");
  if (!(cfg.c > 0.0 && cfg.c < 1.0)) bad("--c must lie in (0, 1)");
  if (cfg.beta && !(*cfg.beta > 0.0)) bad("--beta must be positive");
  if (cfg.rows == 0 || cfg.cols == 0) bad("--rows and --cols must be at least 1");
  if (cfg.maxRounds == 0) bad("--max-rounds must be at least 1");
  for (double e : cfg.epsilons) {
    if (!(e > 0.0) || !std::isfinite(e)) bad("sweep epsilons must be positive");
  }
  generator_by_name(cfg.generator);
  protocol_kind_from_string(cfg.protocol);
  for (const std::string& p : cfg.protocols) protocol_kind_from_string(p);
  substitutes_mode_from_string(cfg.mode);
  corpus_kind_from_string(cfg.kind);
  const bool needsStructure = cfg.command == Command::Run || cfg.command == Command::Check ||
                              cfg.command == Command::Audit;
  if (needsStructure && cfg.structurePath.empty()) bad("--structure is required");
}

/// Worker count: hardware concurrency, capped by AGREEMENT_LAB_THREADS.
inline std::size_t worker_count() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("AGREEMENT_LAB_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) n = std::min<std::size_t>(n, static_cast<std::size_t>(cap));
  }
  return n;
}

namespace detail {

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void emit_json(const RunConfig& cfg, Json doc, std::ostream& out) {
  if (!cfg.noTimestamp) doc["generatedAt"] = utc_timestamp();
  const std::string text = doc.dump(2) + "\n";
  if (cfg.outPath.empty()) {
    out << text;
  } else {
    write_text_file(cfg.outPath, text);
  }
}

inline GeneratorSpec spec_from_config(const RunConfig& cfg, std::uint64_t seed) {
  GeneratorSpec spec;
  spec.kind = corpus_kind_from_string(cfg.kind);
  spec.rows = cfg.rows;
  spec.cols = cfg.cols;
  spec.seed = seed;
  spec.mixWeight = cfg.mixWeight;
  spec.generator = cfg.generator;
  return spec;
}

inline AuditOptions audit_options(const RunConfig& cfg) {
  AuditOptions opt;
  opt.maxRounds = cfg.maxRounds;
  opt.c = cfg.c;
  opt.beta = cfg.beta;
  opt.exactLimit = cfg.exactLimit;
  opt.check.tolerance = cfg.tolerance;
  opt.check.maxSide = cfg.maxSide;
  return opt;
}

inline int cmd_gen(const RunConfig& cfg, std::ostream& out) {
  const InformationStructure s = generate(spec_from_config(cfg, cfg.seeds.front()));
  if (cfg.outPath.empty()) {
    out << structure_to_json(s).dump(2) << "\n";
  } else {
    write_structure(cfg.outPath, s);
  }
  return kExitOk;
}

inline int cmd_run(const RunConfig& cfg, std::ostream& out) {
  const InformationStructure s = read_structure(cfg.structurePath);
  const BregmanGenerator g = generator_by_name(cfg.generator);
  const Transcript tr = run_protocol(s, protocol_kind_from_string(cfg.protocol), g, cfg.epsilon, cfg.maxRounds);
  Json doc = transcript_to_json(tr);
  doc["label"] = s.label();
  emit_json(cfg, std::move(doc), out);
  if (!cfg.csvPath.empty()) write_text_file(cfg.csvPath, trace_csv(tr));
  return kExitOk;
}

inline int cmd_check(const RunConfig& cfg, std::ostream& out) {
  const InformationStructure s = read_structure(cfg.structurePath);
  const BregmanGenerator g = generator_by_name(cfg.generator);
  const SubstitutesMode mode = substitutes_mode_from_string(cfg.mode);
  Json doc;
  doc["label"] = s.label();
  bool holds = true;
  if (mode == SubstitutesMode::Delta) {
    const DeltaEstimate d = delta_estimate(s, g, cfg.exactLimit, cfg.maxSide);
    doc["mode"] = "delta";
    doc["generator"] = g.name();
    doc["delta"] = delta_estimate_to_json(d);
    holds = d.exact.value_or(d.lowerBound) <= cfg.tolerance;
    doc["holds"] = holds;
  } else {
    CheckOptions opt;
    opt.tolerance = cfg.tolerance;
    opt.maxSide = cfg.maxSide;
    opt.orientation = cfg.transposed ? Orientation::Transposed : Orientation::Standard;
    const SubstitutesReport rep = rectangle_check(s, g, mode, opt);
    doc.update(substitutes_report_to_json(rep));
    holds = rep.holds;
  }
  emit_json(cfg, std::move(doc), out);
  return holds ? kExitOk : kExitCheckFailed;
}

inline int cmd_audit(const RunConfig& cfg, std::ostream& out) {
  const InformationStructure s = read_structure(cfg.structurePath);
  if (cfg.boolean) {
    const BooleanResult b = compute_boolean(s, cfg.delta);
    Json doc{{"label", s.label()},
             {"delta", cfg.delta},
             {"epsilon", real_json(b.epsilon)},
             {"errorProbability", real_json(b.errorProbability)},
             {"bits", b.bits},
             {"tieRule", "0.5 rounds to 1"}};
    emit_json(cfg, std::move(doc), out);
    return kExitOk;
  }
  const BregmanGenerator g = generator_by_name(cfg.generator);
  const BoundReport rep =
      audit_agreement_accuracy(s, g, protocol_kind_from_string(cfg.protocol), cfg.epsilon, audit_options(cfg));
  emit_json(cfg, bound_report_to_json(rep), out);
  if (!cfg.csvPath.empty()) write_text_file(cfg.csvPath, std::string(kAuditCsvHeader) + "\n" + audit_csv_row(rep) + "\n");
  return rep.applicable && !(rep.satisfied && rep.continuedAgreementHolds) ? kExitCheckFailed : kExitOk;
}

struct SweepCell {
  std::uint64_t seed;
  double epsilon;
  std::string protocol;
};

inline int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  const BregmanGenerator g = generator_by_name(cfg.generator);
  const std::vector<double> epsilons = cfg.epsilons.empty() ? std::vector<double>{cfg.epsilon} : cfg.epsilons;
  const std::vector<std::string> protocols =
      cfg.protocols.empty() ? std::vector<std::string>{cfg.protocol} : cfg.protocols;
  std::vector<SweepCell> cells;
  for (std::uint64_t seed : cfg.seeds) {
    for (double e : epsilons) {
      for (const std::string& p : protocols) cells.push_back({seed, e, p});
    }
  }
  std::vector<std::optional<BoundReport>> results(cells.size());
  std::vector<std::string> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < cells.size(); k = next++) {
      try {
        const InformationStructure s = generate(spec_from_config(cfg, cells[k].seed));
        results[k] = audit_agreement_accuracy(s, g, protocol_kind_from_string(cells[k].protocol), cells[k].epsilon,
                                              audit_options(cfg));
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t workers = std::min(worker_count(), std::max<std::size_t>(1, cells.size()));
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (std::thread& t : pool) t.join();

  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (!errors[k].empty()) {
      throw Error(ErrorCode::InvalidInput, "seed " + std::to_string(cells[k].seed) + ": " + errors[k]);
    }
  }
  // Rows are written in (seed, epsilon, protocol) order regardless of which
  // worker finished first.
  std::vector<std::size_t> order(cells.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (cells[a].seed != cells[b].seed) return cells[a].seed < cells[b].seed;
    if (cells[a].epsilon != cells[b].epsilon) return cells[a].epsilon < cells[b].epsilon;
    return cells[a].protocol < cells[b].protocol;
  });
  std::string csv = std::string(kAuditCsvHeader) + "\n";
  bool failed = false;
  for (std::size_t k : order) {
    csv += audit_csv_row(*results[k]) + "\n";
    if (results[k]->applicable && !results[k]->satisfied) failed = true;
  }
  if (cfg.csvPath.empty() && cfg.outPath.empty()) {
    out << csv;
  } else {
    write_text_file(cfg.csvPath.empty() ? cfg.outPath : cfg.csvPath, csv);
  }
  return failed ? kExitCheckFailed : kExitOk;
}

inline int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  VerifyOptions opt;
  opt.scale = cfg.verifyScale;
  const std::vector<VerifyCheck> checks = run_verify_suite(opt);
  bool all = true;
  Json list = Json::array();
  for (const VerifyCheck& c : checks) {
    all = all && c.passed;
    list.push_back({{"name", c.name}, {"passed", c.passed}, {"cases", c.cases}, {"detail", c.detail}});
    if (!cfg.outPath.empty()) {
      out << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << " (" << c.cases << " cases)"
          << (c.detail.empty() ? "" : ": " + c.detail) << "\n";
    }
  }
  emit_json(cfg, Json{{"passed", all}, {"checks", std::move(list)}}, out);
  return all ? kExitOk : kExitCheckFailed;
}

}  // namespace detail

/// Runs one command. Library errors on bad input map to exit status 2;
/// failed checks and audits map to 1.
inline int execute(const RunConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    validate_config(cfg);
    switch (cfg.command) {
      case Command::Gen: return detail::cmd_gen(cfg, out);
      case Command::Run: return detail::cmd_run(cfg, out);
      case Command::Check: return detail::cmd_check(cfg, out);
      case Command::Audit: return detail::cmd_audit(cfg, out);
      case Command::Sweep: return detail::cmd_sweep(cfg, out);
      case Command::Verify: return detail::cmd_verify(cfg, out);
    }
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }
  return kExitInvalidInput;
}

}  // namespace agreement
