#pragma once

// JSON and CSV encodings of structures, transcripts and reports.
//
// Reals are written with 17 significant digits through std::to_chars, so the
// output does not depend on the C locale. JSON has no literal for infinity or
// NaN; those are written as the strings "inf", "-inf" and "nan".

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <system_error>

#include <nlohmann/json.hpp>

#include "agreement/analysis.hpp"
#include "agreement/protocol.hpp"
#include "agreement/structure.hpp"
#include "agreement/substitutes.hpp"

namespace agreement {

using Json = nlohmann::ordered_json;

inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline Json real_json(double v) {
  if (std::isfinite(v)) return v;
  return format_real(v);
}

inline Json optional_real_json(const std::optional<double>& v) { return v ? real_json(*v) : Json(nullptr); }

inline Json rectangle_json(const Rectangle& r) { return Json{{"rows", r.rows}, {"cols", r.cols}}; }

// ---------------------------------------------------------------------------
// Structures
// ---------------------------------------------------------------------------

inline Json structure_to_json(const InformationStructure& s) {
  const RawStructure raw = s.raw();
  Json out;
  out["rows"] = raw.rows;
  out["cols"] = raw.cols;
  out["prob"] = raw.prob;
  out["mean"] = raw.mean;
  out["label"] = raw.label;
  return out;
}

namespace detail {
inline std::vector<std::vector<double>> matrix_from_json(const Json& j, const char* name) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidInput, std::string(name) + " must be an array of rows");
  std::vector<std::vector<double>> out;
  for (const Json& row : j) {
    if (!row.is_array()) throw Error(ErrorCode::InvalidInput, std::string(name) + " rows must be arrays");
    std::vector<double> r;
    for (const Json& v : row) {
      if (!v.is_number()) throw Error(ErrorCode::InvalidInput, std::string(name) + " entries must be numbers");
      r.push_back(v.get<double>());
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline std::size_t count_from_json(const Json& j, const char* name) {
  if (!j.is_number_unsigned()) throw Error(ErrorCode::InvalidInput, std::string(name) + " must be a nonnegative integer");
  return j.get<std::size_t>();
}
}  // namespace detail

/// Parses {"rows", "cols", "prob", "mean", "label"}; "label" is optional and
/// any other key is rejected.
inline RawStructure raw_structure_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidInput, "structure must be a JSON object");
  static const std::set<std::string> known{"rows", "cols", "prob", "mean", "label"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw Error(ErrorCode::InvalidInput, "unknown key '" + key + "' in structure");
  }
  for (const char* key : {"rows", "cols", "prob", "mean"}) {
    if (!j.contains(key)) throw Error(ErrorCode::InvalidInput, std::string("structure is missing '") + key + "'");
  }
  RawStructure raw;
  raw.rows = detail::count_from_json(j.at("rows"), "rows");
  raw.cols = detail::count_from_json(j.at("cols"), "cols");
  raw.prob = detail::matrix_from_json(j.at("prob"), "prob");
  raw.mean = detail::matrix_from_json(j.at("mean"), "mean");
  if (j.contains("label")) {
    if (!j.at("label").is_string()) throw Error(ErrorCode::InvalidInput, "label must be a string");
    raw.label = j.at("label").get<std::string>();
  }
  return raw;
}

inline InformationStructure structure_from_json(const Json& j) { return validate_structure(raw_structure_from_json(j)); }

inline Json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidInput, origin + ": " + e.what());
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + path);
  out << text;
}

inline InformationStructure read_structure(const std::string& path) {
  return structure_from_json(parse_json_text(read_text_file(path), path));
}

inline void write_structure(const std::string& path, const InformationStructure& s) {
  write_text_file(path, structure_to_json(s).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Transcripts
// ---------------------------------------------------------------------------

inline Json transcript_to_json(const Transcript& tr) {
  Json out;
  out["protocol"] = std::string(to_string(tr.kind));
  out["epsilon"] = real_json(tr.epsilon);
  out["generator"] = tr.generatorName;
  out["tEnd"] = tr.tEnd;
  out["bits"] = tr.bits;
  out["horizon"] = tr.horizon;
  out["messageAlphabet"] = tr.messageAlphabet;
  out["stopReason"] = tr.stopReason;
  out["fixedPoint"] = tr.evolution.fixedPoint ? Json(*tr.evolution.fixedPoint) : Json(nullptr);
  out["infiniteDivergenceMessages"] = tr.evolution.infiniteDivergenceMessages;
  Json trace = Json::array();
  for (const TraceRow& row : tr.trace) {
    trace.push_back({{"round", row.round},
                     {"agreementQuad", real_json(row.agreementQuad)},
                     {"agreementJB", real_json(row.agreementJB)},
                     {"monovariantDrop", real_json(row.monovariantDrop)}});
  }
  out["trace"] = std::move(trace);
  Json rounds = Json::array();
  for (const RoundRecord& rec : tr.rounds) {
    Json msgs = Json::array();
    for (const BlockMessage& m : rec.messages) {
      Json values = Json::array();
      for (double v : m.values) values.push_back(std::isnan(v) ? Json(nullptr) : real_json(v));
      msgs.push_back({{"block", m.block}, {"lines", m.lines}, {"values", std::move(values)}});
    }
    rounds.push_back({{"round", rec.round}, {"speaker", std::string(to_string(rec.speaker))}, {"messages", msgs}});
  }
  out["rounds"] = std::move(rounds);
  return out;
}

inline std::string trace_csv(const Transcript& tr) {
  std::string out = "round,agreementQuad,agreementJB,monovariantDrop\n";
  for (const TraceRow& row : tr.trace) {
    out += std::to_string(row.round) + "," + format_real(row.agreementQuad) + "," + format_real(row.agreementJB) +
           "," + format_real(row.monovariantDrop) + "\n";
  }
  return out;
}

/// One row per state 0..tEnd with the full agreement and accuracy profiles.
inline std::string profile_csv(const InformationStructure& s, const Transcript& tr, const BregmanGenerator& g) {
  std::string out =
      "round,quad,jb,withCharlie,symmetrized,aliceQuad,bobQuad,aliceBregman,bobBregman,midpoint\n";
  for (std::size_t t = 0; t <= tr.tEnd; ++t) {
    const ProtocolPartition& p = tr.evolution.state(t);
    const AgreementProfile ag = agreement_profile(s, p, g);
    const AccuracyProfile ac = accuracy_profile(s, p, g);
    out += std::to_string(t);
    for (double v : {ag.quad, ag.jb, ag.withCharlie, ag.symmetrized, ac.aliceQuad, ac.bobQuad, ac.aliceBregman,
                     ac.bobBregman, ac.midpoint}) {
      out += "," + format_real(v);
    }
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline Json substitutes_report_to_json(const SubstitutesReport& r) {
  Json out;
  out["mode"] = std::string(to_string(r.mode));
  out["generator"] = r.generator;
  out["holds"] = r.holds;
  out["worstViolation"] = real_json(r.worstViolation);
  out["worstLhs"] = real_json(r.worstLhs);
  out["worstRhs"] = real_json(r.worstRhs);
  out["worstRect"] = r.worstRect ? rectangle_json(*r.worstRect) : Json(nullptr);
  out["fullLhs"] = real_json(r.fullLhs);
  out["fullRhs"] = real_json(r.fullRhs);
  out["rectanglesChecked"] = r.rectanglesChecked;
  out["tolerance"] = r.tolerance;
  return out;
}

inline Json delta_estimate_to_json(const DeltaEstimate& d) {
  Json out;
  out["lowerBound"] = real_json(d.lowerBound);
  out["lowerBoundRect"] = d.lowerBoundRect ? rectangle_json(*d.lowerBoundRect) : Json(nullptr);
  out["exact"] = optional_real_json(d.exact);
  out["partitionsEnumerated"] = d.partitionsEnumerated;
  return out;
}

inline Json bound_report_to_json(const BoundReport& r) {
  Json out;
  out["label"] = r.label;
  out["protocol"] = r.protocol;
  out["generator"] = r.generator;
  out["epsilonTarget"] = real_json(r.epsilonTarget);
  out["epsilonMeasured"] = real_json(r.epsilonMeasured);
  out["accuracyAlice"] = real_json(r.accuracyAlice);
  out["accuracyBob"] = real_json(r.accuracyBob);
  out["accuracyMeasured"] = real_json(r.accuracyMeasured);
  out["boundValue"] = real_json(r.boundValue);
  out["boundKind"] = r.boundKind;
  out["satisfied"] = r.satisfied;
  out["vacuous"] = r.vacuous;
  out["applicable"] = r.applicable;
  Json params = Json::object();
  for (const auto& [k, v] : r.parameters) params[k] = real_json(v);
  out["parameters"] = std::move(params);
  out["deltaLowerBound"] = real_json(r.deltaLowerBound);
  out["deltaExact"] = optional_real_json(r.deltaExact);
  out["bits"] = r.bits;
  out["tEnd"] = r.tEnd;
  out["continuedAgreementHolds"] = r.continuedAgreementHolds;
  out["continuedAgreementWorst"] = real_json(r.continuedAgreementWorst);
  out["orderingsHold"] = r.orderingsHold;
  return out;
}

inline constexpr const char* kAuditCsvHeader =
    "label,protocol,generator,epsilonTarget,epsilonMeasured,accuracyAlice,accuracyBob,bound,satisfied,vacuous,bits,"
    "tEnd,deltaLowerBound";

namespace detail {
inline std::string csv_field(const std::string& v) {
  if (v.find_first_of(",\"\n") == std::string::npos) return v;
  std::string out = "\"";
  for (char ch : v) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}
}  // namespace detail

inline std::string audit_csv_row(const BoundReport& r) {
  return detail::csv_field(r.label) + "," + r.protocol + "," + r.generator + "," + format_real(r.epsilonTarget) + "," +
         format_real(r.epsilonMeasured) + "," + format_real(r.accuracyAlice) + "," + format_real(r.accuracyBob) + "," +
         format_real(r.boundValue) + "," + (r.satisfied ? "true" : "false") + "," + (r.vacuous ? "true" : "false") +
         "," + std::to_string(r.bits) + "," + std::to_string(r.tEnd) + "," + format_real(r.deltaLowerBound);
}

}  // namespace agreement
