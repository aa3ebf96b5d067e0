#pragma once

// File formats: density JSON, trace CSV/JSON, verification report JSON,
// sampler consistency JSON and draws CSV. Infinity is written as the
// string "inf" and absent optional fields as null (JSON) or empty (CSV).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "da_entropy/da_engine.hpp"
#include "da_entropy/diagnostics.hpp"
#include "da_entropy/dist_core.hpp"
#include "da_entropy/errors.hpp"
#include "da_entropy/ext_real.hpp"
#include "da_entropy/mc_sampler.hpp"

namespace daent {

using json = nlohmann::json;

class IoError : public Error {
 public:
  using Error::Error;
};

inline json to_json_value(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}
inline json to_json_value(ExtReal v) {
  if (v.is_infinite()) return "inf";
  return v.value();
}

// {"nx": int, "ny": int, "w": [[...], ...]} with rows indexed by X.
inline json density_to_json(const JointDensity& p) {
  json rows = json::array();
  for (std::size_t i = 0; i < p.nx(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < p.ny(); ++j) row.push_back(p(i, j));
    rows.push_back(std::move(row));
  }
  return json{{"nx", p.nx()}, {"ny", p.ny()}, {"w", std::move(rows)}};
}

/// Weights may be unnormalized; they are divided by their total.
inline JointDensity density_from_json(const json& j) {
  try {
    const auto nx = j.at("nx").get<long long>();
    const auto ny = j.at("ny").get<long long>();
    if (nx < 1 || ny < 1) throw InvalidDensity("density JSON: nx and ny must be >= 1");
    const json& rows = j.at("w");
    if (!rows.is_array() || rows.size() != static_cast<std::size_t>(nx)) {
      throw DimensionMismatch("density JSON: w must have nx rows");
    }
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(nx * ny));
    for (const json& row : rows) {
      if (!row.is_array() || row.size() != static_cast<std::size_t>(ny)) {
        throw DimensionMismatch("density JSON: every row of w must have ny entries");
      }
      for (const json& v : row) {
        if (!v.is_number()) throw InvalidDensity("density JSON: non-numeric weight");
        w.push_back(v.get<double>());
      }
    }
    return JointDensity::normalize(static_cast<std::size_t>(nx), static_cast<std::size_t>(ny),
                                   std::move(w));
  } catch (const json::exception& e) {
    throw IoError(std::string("density JSON: ") + e.what());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline JointDensity load_density(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return density_from_json(j);
}

/// Writes to a sibling temporary and renames it over the destination.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << contents;
    if (!out.flush()) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline constexpr const char* kTraceCsvHeader =
    "t,d_to_target,tv_to_target,d_step,lemma1_residual,renorm_drift";

inline std::string trace_to_csv(const DATrace& trace) {
  std::string out = kTraceCsvHeader;
  out += '\n';
  for (const TraceRecord& r : trace.records()) {
    out += std::to_string(r.t);
    out += ',';
    out += r.d_to_target.to_string();
    out += ',';
    out += format_real(r.tv_to_target);
    out += ',';
    if (r.d_step) out += r.d_step->to_string();
    out += ',';
    if (r.lemma1_residual) out += format_real(*r.lemma1_residual);
    out += ',';
    out += format_real(r.renorm_drift);
    out += '\n';
  }
  return out;
}

inline json trace_to_json(const DATrace& trace) {
  json records = json::array();
  for (const TraceRecord& r : trace.records()) {
    records.push_back(json{
        {"t", r.t},
        {"d_to_target", to_json_value(r.d_to_target)},
        {"tv_to_target", to_json_value(r.tv_to_target)},
        {"d_step", r.d_step ? to_json_value(*r.d_step) : json(nullptr)},
        {"lemma1_residual", r.lemma1_residual ? to_json_value(*r.lemma1_residual) : json(nullptr)},
        {"renorm_drift", to_json_value(r.renorm_drift)},
    });
  }
  return json{{"stop_reason", to_string(trace.stop_reason())},
              {"final_t", trace.final_t()},
              {"retain", trace.retention().to_string()},
              {"records", std::move(records)}};
}

inline json report_to_json(const LemmaReport& r) {
  return json{
      {"name", to_string(r.name)},
      {"t", r.t},
      {"n", r.n ? json(*r.n) : json(nullptr)},
      {"lhs", to_json_value(r.lhs)},
      {"rhs", to_json_value(r.rhs)},
      {"kind", r.identity ? "identity" : "inequality"},
      {"residual_or_slack", to_json_value(r.residual_or_slack)},
      {"tolerance", to_json_value(r.tolerance)},
      {"pass", r.pass},
      {"infinite", r.infinite},
      {"note", r.note},
  };
}

inline json verification_to_json(const std::vector<LemmaReport>& reports) {
  json list = json::array();
  for (const auto& r : reports) list.push_back(report_to_json(r));
  const ReportSummary s = summarize(reports);
  json worst = json::object();
  for (const auto& [name, v] : s.worst_residual_by_lemma) worst[name] = to_json_value(v);
  return json{{"reports", std::move(list)},
              {"summary",
               {{"checks_run", s.checks_run},
                {"passes", s.passes},
                {"failures", s.failures},
                {"worst_residual_by_lemma", std::move(worst)}}}};
}

inline json consistency_to_json(const std::vector<ConsistencyEntry>& entries, std::size_t replicas,
                                std::uint64_t seed, bool asserted) {
  json list = json::array();
  for (const auto& e : entries) {
    list.push_back(json{{"t", e.t},
                        {"tv", e.tv},
                        {"scale", e.scale},
                        {"bound", 5.0 * e.scale},
                        {"within_bound", e.within_bound()}});
  }
  return json{{"replicas", replicas}, {"seed", seed}, {"asserted", asserted}, {"times", std::move(list)}};
}

inline std::string draws_to_csv(const ChainDraws& draws) {
  std::string out = "replica,t,x,y\n";
  for (std::size_t r = 0; r < draws.replicas(); ++r) {
    for (std::size_t t = 0; t <= draws.half_steps(); ++t) {
      const Cell c = draws.at(r, t);
      out += std::to_string(r) + ',' + std::to_string(t) + ',' + std::to_string(c.x) + ',' +
             std::to_string(c.y) + '\n';
    }
  }
  return out;
}

}  // namespace daent
