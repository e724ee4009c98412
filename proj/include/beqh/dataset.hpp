#pragma once

#include <unistd.h>

#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "beqh/core.hpp"
#include "beqh/metrics.hpp"
#include "beqh/normalize.hpp"

namespace beqh::dataset {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// --- files ------------------------------------------------------------------------

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never observe a partial file.
inline void write_atomic(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::InvalidArgument, "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::string to_jsonl(const std::vector<ordered_json>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += r.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::InvalidArgument, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

inline std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

// --- schema handling --------------------------------------------------------------------

/// Maps canonical field names to the names used by a particular release of a
/// dataset. Loaded from a JSON object sidecar {"canonical": "actual", ...}.
class FieldMap {
 public:
  FieldMap() = default;
  explicit FieldMap(std::map<std::string, std::string> names) : names_(std::move(names)) {}

  static FieldMap load(const fs::path& path) {
    auto j = ordered_json::parse(read_file(path), nullptr, false);
    if (!j.is_object()) throw Error(ErrorCode::SchemaError, path.string() + ": field map must be a JSON object");
    std::map<std::string, std::string> names;
    for (auto& [k, v] : j.items()) {
      if (!v.is_string()) throw Error(ErrorCode::SchemaError, path.string() + ": field map value for '" + k + "' is not a string");
      names[k] = v.get<std::string>();
    }
    return FieldMap(std::move(names));
  }

  std::string operator()(const std::string& canonical) const {
    auto it = names_.find(canonical);
    return it == names_.end() ? canonical : it->second;
  }

 private:
  std::map<std::string, std::string> names_;
};

/// One JSONL record being validated; problems accumulate with line numbers.
class Row {
 public:
  Row(const ordered_json& j, std::size_t line, const FieldMap& fields, std::vector<std::string>& issues)
      : j_(j), line_(line), fields_(fields), issues_(issues) {}

  std::size_t line() const { return line_; }

  void issue(const std::string& field, const std::string& what) {
    issues_.push_back("line " + std::to_string(line_) + ": field '" + field + "' " + what);
  }

  const ordered_json* find(const std::string& canonical) const {
    auto it = j_.find(fields_(canonical));
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }

  std::string str(const std::string& field) {
    const ordered_json* v = find(field);
    if (!v) {
      issue(fields_(field), "is missing");
      return {};
    }
    if (!v->is_string()) {
      issue(fields_(field), "must be a string");
      return {};
    }
    return v->get<std::string>();
  }

  std::string opt_str(const std::string& field, std::string fallback = {}) {
    return find(field) ? str(field) : fallback;
  }

  /// Identifiers may be strings or integers.
  std::string id(const std::string& field) {
    const ordered_json* v = find(field);
    if (v && v->is_number_integer()) return v->dump();
    return str(field);
  }

  bool boolean(const std::string& field) {
    const ordered_json* v = find(field);
    if (!v) {
      issue(fields_(field), "is missing");
      return false;
    }
    if (v->is_boolean()) return v->get<bool>();
    if (v->is_number_integer() && (v->get<long long>() == 0 || v->get<long long>() == 1)) return v->get<long long>() == 1;
    issue(fields_(field), "must be a boolean");
    return false;
  }

  double number(const std::string& field) {
    const ordered_json* v = find(field);
    if (!v) {
      issue(fields_(field), "is missing");
      return 0;
    }
    if (!v->is_number()) {
      issue(fields_(field), "must be a number");
      return 0;
    }
    return v->get<double>();
  }

  /// A theorem source; the proof, if any, is dropped.
  FormalStatement statement(const std::string& field, const std::string& context, Origin origin) {
    FormalStatement s;
    s.context = context;
    s.origin = origin;
    std::string src = str(field);
    if (src.empty()) return s;
    try {
      s.signature_src = normalize::strip_proof(src);
      s.name = parse_serialized(s.signature_src, origin).name;
    } catch (const Error& e) {
      issue(fields_(field), std::string("has no theorem statement: ") + e.what());
    }
    return s;
  }

 private:
  const ordered_json& j_;
  std::size_t line_;
  const FieldMap& fields_;
  std::vector<std::string>& issues_;
};

/// Calls `fn` for every non-blank line; throws one SchemaError listing every
/// problem found in the file.
inline void for_each_record(const fs::path& path, const FieldMap& fields,
                            const std::function<void(Row&)>& fn) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::SchemaError, "cannot open " + path.string());
  std::vector<std::string> issues;
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = ordered_json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      issues.push_back("line " + std::to_string(no) + ": not a JSON object");
      continue;
    }
    Row row(j, no, fields, issues);
    fn(row);
  }
  if (!issues.empty()) {
    std::string msg = path.string() + ": " + std::to_string(issues.size()) + " schema error(s)";
    for (const auto& i : issues) msg += "\n  " + i;
    throw Error(ErrorCode::SchemaError, msg);
  }
}

// --- verification dataset ------------------------------------------------------------------

inline std::vector<VerifRecord> load_verif_dataset(const fs::path& path, const FieldMap& fields = {}) {
  std::vector<VerifRecord> out;
  std::set<std::string> ids;
  for_each_record(path, fields, [&](Row& row) {
    VerifRecord r;
    r.id = row.id("id");
    r.informal = row.str("nl_statement");
    std::string header = row.str("src_header");
    r.reference = row.statement("reference", header, Origin::Reference);
    r.prediction = row.statement("prediction", header, Origin::Prediction);
    r.label = row.boolean("label");
    r.reference_length = utf8_length(r.reference.signature_src);
    if (!r.id.empty() && !ids.insert(r.id).second) row.issue(fields("id"), "duplicates an earlier record");
    out.push_back(std::move(r));
  });
  return out;
}

inline ordered_json to_json(const VerifRecord& r) {
  return ordered_json{{"id", r.id},
                      {"nl_statement", r.informal},
                      {"src_header", r.reference.context},
                      {"reference", r.reference.signature_src},
                      {"prediction", r.prediction.signature_src},
                      {"label", r.label}};
}

// --- candidate pools -------------------------------------------------------------------------

inline DecodeMode decode_mode_for(double temperature, int num_samples) {
  return num_samples == 1 && temperature == 0.0 ? DecodeMode::Greedy : DecodeMode::TemperatureSampling;
}

inline std::vector<CandidatePool> load_pools(const fs::path& path, const FieldMap& fields = {}) {
  std::vector<CandidatePool> out;
  std::set<std::string> ids;
  for_each_record(path, fields, [&](Row& row) {
    CandidatePool p;
    p.problem_id = row.id("problem_id");
    p.informal = row.opt_str("informal");
    p.context = row.opt_str("context");
    std::string mode = row.opt_str("context_mode", "none");
    if (auto m = parse_context_mode(mode)) p.context_mode = *m;
    else row.issue(fields("context_mode"), "has unknown value '" + mode + "'");
    const ordered_json* cands = row.find("candidates");
    if (!cands || !cands->is_array()) {
      row.issue(fields("candidates"), "must be an array");
    } else {
      for (const auto& c : *cands) {
        Candidate cand;
        cand.index = p.candidates.size();
        if (c.is_string()) cand.raw_text = c.get<std::string>();
        else if (c.is_object() && c.contains("text") && c["text"].is_string()) cand.raw_text = c["text"].get<std::string>();
        else row.issue(fields("candidates"), "entry " + std::to_string(cand.index) + " is not a string");
        p.candidates.push_back(std::move(cand));
      }
    }
    p.gen_config.num_samples = std::max<int>(1, static_cast<int>(p.candidates.size()));
    if (const ordered_json* g = row.find("gen_config")) {
      if (!g->is_object()) {
        row.issue(fields("gen_config"), "must be an object");
      } else {
        p.gen_config.temperature = g->value("temperature", 0.0);
        p.gen_config.num_samples = g->value("num_samples", p.gen_config.num_samples);
        p.gen_config.model_id = g->value("model_id", std::string());
      }
    }
    p.gen_config.decode_mode = decode_mode_for(p.gen_config.temperature, p.gen_config.num_samples);
    if (!p.problem_id.empty() && !ids.insert(p.problem_id).second) {
      row.issue(fields("problem_id"), "duplicates an earlier pool ('" + p.problem_id + "')");
    }
    out.push_back(std::move(p));
  });
  return out;
}

inline ordered_json to_json(const GenerationConfig& g) {
  return ordered_json{{"temperature", g.temperature},
                      {"num_samples", g.num_samples},
                      {"model_id", g.model_id},
                      {"decode_mode", std::string(to_string(g.decode_mode))}};
}

inline ordered_json to_json(const CandidatePool& p) {
  ordered_json cands = ordered_json::array();
  for (const auto& c : p.candidates) cands.push_back(c.raw_text);
  return ordered_json{{"problem_id", p.problem_id},
                      {"informal", p.informal},
                      {"context", p.context},
                      {"context_mode", std::string(to_string(p.context_mode))},
                      {"candidates", cands},
                      {"gen_config", to_json(p.gen_config)}};
}

// --- references, labels, pairs, points, problems ---------------------------------------------

inline std::map<std::string, FormalStatement> load_references(const fs::path& path, const FieldMap& fields = {}) {
  std::map<std::string, FormalStatement> out;
  for_each_record(path, fields, [&](Row& row) {
    std::string id = row.id("problem_id");
    std::string context = row.opt_str("context");
    FormalStatement s = row.statement("reference", context, Origin::Reference);
    if (!out.emplace(id, std::move(s)).second) row.issue(fields("problem_id"), "duplicates an earlier reference");
  });
  return out;
}

/// Human judgements of a run's selected outputs: {problem_id, correct}.
inline std::map<std::string, bool> load_labels(const fs::path& path, const FieldMap& fields = {}) {
  std::map<std::string, bool> out;
  for_each_record(path, fields, [&](Row& row) {
    std::string id = row.id("problem_id");
    bool correct = row.boolean("correct");
    if (!out.emplace(id, correct).second) row.issue(fields("problem_id"), "duplicates an earlier label");
  });
  return out;
}

struct StatementPair {
  std::string id;
  FormalStatement t1;
  FormalStatement t2;
  std::optional<Verdict> expected;
};

inline std::vector<StatementPair> load_pairs(const fs::path& path, const FieldMap& fields = {}) {
  std::vector<StatementPair> out;
  for_each_record(path, fields, [&](Row& row) {
    StatementPair p;
    p.id = row.id("id");
    std::string context = row.opt_str("context");
    p.t1 = row.statement("t1", context, Origin::Reference);
    p.t2 = row.statement("t2", context, Origin::Prediction);
    if (row.find("expected")) {
      std::string e = row.str("expected");
      p.expected = parse_verdict(e);
      if (!p.expected) row.issue(fields("expected"), "has unknown verdict '" + e + "'");
    }
    out.push_back(std::move(p));
  });
  return out;
}

inline ordered_json to_json(const StatementPair& p) {
  ordered_json j{{"id", p.id}, {"context", p.t1.context}, {"t1", p.t1.signature_src}, {"t2", p.t2.signature_src}};
  if (p.expected) j["expected"] = std::string(to_string(*p.expected));
  return j;
}

inline std::vector<metrics::BenchmarkPoint> load_points(const fs::path& path, const FieldMap& fields = {}) {
  std::vector<metrics::BenchmarkPoint> out;
  for_each_record(path, fields, [&](Row& row) {
    metrics::BenchmarkPoint p;
    p.label = row.str("label");
    auto rate = [&](const char* name) {
      double v = row.number(name);
      if (v < 0.0 || v > 100.0) row.issue(fields(name), "must lie in [0, 100]");
      return v;
    };
    p.human_accuracy = rate("human_accuracy");
    p.type_check_rate = rate("type_check_rate");
    p.beq_l_rate = rate("beq_l_rate");
    p.beq_plus_rate = rate("beq_plus_rate");
    out.push_back(std::move(p));
  });
  return out;
}

struct Problem {
  std::string problem_id;
  std::string informal;
  std::string context;
  ContextMode context_mode = ContextMode::None;
};

inline std::vector<Problem> load_problems(const fs::path& path, const FieldMap& fields = {}) {
  std::vector<Problem> out;
  std::set<std::string> ids;
  for_each_record(path, fields, [&](Row& row) {
    Problem p;
    p.problem_id = row.id("problem_id");
    p.informal = row.str("informal");
    p.context = row.opt_str("context");
    std::string mode = row.opt_str("context_mode", "none");
    if (auto m = parse_context_mode(mode)) p.context_mode = *m;
    else row.issue(fields("context_mode"), "has unknown value '" + mode + "'");
    if (!p.problem_id.empty() && !ids.insert(p.problem_id).second) {
      row.issue(fields("problem_id"), "duplicates an earlier problem");
    }
    out.push_back(std::move(p));
  });
  return out;
}

}  // namespace beqh::dataset
