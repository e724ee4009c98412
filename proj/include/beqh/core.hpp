#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "beqh/error.hpp"

namespace beqh {

enum class Origin { Reference, Prediction, Synthetic };

/// A theorem header plus the source needed to elaborate it.
/// `signature_src` runs from the declaration keyword through the statement and
/// never contains a proof body.
struct FormalStatement {
  std::string name;
  std::string context;
  std::string signature_src;
  Origin origin = Origin::Synthetic;

  bool operator==(const FormalStatement&) const = default;
};

enum class ContextMode { None, FullFile, NoTheoremsProofs, NoProofs };
enum class DecodeMode { Greedy, TemperatureSampling };

struct GenerationConfig {
  double temperature = 0.0;
  int num_samples = 1;
  std::string model_id;
  DecodeMode decode_mode = DecodeMode::Greedy;

  bool operator==(const GenerationConfig&) const = default;
};

enum class Severity { Error, Warning, Info };

struct Position {
  int line = 0;
  int column = 0;
  bool operator==(const Position&) const = default;
};

struct Diagnostic {
  Severity severity = Severity::Info;
  std::optional<Position> pos;
  std::optional<Position> end_pos;
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

enum class TypeCheckKind {
  WellTypedWithSorry,
  WellTypedComplete,
  IllTyped,
  Timeout,
  BackendFailure,
};

struct TypeCheckStatus {
  TypeCheckKind kind = TypeCheckKind::BackendFailure;
  std::vector<Diagnostic> diagnostics;

  bool well_typed() const {
    return kind == TypeCheckKind::WellTypedWithSorry ||
           kind == TypeCheckKind::WellTypedComplete;
  }
  bool operator==(const TypeCheckStatus&) const = default;
};

struct Candidate {
  std::size_t index = 0;  // position in generation order
  std::string raw_text;
  std::optional<FormalStatement> cleaned;
  std::optional<TypeCheckStatus> typecheck;

  bool operator==(const Candidate&) const = default;
};

struct CandidatePool {
  std::string problem_id;
  std::string informal;
  std::string context;
  ContextMode context_mode = ContextMode::None;
  std::vector<Candidate> candidates;
  GenerationConfig gen_config;

  bool operator==(const CandidatePool&) const = default;
};

enum class StrategyKind { None, ExactRestricted, ConclusionMatch, DirectAssumption };

struct Strategy {
  StrategyKind kind = StrategyKind::None;
  // ConclusionMatch only: nullopt for `apply`, k for `convert ... using k`.
  std::optional<int> convert_depth;

  bool operator==(const Strategy&) const = default;
};

struct DirectionProof {
  bool success = false;
  Strategy strategy;
  std::string script;
  std::vector<std::string> suggestions;
  bool trivially_provable = false;
  bool attempted = false;
  std::chrono::milliseconds elapsed{0};
};

enum class Verdict {
  Equivalent,
  ForwardOnly,
  BackwardOnly,
  NotProven,
  TrivialityFlagged,
  Error,
};

struct EquivalenceVerdict {
  DirectionProof forward;   // t1 |- t2
  DirectionProof backward;  // t2 |- t1
  Verdict verdict = Verdict::NotProven;
  std::string error;        // failing stage when verdict == Error
};

struct VerifRecord {
  std::string id;
  std::string informal;
  FormalStatement reference;
  FormalStatement prediction;
  bool label = false;
  std::size_t reference_length = 0;
};

// ---------------------------------------------------------------------------

inline std::string_view to_string(Origin o) {
  switch (o) {
    case Origin::Reference: return "Reference";
    case Origin::Prediction: return "Prediction";
    case Origin::Synthetic: return "Synthetic";
  }
  return "?";
}

inline std::string_view to_string(ContextMode m) {
  switch (m) {
    case ContextMode::None: return "none";
    case ContextMode::FullFile: return "full_file";
    case ContextMode::NoTheoremsProofs: return "no_theorems_proofs";
    case ContextMode::NoProofs: return "no_proofs";
  }
  return "?";
}

inline std::string_view to_string(DecodeMode m) {
  return m == DecodeMode::Greedy ? "greedy" : "temperature_sampling";
}

inline std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::Error: return "error";
    case Severity::Warning: return "warning";
    case Severity::Info: return "info";
  }
  return "?";
}

inline std::string_view to_string(TypeCheckKind k) {
  switch (k) {
    case TypeCheckKind::WellTypedWithSorry: return "WellTypedWithSorry";
    case TypeCheckKind::WellTypedComplete: return "WellTypedComplete";
    case TypeCheckKind::IllTyped: return "IllTyped";
    case TypeCheckKind::Timeout: return "Timeout";
    case TypeCheckKind::BackendFailure: return "BackendFailure";
  }
  return "?";
}

inline std::string_view to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::None: return "None";
    case StrategyKind::ExactRestricted: return "ExactRestricted";
    case StrategyKind::ConclusionMatch: return "ConclusionMatch";
    case StrategyKind::DirectAssumption: return "DirectAssumption";
  }
  return "?";
}

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Equivalent: return "Equivalent";
    case Verdict::ForwardOnly: return "ForwardOnly";
    case Verdict::BackwardOnly: return "BackwardOnly";
    case Verdict::NotProven: return "NotProven";
    case Verdict::TrivialityFlagged: return "TrivialityFlagged";
    case Verdict::Error: return "Error";
  }
  return "?";
}

inline std::optional<ContextMode> parse_context_mode(std::string_view s) {
  if (s == "none" || s.empty()) return ContextMode::None;
  if (s == "full_file") return ContextMode::FullFile;
  if (s == "no_theorems_proofs") return ContextMode::NoTheoremsProofs;
  if (s == "no_proofs") return ContextMode::NoProofs;
  return std::nullopt;
}

inline std::optional<Verdict> parse_verdict(std::string_view s) {
  for (auto v : {Verdict::Equivalent, Verdict::ForwardOnly, Verdict::BackwardOnly,
                 Verdict::NotProven, Verdict::TrivialityFlagged, Verdict::Error}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

/// Number of Unicode scalar values in a UTF-8 string.
inline std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

inline constexpr std::string_view kSorrySuffix = " := sorry";

/// context + newline + signature + " := sorry"; the context line is omitted
/// when empty.
inline std::string serialize_with_sorry(const FormalStatement& s) {
  std::string out;
  if (!s.context.empty()) {
    out += s.context;
    out += '\n';
  }
  out += s.signature_src;
  out += kSorrySuffix;
  return out;
}

namespace detail {

inline bool starts_with_decl_keyword(std::string_view line) {
  std::size_t i = line.find_first_not_of(" \t");
  if (i == std::string_view::npos) return false;
  line.remove_prefix(i);
  for (std::string_view kw : {"theorem", "lemma", "example"}) {
    if (line.starts_with(kw) &&
        (line.size() == kw.size() || line[kw.size()] == ' ' || line[kw.size()] == '\t' ||
         line[kw.size()] == '\n' || line[kw.size()] == '(' || line[kw.size()] == ':')) {
      return true;
    }
  }
  return false;
}

}  // namespace detail

/// Inverse of serialize_with_sorry: splits at the first line that opens a
/// theorem declaration and drops the trailing sorry proof.
inline FormalStatement parse_serialized(std::string_view text, Origin origin = Origin::Synthetic) {
  std::size_t line_start = 0;
  std::optional<std::size_t> decl_start;
  while (line_start <= text.size()) {
    std::size_t end = text.find('\n', line_start);
    if (end == std::string_view::npos) end = text.size();
    if (detail::starts_with_decl_keyword(text.substr(line_start, end - line_start))) {
      decl_start = line_start;
      break;
    }
    if (end == text.size()) break;
    line_start = end + 1;
  }
  if (!decl_start) {
    throw Error(ErrorCode::NoDeclarationFound, "no theorem declaration in serialized text");
  }
  FormalStatement s;
  s.origin = origin;
  s.context = std::string(text.substr(0, *decl_start));
  if (!s.context.empty() && s.context.back() == '\n') s.context.pop_back();
  std::string_view sig = text.substr(*decl_start);
  while (!sig.empty() && (sig.back() == ' ' || sig.back() == '\n' || sig.back() == '\t')) {
    sig.remove_suffix(1);
  }
  if (sig.ends_with(kSorrySuffix)) sig.remove_suffix(kSorrySuffix.size());
  s.signature_src = std::string(sig);

  std::string_view rest = sig;
  rest.remove_prefix(rest.find_first_not_of(" \t"));
  std::size_t sp = rest.find_first_of(" \t\n");
  if (sp != std::string_view::npos && !rest.starts_with("example")) {
    std::string_view after = rest.substr(sp);
    after.remove_prefix(std::min(after.size(), after.find_first_not_of(" \t\n")));
    std::size_t name_end = after.find_first_of(" \t\n(:{[");
    s.name = std::string(after.substr(0, name_end));
  }
  return s;
}

/// Verdict of a bidirectional check from its two direction outcomes. With the
/// guard on, a trivially provable direction always yields TrivialityFlagged.
inline Verdict combine_directions(bool forward_ok, bool backward_ok, bool trivially_flagged) {
  if (trivially_flagged) return Verdict::TrivialityFlagged;
  if (forward_ok && backward_ok) return Verdict::Equivalent;
  if (forward_ok) return Verdict::ForwardOnly;
  if (backward_ok) return Verdict::BackwardOnly;
  return Verdict::NotProven;
}

inline Verdict combine_directions(const DirectionProof& fwd, const DirectionProof& bwd,
                                  bool triviality_guard) {
  bool flagged = triviality_guard && (fwd.trivially_provable || bwd.trivially_provable);
  return combine_directions(fwd.success, bwd.success, flagged);
}

}  // namespace beqh
