#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "beqh/core.hpp"
#include "beqh/error.hpp"
#include "json.hpp"

namespace beqh {

using ordered_json = nlohmann::ordered_json;
using Millis = std::chrono::milliseconds;

inline constexpr Millis kDefaultCommandTimeout{60'000};
inline constexpr Millis kDefaultAttemptTimeout{20'000};
inline constexpr Millis kDefaultStartupTimeout{600'000};
inline constexpr std::size_t kDefaultRecycleAfter = 200;

struct SorryGoal {
  std::optional<Position> pos;
  std::optional<Position> end_pos;
  std::string goal;
};

/// One parsed REPL response. `raw` is the compact serialization of the
/// response object with its key order preserved.
struct ReplResult {
  std::optional<int> env;
  std::vector<Diagnostic> messages;
  std::vector<SorryGoal> sorries;
  std::optional<std::string> repl_error;  // top-level {"message": ...} replies
  std::string raw;

  bool has_errors() const {
    for (const auto& m : messages) {
      if (m.severity == Severity::Error) return true;
    }
    return false;
  }
};

struct SessionHandle {
  std::string session_id;
  std::optional<int> base_env;
  std::string toolchain;
  std::string header;  // source whose environment is cached as base_env
};

// --- wire format -------------------------------------------------------------

/// `{"cmd": ..., "env": ...}` followed by a blank line.
inline std::string encode_request(std::string_view src, std::optional<int> env) {
  ordered_json req;
  req["cmd"] = std::string(src);
  if (env) req["env"] = *env;
  return req.dump() + "\n\n";
}

/// Whitespace-insensitive form used to match requests against transcripts.
inline std::string normalize_request(std::string_view src) {
  std::string out;
  bool space = false;
  for (char c : src) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      space = true;
      continue;
    }
    if (space && !out.empty()) out += ' ';
    space = false;
    out += c;
  }
  return out;
}

namespace detail {

inline std::optional<Position> parse_position(const ordered_json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_object()) throw Error(ErrorCode::ProtocolError, std::string("bad position field ") + key);
  Position p;
  p.line = it->value("line", 0);
  p.column = it->value("column", 0);
  return p;
}

inline Severity parse_severity(const std::string& s) {
  if (s == "error") return Severity::Error;
  if (s == "warning") return Severity::Warning;
  if (s == "info" || s == "information") return Severity::Info;
  throw Error(ErrorCode::ProtocolError, "unknown severity '" + s + "'");
}

}  // namespace detail

inline ReplResult parse_response(const ordered_json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ProtocolError, "response is not a JSON object");
  ReplResult r;
  r.raw = j.dump();
  try {
    if (auto it = j.find("env"); it != j.end() && !it->is_null()) r.env = it->get<int>();
    if (auto it = j.find("messages"); it != j.end()) {
      if (!it->is_array()) throw Error(ErrorCode::ProtocolError, "messages is not an array");
      for (const auto& m : *it) {
        Diagnostic d;
        d.severity = detail::parse_severity(m.at("severity").get<std::string>());
        d.pos = detail::parse_position(m, "pos");
        d.end_pos = detail::parse_position(m, "endPos");
        d.message = m.value("data", std::string{});
        r.messages.push_back(std::move(d));
      }
    }
    if (auto it = j.find("sorries"); it != j.end()) {
      if (!it->is_array()) throw Error(ErrorCode::ProtocolError, "sorries is not an array");
      for (const auto& s : *it) {
        SorryGoal g;
        g.pos = detail::parse_position(s, "pos");
        g.end_pos = detail::parse_position(s, "endPos");
        g.goal = s.value("goal", std::string{});
        r.sorries.push_back(std::move(g));
      }
    }
    if (!j.contains("env") && j.contains("message")) r.repl_error = j.at("message").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ProtocolError, std::string("malformed response: ") + e.what());
  }
  return r;
}

inline ReplResult parse_response(std::string_view payload) {
  ordered_json j = ordered_json::parse(payload, nullptr, false);
  if (j.is_discarded()) {
    throw Error(ErrorCode::ProtocolError, "unparseable response: " + std::string(payload.substr(0, 200)));
  }
  return parse_response(j);
}

inline bool is_sorry_warning(std::string_view msg) {
  return msg.find("declaration uses 'sorry'") != std::string_view::npos ||
         msg.find("declaration uses `sorry'") != std::string_view::npos;
}

/// Type-check status of a response. Errors dominate; a sorry warning or a
/// reported sorry goal means well-typed with a placeholder proof.
inline TypeCheckStatus classify(const ReplResult& r) {
  TypeCheckStatus st;
  st.diagnostics = r.messages;
  if (r.repl_error) {
    st.kind = TypeCheckKind::BackendFailure;
    st.diagnostics.push_back({Severity::Error, std::nullopt, std::nullopt, *r.repl_error});
    return st;
  }
  bool error = false, sorry = !r.sorries.empty();
  for (const auto& m : r.messages) {
    if (m.severity == Severity::Error) error = true;
    if (is_sorry_warning(m.message)) sorry = true;
  }
  st.kind = error ? TypeCheckKind::IllTyped
                  : (sorry ? TypeCheckKind::WellTypedWithSorry : TypeCheckKind::WellTypedComplete);
  return st;
}

// --- backend interface ---------------------------------------------------------

class ProverBackend {
 public:
  virtual ~ProverBackend() = default;

  virtual std::string kind() const = 0;
  virtual SessionHandle start_session(const std::filesystem::path& project_root, Millis timeout) = 0;
  virtual ReplResult run_command(SessionHandle& session, std::string_view src, std::optional<int> env,
                                 Millis timeout) = 0;
  /// Replaces a dead or exhausted session's process; the header environment is
  /// rebuilt so base_env stays valid.
  virtual void restart(SessionHandle& session) = 0;
  virtual void close(SessionHandle& session) = 0;
  virtual std::size_t commands_since_start(const SessionHandle& session) const = 0;

  /// Runs `header` once per session and caches its environment as base_env.
  std::optional<int> ensure_header(SessionHandle& session, std::string_view header,
                                   Millis timeout = kDefaultStartupTimeout) {
    if (header.empty() || header == session.header) return session.base_env;
    ReplResult r = run_command(session, header, std::nullopt, timeout);
    if (r.has_errors() || r.repl_error || !r.env) {
      throw Error(ErrorCode::ContextClash, "header does not elaborate: " + std::string(header.substr(0, 200)));
    }
    session.base_env = r.env;
    session.header = std::string(header);
    return session.base_env;
  }

  void maybe_recycle(SessionHandle& session, std::size_t limit = kDefaultRecycleAfter) {
    if (limit > 0 && commands_since_start(session) >= limit) restart(session);
  }
};

// --- transcripts ------------------------------------------------------------------

struct TranscriptEntry {
  std::string request;  // normalized source
  std::optional<int> env;
  ordered_json response;
  bool timeout = false;
};

inline ordered_json to_json(const TranscriptEntry& e) {
  ordered_json j;
  j["request"] = e.request;
  if (e.env) j["env"] = *e.env;
  if (e.timeout) {
    j["timeout"] = true;
  } else {
    j["response"] = e.response;
  }
  return j;
}

inline std::vector<TranscriptEntry> load_transcript(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::SchemaError, "cannot open transcript " + path.string());
  std::vector<TranscriptEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (normalize_request(line).empty()) continue;
    ordered_json j = ordered_json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("request") ||
        (!j.contains("response") && !j.value("timeout", false))) {
      throw Error(ErrorCode::SchemaError,
                  path.string() + ":" + std::to_string(lineno) + ": expected {\"request\", \"response\"}");
    }
    TranscriptEntry e;
    e.request = normalize_request(j.at("request").get<std::string>());
    if (j.contains("env") && !j.at("env").is_null()) e.env = j.at("env").get<int>();
    e.timeout = j.value("timeout", false);
    if (!e.timeout) e.response = j.at("response");
    entries.push_back(std::move(e));
  }
  return entries;
}

inline void write_transcript(const std::filesystem::path& path, const std::vector<TranscriptEntry>& entries) {
  std::ofstream out(path);
  for (const auto& e : entries) out << to_json(e).dump() << '\n';
}

struct IssuedCommand {
  std::string session_id;
  std::string src;
  std::optional<int> env;
};

/// Replays canned responses. Requests are matched on their normalized source
/// (and env, when the entry pins one). Anything unmatched is forwarded to the
/// optional responder, otherwise it is a ProtocolError.
class ScriptedBackend final : public ProverBackend {
 public:
  using Responder = std::function<std::optional<ordered_json>(std::string_view src, std::optional<int> env)>;

  explicit ScriptedBackend(std::vector<TranscriptEntry> transcript = {}, Responder responder = {})
      : transcript_(std::move(transcript)), responder_(std::move(responder)) {}

  static ScriptedBackend from_file(const std::filesystem::path& path) {
    return ScriptedBackend(load_transcript(path));
  }

  std::string kind() const override { return "scripted"; }

  SessionHandle start_session(const std::filesystem::path&, Millis) override {
    std::lock_guard lock(mu_);
    SessionHandle h;
    h.session_id = "scripted-" + std::to_string(next_session_++);
    h.toolchain = "scripted";
    states_[h.session_id] = State{};
    return h;
  }

  ReplResult run_command(SessionHandle& session, std::string_view src, std::optional<int> env,
                         Millis) override {
    std::string key = normalize_request(src);
    {
      std::lock_guard lock(mu_);
      State& st = state(session);
      if (st.dead) throw Error(ErrorCode::SessionDead, session.session_id);
      ++st.commands;
      log_.push_back({session.session_id, std::string(src), env});
    }
    for (const auto& e : transcript_) {
      if (e.request != key || (e.env && e.env != env)) continue;
      if (e.timeout) {
        std::lock_guard lock(mu_);
        state(session).dead = true;
        throw Error(ErrorCode::CommandTimeout, "scripted timeout");
      }
      return parse_response(e.response);
    }
    if (responder_) {
      if (auto resp = responder_(src, env)) return parse_response(*resp);
    }
    throw Error(ErrorCode::ProtocolError, "request not in transcript: " + key.substr(0, 200));
  }

  void restart(SessionHandle& session) override {
    {
      std::lock_guard lock(mu_);
      state(session) = State{};
    }
    std::string header = std::move(session.header);
    session.header.clear();
    session.base_env.reset();
    ensure_header(session, header);
  }

  void close(SessionHandle& session) override {
    std::lock_guard lock(mu_);
    states_.erase(session.session_id);
  }

  std::size_t commands_since_start(const SessionHandle& session) const override {
    std::lock_guard lock(mu_);
    auto it = states_.find(session.session_id);
    return it == states_.end() ? 0 : it->second.commands;
  }

  /// Every command issued so far, across sessions, in issue order.
  std::vector<IssuedCommand> issued() const {
    std::lock_guard lock(mu_);
    return log_;
  }

  std::vector<std::string> issued_sources(const std::string& session_id = {}) const {
    std::lock_guard lock(mu_);
    std::vector<std::string> out;
    for (const auto& c : log_) {
      if (session_id.empty() || c.session_id == session_id) out.push_back(c.src);
    }
    return out;
  }

  void clear_log() {
    std::lock_guard lock(mu_);
    log_.clear();
  }

 private:
  struct State {
    std::size_t commands = 0;
    bool dead = false;
  };

  State& state(const SessionHandle& s) {
    auto it = states_.find(s.session_id);
    if (it == states_.end()) throw Error(ErrorCode::SessionDead, "unknown session " + s.session_id);
    return it->second;
  }

  std::vector<TranscriptEntry> transcript_;
  Responder responder_;
  mutable std::mutex mu_;
  std::map<std::string, State> states_;
  std::vector<IssuedCommand> log_;
  int next_session_ = 0;
};

/// Forwards to another backend and records every exchange as a transcript.
class RecordingBackend final : public ProverBackend {
 public:
  explicit RecordingBackend(ProverBackend& inner) : inner_(inner) {}

  std::string kind() const override { return inner_.kind(); }
  SessionHandle start_session(const std::filesystem::path& root, Millis timeout) override {
    return inner_.start_session(root, timeout);
  }
  ReplResult run_command(SessionHandle& session, std::string_view src, std::optional<int> env,
                         Millis timeout) override {
    TranscriptEntry e;
    e.request = normalize_request(src);
    e.env = env;
    try {
      ReplResult r = inner_.run_command(session, src, env, timeout);
      e.response = ordered_json::parse(r.raw);
      append(std::move(e));
      return r;
    } catch (const Error& err) {
      if (err.code() == ErrorCode::CommandTimeout) {
        e.timeout = true;
        append(std::move(e));
      }
      throw;
    }
  }
  void restart(SessionHandle& session) override { inner_.restart(session); }
  void close(SessionHandle& session) override { inner_.close(session); }
  std::size_t commands_since_start(const SessionHandle& session) const override {
    return inner_.commands_since_start(session);
  }

  std::vector<TranscriptEntry> transcript() const {
    std::lock_guard lock(mu_);
    return entries_;
  }

 private:
  void append(TranscriptEntry e) {
    std::lock_guard lock(mu_);
    entries_.push_back(std::move(e));
  }

  ProverBackend& inner_;
  mutable std::mutex mu_;
  std::vector<TranscriptEntry> entries_;
};

}  // namespace beqh
