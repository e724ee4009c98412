#pragma once

#include <chrono>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "beqh/core.hpp"
#include "beqh/lexer.hpp"
#include "beqh/normalize.hpp"
#include "beqh/prover.hpp"

namespace beqh::beq {

inline constexpr std::string_view kSourceName = "src_thm";
inline constexpr std::string_view kTargetName = "tgt_thm";

struct BeqConfig {
  int max_convert_depth = 5;
  std::vector<std::string> closure_tactics{"tauto", "simp_all_arith!", "noncomm_ring", "exact?"};
  int max_closure_rounds = 3;
  Millis per_attempt_timeout = kDefaultAttemptTimeout;
  Millis command_timeout = kDefaultCommandTimeout;
  bool triviality_guard = true;
  bool short_circuit = false;

  void validate() const {
    if (max_convert_depth < 0) throw Error(ErrorCode::InvalidArgument, "max_convert_depth must be >= 0");
    if (max_closure_rounds < 1) throw Error(ErrorCode::InvalidArgument, "max_closure_rounds must be >= 1");
    if (closure_tactics.empty()) throw Error(ErrorCode::InvalidArgument, "closure_tactics is empty");
  }
};

// --- script construction ---------------------------------------------------------

struct MergedContext {
  std::string imports;
  std::string body;
};

/// Line-wise union of two contexts, first occurrence order. `import` lines are
/// split off because the REPL only accepts them in a fresh environment.
inline MergedContext merge_contexts(std::string_view a, std::string_view b) {
  MergedContext out;
  std::set<std::string> seen;
  for (std::string_view ctx : {a, b}) {
    std::size_t pos = 0;
    while (pos <= ctx.size()) {
      std::size_t nl = ctx.find('\n', pos);
      std::string_view line = ctx.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r')) {
        line.remove_suffix(1);
      }
      if (!line.empty() && seen.insert(std::string(line)).second) {
        std::string& dst = line.starts_with("import ") ? out.imports : out.body;
        if (!dst.empty()) dst += '\n';
        dst += line;
      }
      if (nl == std::string_view::npos) break;
      pos = nl + 1;
    }
  }
  return out;
}

/// `iterate R (try (any_goals (first | t1 | t2 | ...)))`
inline std::string closure_line(const std::vector<std::string>& tactics, int rounds) {
  std::string alts;
  for (const auto& t : tactics) {
    if (!alts.empty()) alts += " | ";
    alts += t;
  }
  return "iterate " + std::to_string(rounds) + " (try (any_goals (first | " + alts + ")))";
}

/// Closure tactics for the main goal once `this` holds the source statement.
inline std::vector<std::string> main_goal_tactics(const std::vector<std::string>& closure) {
  std::vector<std::string> out;
  for (const auto& t : closure) {
    if (t == "noncomm_ring") continue;
    out.push_back(t == "exact?" ? "exact? using this" : t);
  }
  return out;
}

inline std::string proof_command(std::string_view target_decl, const std::vector<std::string>& lines) {
  std::string out(target_decl);
  out += " := by";
  for (const auto& l : lines) {
    out += "\n  ";
    out += l;
  }
  return out;
}

inline std::string flatten(std::string_view s) { return normalize_request(s); }

/// Proposition form of a pretty-printed goal: hypotheses become a leading
/// telescope, `⊢ G` the body. Inaccessible instance hypotheses turn into
/// instance binders.
inline std::string goal_to_proposition(std::string_view goal) {
  std::vector<std::string> entries;
  std::size_t pos = 0;
  while (pos <= goal.size()) {
    std::size_t nl = goal.find('\n', pos);
    std::string_view line = goal.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    if (!line.empty()) {
      bool continuation = line.front() == ' ' || line.front() == '\t';
      if (continuation && !entries.empty()) {
        entries.back() += ' ';
        entries.back() += line;
      } else if (!line.starts_with("case ")) {
        entries.emplace_back(line);
      }
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  std::string binders, body;
  constexpr std::string_view kTurnstile = "⊢";
  for (const auto& e : entries) {
    if (std::string_view(e).starts_with(kTurnstile)) {
      body = flatten(std::string_view(e).substr(kTurnstile.size()));
      continue;
    }
    std::size_t colon = e.find(" : ");
    if (colon == std::string::npos) continue;
    std::string type = flatten(std::string_view(e).substr(colon + 3));
    if (auto let_value = type.find(" := "); let_value != std::string::npos) type.resize(let_value);
    std::vector<std::string> accessible;
    std::istringstream names{std::string(e.substr(0, colon))};
    for (std::string name; names >> name;) {
      if (name.find("✝") != std::string::npos) {
        if (!binders.empty()) binders += ' ';
        binders += name.starts_with("inst") ? "[" + type + "]" : "(_ : " + type + ")";
      } else {
        accessible.push_back(name);
      }
    }
    if (!accessible.empty()) {
      if (!binders.empty()) binders += ' ';
      binders += '(';
      for (std::size_t i = 0; i < accessible.size(); ++i) {
        if (i) binders += ' ';
        binders += accessible[i];
      }
      binders += " : " + type + ")";
    }
  }
  if (binders.empty()) return body;
  return "∀ " + binders + ", " + body;
}

/// Proposition form read off the declaration itself: binders before the
/// top-level `:` become a telescope.
inline std::string signature_to_proposition(std::string_view decl) {
  auto tokens = lex::tokenize(decl);
  int depth = 0;
  std::optional<std::size_t> name_end, colon;
  bool seen_keyword = false;
  for (const auto& t : tokens) {
    std::string_view txt = t.text(decl);
    if (t.is_trivia()) continue;
    if (!seen_keyword) {
      seen_keyword = t.kind == lex::Kind::Ident && (txt == "theorem" || txt == "lemma");
      continue;
    }
    if (!name_end) {
      name_end = t.end;
      continue;
    }
    if (t.kind == lex::Kind::Symbol) {
      if (lex::is_open_bracket(txt)) ++depth;
      else if (lex::is_close_bracket(txt)) --depth;
      else if (txt == ":" && depth == 0) {
        colon = t.begin;
        break;
      }
    }
  }
  if (!name_end || !colon) return flatten(decl);
  std::string binders = flatten(decl.substr(*name_end, *colon - *name_end));
  std::string body = flatten(decl.substr(*colon + 1));
  return binders.empty() ? body : "∀ " + binders + ", " + body;
}

/// Identifier-boundary occurrence of `name` in `text`.
inline bool references_name(std::string_view text, std::string_view name) {
  for (const auto& t : lex::tokenize(text)) {
    if (t.kind != lex::Kind::Ident) continue;
    std::string_view id = t.text(text);
    if (id == name) return true;
    // `src_thm.mp`, `(src_thm _).symm` lexes as a dotted identifier.
    if (id.size() > name.size() && id.starts_with(name) && id[name.size()] == '.') return true;
  }
  return false;
}

inline bool only_unsolved_goals(const ReplResult& r) {
  bool any = false;
  for (const auto& m : r.messages) {
    if (m.severity != Severity::Error) continue;
    if (!std::string_view(m.message).starts_with("unsolved goals")) return false;
    any = true;
  }
  return any && !r.repl_error;
}

inline bool closed(const ReplResult& r) { return !r.has_errors() && !r.repl_error; }

inline std::vector<std::string> suggestions_of(const ReplResult& r) {
  std::vector<std::string> out;
  constexpr std::string_view kTryThis = "Try this:";
  for (const auto& m : r.messages) {
    std::string_view msg = m.message;
    if (m.severity == Severity::Info && msg.starts_with(kTryThis)) {
      out.push_back(flatten(msg.substr(kTryThis.size())));
    }
  }
  return out;
}

// --- engine ----------------------------------------------------------------------

/// Check environment for one direction: the merged context plus the source
/// theorem declared with a sorry proof.
struct CheckEnv {
  FormalStatement source;
  FormalStatement target;
  std::optional<int> context_env;
  std::optional<int> source_env;
  std::string source_decl;
  std::string target_decl;
  std::string source_goal;
};

inline ordered_json to_json(const DirectionProof& d, bool with_timing = false) {
  ordered_json j;
  j["success"] = d.success;
  j["attempted"] = d.attempted;
  j["strategy"] = std::string(to_string(d.strategy.kind));
  if (d.strategy.convert_depth) j["convert_depth"] = *d.strategy.convert_depth;
  j["script"] = d.script;
  j["suggestions"] = d.suggestions;
  j["trivially_provable"] = d.trivially_provable;
  if (with_timing) j["elapsed_ms"] = d.elapsed.count();
  return j;
}

inline ordered_json to_json(const EquivalenceVerdict& v, bool with_timing = false) {
  ordered_json j;
  j["verdict"] = std::string(to_string(v.verdict));
  if (!v.error.empty()) j["error"] = v.error;
  j["forward"] = to_json(v.forward, with_timing);
  j["backward"] = to_json(v.backward, with_timing);
  return j;
}

class BeqEngine {
 public:
  BeqEngine(ProverBackend& backend, BeqConfig config) : backend_(backend), config_(std::move(config)) {
    config_.validate();
  }

  const BeqConfig& config() const { return config_; }

  /// Declares `source` as `src_thm` (sorry proof) on top of the merged
  /// context; `target` is posed later as `tgt_thm`.
  CheckEnv build_check_env(const FormalStatement& source, const FormalStatement& target,
                           SessionHandle& session) {
    CheckEnv env;
    env.source = source;
    env.target = target;
    env.source_decl = normalize::rename_theorem(source.signature_src, kSourceName);
    env.target_decl = normalize::rename_theorem(target.signature_src, kTargetName);
    rebuild(env, session);
    return env;
  }

  /// `exact?` against the source. Success requires the suggestion to use
  /// `src_thm`; a suggestion that closes the goal without it marks the target
  /// trivially provable.
  DirectionProof exact_restricted(CheckEnv& env, SessionHandle& session) {
    DirectionProof d;
    d.attempted = true;
    std::string cmd = proof_command(env.target_decl, {"exact?"});
    auto r = attempt(env, session, cmd, /*with_source=*/true);
    if (!r) return d;
    d.suggestions = suggestions_of(*r);
    if (!closed(*r)) return d;
    bool uses_source = false;
    for (const auto& s : d.suggestions) uses_source = uses_source || references_name(s, kSourceName);
    if (uses_source) {
      d.success = true;
      d.strategy = {StrategyKind::ExactRestricted, std::nullopt};
      d.script = cmd;
    } else {
      d.trivially_provable = true;
    }
    return d;
  }

  /// One direction of the staged check, stopping at the first success:
  /// restricted exact?, conclusion matching (apply, then convert at
  /// increasing depth) with closure, then direct assumption via apply_rules.
  DirectionProof beq_plus_direction(const FormalStatement& source, const FormalStatement& target,
                                    SessionHandle& session) {
    auto start = std::chrono::steady_clock::now();
    CheckEnv env = build_check_env(source, target, session);
    DirectionProof d = exact_restricted(env, session);
    auto finish = [&](DirectionProof& p) {
      p.attempted = true;
      p.elapsed = std::chrono::duration_cast<Millis>(std::chrono::steady_clock::now() - start);
      return p;
    };
    if (d.success) return finish(d);
    bool trivial = d.trivially_provable;
    if (trivial && config_.triviality_guard) return finish(d);

    const std::string closure = closure_line(config_.closure_tactics, config_.max_closure_rounds);
    auto staged = [&](const std::vector<std::string>& head, const std::vector<std::string>& tail,
                      Strategy strategy) -> std::optional<DirectionProof> {
      std::string probe = proof_command(env.target_decl, head);
      auto r = attempt(env, session, probe, true);
      if (!r) return std::nullopt;
      std::string script;
      if (closed(*r)) {
        script = probe;
      } else if (only_unsolved_goals(*r)) {
        std::vector<std::string> full = head;
        full.insert(full.end(), tail.begin(), tail.end());
        script = proof_command(env.target_decl, full);
        auto rc = attempt(env, session, script, true);
        if (!rc || !closed(*rc)) return std::nullopt;
      } else {
        return std::nullopt;
      }
      DirectionProof p;
      p.success = true;
      p.strategy = strategy;
      p.script = std::move(script);
      p.trivially_provable = trivial;
      return p;
    };

    std::optional<DirectionProof> hit =
        staged({"apply " + std::string(kSourceName)}, {closure}, {StrategyKind::ConclusionMatch, std::nullopt});
    for (int k = 0; !hit && k <= config_.max_convert_depth; ++k) {
      hit = staged({"convert " + std::string(kSourceName) + " using " + std::to_string(k)}, {closure},
                   {StrategyKind::ConclusionMatch, k});
    }
    if (!hit) {
      std::vector<std::string> head{"have : " + env.source_goal + " := by",
                                    "  apply_rules [" + std::string(kSourceName) + "]"};
      hit = staged(head,
                   {"  " + closure,
                    closure_line(main_goal_tactics(config_.closure_tactics), config_.max_closure_rounds)},
                   {StrategyKind::DirectAssumption, std::nullopt});
      // The probe leaves the main goal open, so its "closed" shortcut never
      // fires; a hit always comes from the full script.
    }
    if (!hit) {
      d.trivially_provable = trivial;
      return finish(d);
    }
    d = std::move(*hit);
    d.suggestions.clear();
    if (config_.triviality_guard && !d.trivially_provable) d.trivially_provable = provable_without_source(env, session);
    return finish(d);
  }

  EquivalenceVerdict beq_plus(const FormalStatement& t1, const FormalStatement& t2, SessionHandle& session) {
    return run_both(t1, t2, session, [this](const FormalStatement& s, const FormalStatement& t, SessionHandle& h) {
      return beq_plus_direction(s, t, h);
    });
  }

  /// Each direction is restricted exact? only.
  EquivalenceVerdict beq_l(const FormalStatement& t1, const FormalStatement& t2, SessionHandle& session) {
    return run_both(t1, t2, session, [this](const FormalStatement& s, const FormalStatement& t, SessionHandle& h) {
      auto start = std::chrono::steady_clock::now();
      CheckEnv env = build_check_env(s, t, h);
      DirectionProof d = exact_restricted(env, h);
      d.elapsed = std::chrono::duration_cast<Millis>(std::chrono::steady_clock::now() - start);
      return d;
    });
  }

 private:
  template <class Direction>
  EquivalenceVerdict run_both(const FormalStatement& t1, const FormalStatement& t2, SessionHandle& session,
                              Direction direction) {
    EquivalenceVerdict v;
    const char* stage = "forward";
    try {
      v.forward = direction(t1, t2, session);
      bool forward_blocks = !v.forward.success || (config_.triviality_guard && v.forward.trivially_provable);
      if (!(config_.short_circuit && forward_blocks)) {
        stage = "backward";
        v.backward = direction(t2, t1, session);
      }
    } catch (const Error& e) {
      v.verdict = Verdict::Error;
      v.error = std::string(stage) + ": " + e.what();
      return v;
    }
    v.verdict = combine_directions(v.forward, v.backward, config_.triviality_guard);
    return v;
  }

  void rebuild(CheckEnv& env, SessionHandle& session) {
    MergedContext ctx = merge_contexts(env.source.context, env.target.context);
    env.context_env = backend_.ensure_header(session, ctx.imports);
    if (!ctx.body.empty()) {
      ReplResult r = backend_.run_command(session, ctx.body, env.context_env, config_.command_timeout);
      if (!closed(r) || !r.env) throw Error(ErrorCode::ContextClash, "merged context does not elaborate");
      env.context_env = r.env;
    }
    ReplResult r = backend_.run_command(session, env.source_decl + std::string(kSorrySuffix), env.context_env,
                                        config_.command_timeout);
    if (!closed(r) || !r.env) throw Error(ErrorCode::ContextClash, "source statement does not elaborate in merged context");
    env.source_env = r.env;
    env.source_goal = !r.sorries.empty() && !r.sorries.front().goal.empty()
                          ? goal_to_proposition(r.sorries.front().goal)
                          : signature_to_proposition(env.source_decl);
  }

  // One proof attempt. A timeout fails only this attempt: the session is
  // restarted and the check environment rebuilt before returning.
  std::optional<ReplResult> attempt(CheckEnv& env, SessionHandle& session, const std::string& cmd, bool with_source) {
    try {
      return backend_.run_command(session, cmd, with_source ? env.source_env : env.context_env,
                                  config_.per_attempt_timeout);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::CommandTimeout) throw;
      backend_.restart(session);
      rebuild(env, session);
      return std::nullopt;
    }
  }

  // Standalone-provability probe: can the closure arsenal prove the target
  // with the source theorem absent?
  bool provable_without_source(CheckEnv& env, SessionHandle& session) {
    std::string cmd =
        proof_command(env.target_decl, {closure_line(config_.closure_tactics, config_.max_closure_rounds)});
    auto r = attempt(env, session, cmd, /*with_source=*/false);
    return r && closed(*r);
  }

  ProverBackend& backend_;
  BeqConfig config_;
};

}  // namespace beqh::beq
