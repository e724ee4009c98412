#pragma once

// A responder for ScriptedBackend that imitates just enough of Lean for the
// equivalence engine and the pipeline: environments remember which statement
// was declared as `src_thm`, and proof attempts succeed according to a planted
// relation between source and target statements.

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "beqh/prover.hpp"

namespace beqh::test_support {

enum class Route { None, Exact, Apply, Convert, ApplyRules };

struct Plan {
  Route route = Route::None;
  int convert_depth = 0;  // Convert only: smallest k that closes
};

using Relation = std::function<Plan(const std::string& source, const std::string& target)>;

class MockLean {
 public:
  explicit MockLean(Relation relation, std::function<bool(const std::string&)> trivially_true = {})
      : relation_(std::move(relation)), trivially_true_(std::move(trivially_true)) {}

  ScriptedBackend::Responder responder() {
    return [this](std::string_view src, std::optional<int> env) { return respond(std::string(src), env); };
  }

  ScriptedBackend backend(std::vector<TranscriptEntry> transcript = {}) {
    return ScriptedBackend(std::move(transcript), responder());
  }

  /// Pretty-printed goal of `binders : body`, one hypothesis per line as the
  /// REPL reports it; instance binders become `inst✝ : C`.
  static std::string goal_of(const std::string& stmt) {
    std::string goal;
    std::size_t i = 0;
    auto skip_space = [&] {
      while (i < stmt.size() && stmt[i] == ' ') ++i;
    };
    skip_space();
    while (i < stmt.size() && (stmt[i] == '(' || stmt[i] == '{' || stmt[i] == '[')) {
      std::size_t start = i, depth = 0;
      do {
        if (stmt[i] == '(' || stmt[i] == '{' || stmt[i] == '[') ++depth;
        if (stmt[i] == ')' || stmt[i] == '}' || stmt[i] == ']') --depth;
        ++i;
      } while (i < stmt.size() && depth > 0);
      std::string inner = stmt.substr(start + 1, i - start - 2);
      auto colon = inner.find(" : ");
      if (stmt[start] == '[') {
        goal += (colon == std::string::npos ? "inst✝ : " + inner : inner) + "\n";
      } else if (colon != std::string::npos) {
        goal += inner + "\n";
      }
      skip_space();
    }
    std::string body = stmt.substr(i);
    if (body.rfind(": ", 0) == 0) body = body.substr(2);
    return goal + "⊢ " + body;
  }

  static std::string statement_after(const std::string& text, const std::string& head, const std::string& tail) {
    auto b = text.find(head);
    if (b == std::string::npos) return {};
    b += head.size();
    auto e = text.find(tail, b);
    return normalize_request(text.substr(b, e == std::string::npos ? std::string::npos : e - b));
  }

 private:
  static ordered_json msg(const char* severity, const std::string& data) {
    return {{"severity", severity}, {"pos", {{"line", 1}, {"column", 0}}}, {"data", data}};
  }

  ordered_json reply(std::optional<std::string> declared, ordered_json messages = ordered_json::array()) {
    int id = next_env_++;
    env_source_[id] = std::move(declared);
    ordered_json r;
    r["env"] = id;
    if (!messages.empty()) r["messages"] = std::move(messages);
    return r;
  }

  std::optional<std::string> source_in(std::optional<int> env) const {
    if (!env) return std::nullopt;
    auto it = env_source_.find(*env);
    return it == env_source_.end() ? std::nullopt : it->second;
  }

  std::optional<ordered_json> respond(const std::string& src, std::optional<int> env) {
    std::lock_guard lock(mu_);
    auto inherited = source_in(env);
    if (src.find("CLASH") != std::string::npos) {
      return reply(inherited, ordered_json::array({msg("error", "unknown constant 'CLASH'")}));
    }
    if (src.rfind("import", 0) == 0) return reply(std::nullopt);

    const std::string sorry = " := sorry";
    bool ends_sorry = src.size() >= sorry.size() && src.compare(src.size() - sorry.size(), sorry.size(), sorry) == 0;
    if (ends_sorry && src.find("theorem src_thm") != std::string::npos) {
      std::string stmt = statement_after(src, "theorem src_thm", sorry);
      ordered_json r = reply(stmt, ordered_json::array({msg("warning", "declaration uses 'sorry'")}));
      r["sorries"] = ordered_json::array({{{"pos", {{"line", 1}, {"column", 0}}}, {"goal", goal_of(stmt)}}});
      return r;
    }
    if (ends_sorry) {
      if (src.find("ILL") != std::string::npos) {
        return reply(inherited, ordered_json::array({msg("error", "unknown identifier 'ILL'")}));
      }
      return reply(inherited, ordered_json::array({msg("warning", "declaration uses 'sorry'")}));
    }
    if (src.rfind("theorem tgt_thm", 0) != 0) return reply(inherited);  // plain context

    std::string target = statement_after(src, "theorem tgt_thm", " := by");
    bool closure = src.find("iterate ") != std::string::npos;
    bool trivial = trivially_true_ && trivially_true_(target);
    auto unsolved = ordered_json::array({msg("error", "unsolved goals\n⊢ " + target)});
    auto ok = [&] { return reply(inherited); };
    if (!inherited) {  // standalone provability probe
      return trivial ? ok() : reply(inherited, unsolved);
    }
    Plan plan = relation_(*inherited, target);

    if (src.find("apply_rules [src_thm]") != std::string::npos) {
      if (plan.route != Route::ApplyRules) return reply(inherited, ordered_json::array({msg("error", "apply_rules failed to close the goal")}));
      return closure ? ok() : reply(inherited, unsolved);
    }
    if (auto pos = src.find("convert src_thm using "); pos != std::string::npos) {
      int k = std::stoi(src.substr(pos + 22));
      if (!closure) return reply(inherited, unsolved);
      if ((plan.route == Route::Convert && k >= plan.convert_depth) || trivial) return ok();
      return reply(inherited, unsolved);
    }
    if (src.find("apply src_thm") != std::string::npos) {
      if (plan.route != Route::Apply && !trivial) {
        return reply(inherited, ordered_json::array({msg("error", "failed to unify")}));
      }
      return closure ? ok() : reply(inherited, unsolved);
    }
    if (src.find("exact?") != std::string::npos) {
      if (plan.route == Route::Exact) return reply(inherited, ordered_json::array({msg("info", "Try this: exact src_thm")}));
      if (trivial) return reply(inherited, ordered_json::array({msg("info", "Try this: exact h")}));
      return reply(inherited, ordered_json::array({msg("error", "`exact?` could not close the goal")}));
    }
    return reply(inherited, ordered_json::array({msg("error", "unexpected tactic")}));
  }

  Relation relation_;
  std::function<bool(const std::string&)> trivially_true_;
  std::mutex mu_;
  int next_env_ = 0;
  std::map<int, std::optional<std::string>> env_source_;
};

/// Statements `theorem x : cls_<K>_<tag> ...` are related by class K; the
/// route comes from `route_for(K)`.
inline Relation class_relation(std::function<Plan(int)> route_for) {
  return [route_for = std::move(route_for)](const std::string& source, const std::string& target) {
    auto cls = [](const std::string& s) -> std::optional<int> {
      auto p = s.find("cls_");
      if (p == std::string::npos) return std::nullopt;
      return std::stoi(s.substr(p + 4));
    };
    auto a = cls(source), b = cls(target);
    if (!a || !b || *a != *b) return Plan{};
    return route_for(*a);
  };
}

}  // namespace beqh::test_support
