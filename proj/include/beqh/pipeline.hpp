#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "beqh/beq.hpp"
#include "beqh/core.hpp"
#include "beqh/lexer.hpp"
#include "beqh/normalize.hpp"
#include "beqh/prover.hpp"

namespace beqh::pipeline {

inline constexpr std::size_t kMaxSymbolicCandidates = 50;

inline std::string dummy_name(std::size_t index) { return "dummy_thm_" + std::to_string(index); }

// --- cleaning and filtering --------------------------------------------------------

/// Cleans every candidate in place. Outputs without a declaration are marked
/// ill-typed so they count against the type-check rate.
inline void clean_pool(CandidatePool& pool) {
  for (auto& c : pool.candidates) {
    if (c.cleaned || c.typecheck) continue;
    try {
      c.cleaned = normalize::clean(c.raw_text, dummy_name(c.index), pool.context);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoDeclarationFound) throw;
      c.typecheck = TypeCheckStatus{TypeCheckKind::IllTyped, {{Severity::Error, std::nullopt, std::nullopt, e.what()}}};
    }
  }
}

/// Elaborates `stmt := sorry` on top of its context. Imports go through the
/// session header; the rest of the context is sent with the statement.
inline TypeCheckStatus typecheck(ProverBackend& backend, SessionHandle& session, const FormalStatement& stmt,
                                 Millis timeout = kDefaultCommandTimeout) {
  auto failure = [](TypeCheckKind kind, const std::string& msg) {
    return TypeCheckStatus{kind, {{Severity::Error, std::nullopt, std::nullopt, msg}}};
  };
  beq::MergedContext ctx = beq::merge_contexts(stmt.context, {});
  std::string src = ctx.body.empty() ? std::string() : ctx.body + "\n";
  src += stmt.signature_src;
  src += kSorrySuffix;
  try {
    auto env = backend.ensure_header(session, ctx.imports);
    return classify(backend.run_command(session, src, env, timeout));
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::ContextClash:
        return failure(TypeCheckKind::IllTyped, e.what());
      case ErrorCode::CommandTimeout:
        backend.restart(session);
        return failure(TypeCheckKind::Timeout, e.what());
      case ErrorCode::SessionDead:
      case ErrorCode::ProtocolError:
        normalize::detail::warn(std::string("type-check backend failure: ") + e.what());
        try {
          backend.restart(session);
        } catch (const Error&) {
        }
        return failure(TypeCheckKind::BackendFailure, e.what());
      default:
        throw;
    }
  }
}

/// Type-checks every cleaned candidate not yet checked and returns the
/// well-typed ones in generation order.
inline CandidatePool filter_well_typed(CandidatePool& pool, ProverBackend& backend, SessionHandle& session,
                                       Millis timeout = kDefaultCommandTimeout) {
  clean_pool(pool);
  CandidatePool out = pool;
  out.candidates.clear();
  for (auto& c : pool.candidates) {
    if (!c.typecheck) c.typecheck = typecheck(backend, session, *c.cleaned, timeout);
    if (c.typecheck->well_typed()) out.candidates.push_back(c);
  }
  return out;
}

// --- selection ------------------------------------------------------------------------

struct Selection {
  std::size_t position = 0;  // index into the pool passed to the selector
  Candidate candidate;
  bool tie_break_applied = false;
  bool budget_exhausted = false;
  std::size_t pair_checks = 0;
};

inline void require_non_empty(const CandidatePool& pool) {
  if (pool.candidates.empty()) throw Error(ErrorCode::EmptyPool, "pool " + pool.problem_id + " has no candidates");
}

inline Selection make_selection(const CandidatePool& pool, std::size_t pos, bool tie) {
  Selection s;
  s.position = pos;
  s.candidate = pool.candidates[pos];
  s.tie_break_applied = tie;
  return s;
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/// Seeded uniform choice. The stream depends on the seed and the problem id,
/// so results do not depend on the order in which problems are processed.
inline Selection select_random(const CandidatePool& pool, std::uint64_t seed) {
  require_non_empty(pool);
  std::mt19937_64 rng(seed ^ fnv1a(pool.problem_id));
  // Rejection sampling keeps the draw uniform and identical across standard
  // libraries (distribution objects are implementation-defined).
  const std::uint64_t n = pool.candidates.size();
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return make_selection(pool, static_cast<std::size_t>(x % n), false);
}

/// Grouping key for majority voting: the cleaned statement with its name
/// neutralised and spacing canonicalised.
inline std::string majority_key(const Candidate& c) {
  if (!c.cleaned) return "\x01raw:" + c.raw_text;
  return normalize::canonical_tokens(normalize::rename_theorem(c.cleaned->signature_src, "candidate"));
}

inline Selection select_majority(const CandidatePool& pool) {
  require_non_empty(pool);
  std::map<std::string, std::pair<std::size_t, std::size_t>> groups;  // key -> (count, first position)
  for (std::size_t i = 0; i < pool.candidates.size(); ++i) {
    auto [it, fresh] = groups.try_emplace(majority_key(pool.candidates[i]), 0, i);
    ++it->second.first;
  }
  std::size_t best_count = 0, best_pos = 0;
  for (const auto& [key, g] : groups) {
    if (g.first > best_count || (g.first == best_count && g.second < best_pos)) {
      best_count = g.first;
      best_pos = g.second;
    }
  }
  std::size_t top = 0;
  for (const auto& [key, g] : groups) top += g.first == best_count;
  return make_selection(pool, best_pos, top > 1);
}

// --- BLEU ----------------------------------------------------------------------------

/// Sentence BLEU up to 4-grams with a brevity penalty. Unigram precision is
/// unsmoothed; higher orders use add-one smoothing.
inline double bleu(const std::vector<std::string>& hyp, const std::vector<std::string>& ref) {
  if (hyp.empty()) return 0.0;
  constexpr int kMaxOrder = 4;
  double log_sum = 0.0;
  for (int n = 1; n <= kMaxOrder; ++n) {
    std::map<std::vector<std::string>, std::size_t> ref_counts, hyp_counts;
    auto count = [n](const std::vector<std::string>& toks, auto& into) {
      for (std::size_t i = 0; i + n <= toks.size(); ++i) ++into[{toks.begin() + i, toks.begin() + i + n}];
    };
    count(ref, ref_counts);
    count(hyp, hyp_counts);
    std::size_t matches = 0, total = 0;
    for (const auto& [gram, c] : hyp_counts) {
      total += c;
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) matches += std::min(c, it->second);
    }
    double p = n == 1 ? static_cast<double>(matches) / static_cast<double>(total)
                      : static_cast<double>(matches + 1) / static_cast<double>(total + 1);
    if (p == 0.0) return 0.0;
    log_sum += std::log(p);
  }
  double c = static_cast<double>(hyp.size()), r = static_cast<double>(ref.size());
  double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
  return bp * std::exp(log_sum / kMaxOrder);
}

inline std::vector<double> self_bleu_scores(const CandidatePool& pool) {
  std::vector<std::vector<std::string>> toks;
  for (const auto& c : pool.candidates) {
    toks.push_back(lex::word_tokens(c.cleaned ? c.cleaned->signature_src : c.raw_text));
  }
  // Names differ per candidate (dummy_thm_i); compare without them.
  for (auto& t : toks) {
    if (t.size() >= 2 && (t[0] == "theorem" || t[0] == "lemma")) t[1] = "candidate";
  }
  std::vector<double> scores(toks.size(), 0.0);
  for (std::size_t i = 0; i < toks.size(); ++i) {
    std::vector<double> parts;
    for (std::size_t j = 0; j < toks.size(); ++j) {
      if (i != j) parts.push_back(bleu(toks[i], toks[j]));
    }
    // Summing in sorted order makes the score a function of the multiset of
    // pairwise values, so identical candidates tie exactly.
    std::sort(parts.begin(), parts.end());
    scores[i] = std::accumulate(parts.begin(), parts.end(), 0.0);
  }
  return scores;
}

inline Selection select_self_bleu(const CandidatePool& pool) {
  require_non_empty(pool);
  auto scores = self_bleu_scores(pool);
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  auto top = std::count(scores.begin(), scores.end(), scores[best]);
  return make_selection(pool, best, top > 1);
}

// --- symbolic equivalence ---------------------------------------------------------------

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // The smaller root wins, so every class is represented by its earliest member.
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::size_t> parent_;
};

using PairList = std::vector<std::pair<std::size_t, std::size_t>>;
/// Decides a batch of (i, j) position pairs; result[k] is true when pair k is
/// equivalent. Batches may be evaluated concurrently.
using BatchOracle = std::function<std::vector<bool>(const PairList&)>;

inline BatchOracle sequential_oracle(std::function<bool(std::size_t, std::size_t)> pair) {
  return [pair = std::move(pair)](const PairList& pairs) {
    std::vector<bool> out;
    out.reserve(pairs.size());
    for (auto [i, j] : pairs) out.push_back(pair(i, j));
    return out;
  };
}

struct Partition {
  std::vector<std::size_t> class_of;  // earliest member of each position's class
  std::size_t pair_checks = 0;
  bool budget_exhausted = false;
};

/// Equivalence classes by union-find over pairwise verdicts. Row i checks only
/// the j > i not already connected to i when the row starts; a batch result
/// is merged in index order, so the partition is independent of evaluation
/// order and equals the one of the fully sequential sweep.
inline Partition equivalence_classes(std::size_t n, const BatchOracle& oracle,
                                     std::size_t max_pair_checks = std::numeric_limits<std::size_t>::max()) {
  Partition p;
  UnionFind uf(n);
  for (std::size_t i = 0; i < n && !p.budget_exhausted; ++i) {
    PairList row;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (uf.find(i) == uf.find(j)) continue;
      if (p.pair_checks + row.size() >= max_pair_checks) {
        p.budget_exhausted = true;
        break;
      }
      row.emplace_back(i, j);
    }
    if (row.empty()) continue;
    auto verdicts = oracle(row);
    p.pair_checks += row.size();
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (verdicts.at(k)) uf.unite(row[k].first, row[k].second);
    }
  }
  p.class_of.resize(n);
  for (std::size_t i = 0; i < n; ++i) p.class_of[i] = uf.find(i);
  return p;
}

/// Earliest member of the largest class; ties go to the class whose earliest
/// member comes first. Only the first `max_candidates` are considered.
inline Selection select_symbolic_equiv(const CandidatePool& pool, const BatchOracle& oracle,
                                       std::size_t max_candidates = kMaxSymbolicCandidates,
                                       std::size_t max_pair_checks = std::numeric_limits<std::size_t>::max()) {
  require_non_empty(pool);
  std::size_t n = std::min(pool.candidates.size(), max_candidates);
  Partition part = equivalence_classes(n, oracle, max_pair_checks);
  std::map<std::size_t, std::size_t> sizes;
  for (auto root : part.class_of) ++sizes[root];
  std::size_t best_root = 0, best_size = 0, top = 0;
  for (const auto& [root, size] : sizes) {  // ascending root = ascending earliest member
    if (size > best_size) {
      best_root = root;
      best_size = size;
      top = 1;
    } else if (size == best_size) {
      ++top;
    }
  }
  Selection s = make_selection(pool, best_root, top > 1);
  s.budget_exhausted = part.budget_exhausted;
  s.pair_checks = part.pair_checks;
  return s;
}

/// Pairwise BEq+ on one session, short-circuiting on a failed forward direction.
inline Selection select_symbolic_equiv(const CandidatePool& pool, beq::BeqEngine& engine, SessionHandle& session,
                                       std::size_t max_candidates = kMaxSymbolicCandidates) {
  auto pair = [&](std::size_t i, std::size_t j) {
    const auto& a = pool.candidates[i].cleaned;
    const auto& b = pool.candidates[j].cleaned;
    if (!a || !b) return false;
    return engine.beq_plus(*a, *b, session).verdict == Verdict::Equivalent;
  };
  return select_symbolic_equiv(pool, sequential_oracle(pair), max_candidates);
}

// --- selection log ------------------------------------------------------------------------

enum class Method { Greedy, Random, Majority, SelfBleu, SymbolicEquiv };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::Greedy: return "greedy";
    case Method::Random: return "random";
    case Method::Majority: return "majority";
    case Method::SelfBleu: return "self_bleu";
    case Method::SymbolicEquiv: return "symbolic_equiv";
  }
  return "?";
}

inline std::optional<Method> parse_method(std::string_view s) {
  for (Method m : {Method::Greedy, Method::Random, Method::Majority, Method::SelfBleu, Method::SymbolicEquiv}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

inline ordered_json selection_log_entry(const std::string& problem_id, Method method,
                                        const std::optional<Selection>& sel, std::size_t pool_size,
                                        std::size_t survivors) {
  ordered_json j;
  j["problem_id"] = problem_id;
  j["method"] = std::string(to_string(method));
  j["chosen_index"] = sel ? ordered_json(sel->candidate.index) : ordered_json(nullptr);
  j["pool_size"] = pool_size;
  j["survivors"] = survivors;
  j["tie_break_applied"] = sel && sel->tie_break_applied;
  if (sel && sel->budget_exhausted) j["budget_exhausted"] = true;
  return j;
}

}  // namespace beqh::pipeline
