#pragma once

// Reference implementations for the selection methods, written independently
// of the library: brute-force majority, a direct BLEU and transitive closure.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "beqh/lexer.hpp"
#include "beqh/pipeline.hpp"

namespace beqh::test_support {

CandidatePool pool_of(const std::vector<std::string>& raws, const std::string& id = "p") {
  CandidatePool p;
  p.problem_id = id;
  for (std::size_t i = 0; i < raws.size(); ++i) {
    Candidate c;
    c.index = i;
    c.raw_text = raws[i];
    p.candidates.push_back(c);
  }
  pipeline::clean_pool(p);
  return p;
}

// Independent BLEU: n-grams keyed by joined strings, precisions multiplied
// directly instead of summed in log space.
double oracle_bleu(const std::vector<std::string>& h, const std::vector<std::string>& r) {
  if (h.empty()) return 0.0;
  auto grams = [](const std::vector<std::string>& t, std::size_t n) {
    std::unordered_map<std::string, int> m;
    for (std::size_t i = 0; i + n <= t.size(); ++i) {
      std::string k;
      for (std::size_t j = i; j < i + n; ++j) k += t[j] + '\x1f';
      ++m[k];
    }
    return m;
  };
  double prod = 1.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    auto hg = grams(h, n), rg = grams(r, n);
    double clipped = 0, total = 0;
    for (auto& [k, c] : hg) {
      total += c;
      clipped += std::min(c, rg.count(k) ? rg[k] : 0);
    }
    double p = n == 1 ? clipped / total : (clipped + 1) / (total + 1);
    prod *= p;
  }
  double bp = h.size() < r.size() ? std::exp(1.0 - double(r.size()) / double(h.size())) : 1.0;
  return bp * std::pow(prod, 0.25);
}

// Candidate statements drawn from a small space so pools contain repeats.
std::string random_statement(std::mt19937& rng) {
  static const std::vector<std::string> vars = {"x", "y", "n"};
  static const std::vector<std::string> types = {"ℕ", "ℤ", "ℝ"};
  static const std::vector<std::string> rels = {"=", "≤", "<"};
  static const std::vector<std::string> rhs = {"x + 1", "2 * y", "n ^ 2", "0"};
  std::string v = vars[rng() % vars.size()];
  std::string s = "theorem gen_" + std::to_string(rng() % 1000) + " (" + v + " : " + types[rng() % types.size()] + ")";
  if (rng() % 3 == 0) s += " (h : 0 < " + v + ")";
  s += (rng() % 2 ? " : " : "  :  ") + v + " " + rels[rng() % rels.size()] + " " + rhs[rng() % rhs.size()];
  switch (rng() % 3) {
    case 0: s += " := by simp"; break;
    case 1: s += " := sorry"; break;
    default: break;
  }
  return s;
}

// Tokens of a cleaned statement without its name, compared pairwise.
std::vector<std::string> nameless(const Candidate& c) {
  auto t = lex::word_tokens(c.cleaned->signature_src);
  t.erase(t.begin() + 1);
  return t;
}

// Self-BLEU compares statements with the name slot neutralised.
std::vector<std::string> bleu_tokens(const Candidate& c) {
  auto t = lex::word_tokens(c.cleaned->signature_src);
  t[1] = "candidate";
  return t;
}

std::size_t brute_majority(const CandidatePool& pool) {
  std::size_t best = 0, best_count = 0;
  for (std::size_t i = 0; i < pool.candidates.size(); ++i) {
    std::size_t count = 0;
    for (const auto& o : pool.candidates) count += nameless(o) == nameless(pool.candidates[i]);
    if (count > best_count) {
      best = i;
      best_count = count;
    }
  }
  return best;
}

std::vector<std::size_t> closure_partition(std::size_t n, const std::function<bool(std::size_t, std::size_t)>& rel) {
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    reach[i][i] = true;
    for (std::size_t j = i + 1; j < n; ++j) reach[i][j] = reach[j][i] = rel(i, j);
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) reach[i][j] = reach[i][j] || (reach[i][k] && reach[k][j]);
    }
  }
  std::vector<std::size_t> cls(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      if (reach[i][j]) {
        cls[i] = j;
        break;
      }
    }
  }
  return cls;
}

}  // namespace beqh::test_support
