#pragma once

// Theorem pairs shipped with the Lean project under lean_fixture/. Only the
// toolchain-gated integration tests consume them.

#include <string>
#include <string_view>
#include <vector>

#include "beqh/core.hpp"

namespace beqh::fixture {

enum class Expected { Equivalent, NotProven, TrivialityFlagged };

inline std::string_view to_string(Expected e) {
  switch (e) {
    case Expected::Equivalent: return "Equivalent";
    case Expected::NotProven: return "NotProven";
    case Expected::TrivialityFlagged: return "TrivialityFlagged";
  }
  return "?";
}

inline Verdict to_verdict(Expected e) {
  switch (e) {
    case Expected::Equivalent: return Verdict::Equivalent;
    case Expected::NotProven: return Verdict::NotProven;
    case Expected::TrivialityFlagged: return Verdict::TrivialityFlagged;
  }
  return Verdict::Error;
}

struct FixturePair {
  std::string name;
  std::string t1_src;  // full declaration with a sorry proof
  std::string t2_src;
  Expected expected = Expected::Equivalent;
};

/// Header every fixture source elaborates under.
inline constexpr std::string_view kHeader = "import Mathlib";

inline const std::vector<FixturePair>& fixture_manifest() {
  static const std::vector<FixturePair> pairs = {
      {"identity_flt",
       "theorem fx_flt (n : ℕ) (hn : 2 < n) (a b c : ℕ) (ha : 0 < a) (hb : 0 < b) (hc : 0 < c) :\n    a ^ n + b ^ n ≠ c ^ n := sorry",
       "theorem fx_flt' (n : ℕ) (hn : 2 < n) (a b c : ℕ) (ha : 0 < a) (hb : 0 < b) (hc : 0 < c) :\n    a ^ n + b ^ n ≠ c ^ n := sorry",
       Expected::Equivalent},
      {"alpha_rename_flt",
       "theorem fx_flt_alpha_1 (n : ℕ) (hn : 2 < n) (a b c : ℕ) (ha : 0 < a) (hb : 0 < b) (hc : 0 < c) :\n    a ^ n + b ^ n ≠ c ^ n := sorry",
       "theorem fx_flt_alpha_2 (k : ℕ) (hk : 2 < k) (x y z : ℕ) (hx : 0 < x) (hy : 0 < y) (hz : 0 < z) :\n    x ^ k + y ^ k ≠ z ^ k := sorry",
       Expected::Equivalent},
      {"hypothesis_order_flt",
       "theorem fx_flt_order_1 (n : ℕ) (hn : 2 < n) (a b c : ℕ) (ha : 0 < a) (hb : 0 < b) (hc : 0 < c) :\n    a ^ n + b ^ n ≠ c ^ n := sorry",
       "theorem fx_flt_order_2 (a b c n : ℕ) (ha : 0 < a) (hb : 0 < b) (hc : 0 < c) (hn : 2 < n) :\n    a ^ n + b ^ n ≠ c ^ n := sorry",
       Expected::Equivalent},
      {"binder_vs_forall_goldbach",
       "theorem fx_goldbach_1 (n : ℕ) (hn : 2 < n) (he : Even n) :\n    ∃ p q : ℕ, p.Prime ∧ q.Prime ∧ n = p + q := sorry",
       "theorem fx_goldbach_2 : ∀ n : ℕ, 2 < n → Even n →\n    ∃ p q : ℕ, p.Prime ∧ q.Prime ∧ n = p + q := sorry",
       Expected::Equivalent},
      {"alpha_rename_twin_primes",
       "theorem fx_twin_1 : Set.Infinite {p : ℕ | p.Prime ∧ (p + 2).Prime} := sorry",
       "theorem fx_twin_2 : Set.Infinite {q : ℕ | Nat.Prime q ∧ Nat.Prime (q + 2)} := sorry",
       Expected::Equivalent},
      {"identity_infinite_primes",
       "theorem fx_primes_id_1 : Set.Infinite {p : ℕ | Nat.Prime p ∧ p % 6 = 5} := sorry",
       "theorem fx_primes_id_2 : Set.Infinite {p : ℕ | Nat.Prime p ∧ p % 6 = 5} := sorry",
       Expected::Equivalent},
      {"gaussian_divisibility",
       "theorem fx_gauss_gt (a b : ℤ) :\n    (a : GaussianInt) ∣ (b : GaussianInt) → a ∣ b := sorry",
       "theorem fx_gauss_pred (a b : ℤ) (ha : a ∣ b) : a ∣ (b : ℤ) := sorry",
       Expected::TrivialityFlagged},
      {"generic_assumption",
       "theorem fx_sorg_gt (n : Nat) : n + n = 2 * n := sorry",
       "theorem fx_sorg_pred (p : Prop) (h : p) : p := sorry",
       Expected::TrivialityFlagged},
      {"infinite_primes_mod_six",
       "theorem fx_primes_gt : Infinite {p : Nat.Primes // (p : ℤ) ≡ -1 [ZMOD 6]} := sorry",
       "theorem fx_primes_pred : Set.Infinite {p : ℕ | Nat.Prime p ∧ p % 6 = 5} := sorry",
       Expected::NotProven},
      {"goldbach_vs_twin_primes",
       "theorem fx_unrelated_1 (n : ℕ) (hn : 2 < n) (he : Even n) :\n    ∃ p q : ℕ, p.Prime ∧ q.Prime ∧ n = p + q := sorry",
       "theorem fx_unrelated_2 : Set.Infinite {p : ℕ | p.Prime ∧ (p + 2).Prime} := sorry",
       Expected::NotProven},
  };
  return pairs;
}

/// Parsed statements of a pair, ready for the equivalence engine.
inline std::pair<FormalStatement, FormalStatement> statements(const FixturePair& p) {
  std::string header(kHeader);
  FormalStatement a = parse_serialized(p.t1_src, Origin::Reference);
  FormalStatement b = parse_serialized(p.t2_src, Origin::Prediction);
  a.context = b.context = header;
  return {a, b};
}

}  // namespace beqh::fixture
