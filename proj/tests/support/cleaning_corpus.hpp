#pragma once

// Statements whose text contains `:=`, `by`, brackets or constructors nested
// below the top level. `statement` is the exact strip_proof output.

#include <string>
#include <vector>

namespace beqh::test_support {

struct CorpusCase {
  std::string raw;
  std::string statement;
};

inline const std::vector<CorpusCase>& cleaning_corpus() {
  static const std::vector<CorpusCase> cases = {
      {"theorem t01 (x : ℕ := 3) : x = 3 := by rfl",
       "theorem t01 (x : ℕ := 3) : x = 3"},
      {"theorem t02 : ({ fst := 1, snd := 2 } : ℕ × ℕ).1 = 1 := rfl",
       "theorem t02 : ({ fst := 1, snd := 2 } : ℕ × ℕ).1 = 1"},
      {"theorem t03 : (⟨1, by decide⟩ : Fin 3).val = 1 := by\n  rfl",
       "theorem t03 : (⟨1, by decide⟩ : Fin 3).val = 1"},
      {"theorem t04 : (fun x : ℕ => x + 1) 2 = 3 := by norm_num",
       "theorem t04 : (fun x : ℕ => x + 1) 2 = 3"},
      {"theorem t05 : let y := 2; y + y = 4 := by\n  intro y\n  rfl",
       "theorem t05 : let y := 2; y + y = 4"},
      {"theorem t06 (f : ℕ → ℕ) (hf : ∀ x, f x = (let z := x; z + 1)) : f 0 = 1 := by simp [hf]",
       "theorem t06 (f : ℕ → ℕ) (hf : ∀ x, f x = (let z := x; z + 1)) : f 0 = 1"},
      {"theorem t07 {G : Type*} [Group G] (a b : G) (h : a * b = b * a) :\n    a⁻¹ * b = b * a⁻¹ := by\n  group",
       "theorem t07 {G : Type*} [Group G] (a b : G) (h : a * b = b * a) :\n    a⁻¹ * b = b * a⁻¹"},
      {"theorem t08 : ∃ p : ℕ × ℕ, p = ⟨1, 2⟩ := ⟨_, rfl⟩",
       "theorem t08 : ∃ p : ℕ × ℕ, p = ⟨1, 2⟩"},
      {"theorem t09 ⦃a b : ℕ⦄ (h : a ≤ b) : a < b + 1 := Nat.lt_succ_of_le h",
       "theorem t09 ⦃a b : ℕ⦄ (h : a ≤ b) : a < b + 1"},
      {"theorem t10 (s : Set ℕ) (hs : s = {x | x % 2 = 0}) : 4 ∈ s := by\n  rw [hs]\n  decide",
       "theorem t10 (s : Set ℕ) (hs : s = {x | x % 2 = 0}) : 4 ∈ s"},
      {"theorem t11 (x : ℝ) (h : |x - 1| < 2) : x < 3 := by\n  linarith [abs_lt.mp h]",
       "theorem t11 (x : ℝ) (h : |x - 1| < 2) : x < 3"},
      {"theorem t12 : (#[1, 2, 3] : Array ℕ).size = 3 := rfl",
       "theorem t12 : (#[1, 2, 3] : Array ℕ).size = 3"},
      {"theorem t13 (v : Fin 2 → ℕ) (hv : v = ![1, 2]) : v 0 = 1 := by simp [hv]",
       "theorem t13 (v : Fin 2 → ℕ) (hv : v = ![1, 2]) : v 0 = 1"},
      {"theorem t14 (a : ℕ) : (match a with | 0 => 1 | n + 1 => n) ≥ 0 := Nat.zero_le _",
       "theorem t14 (a : ℕ) : (match a with | 0 => 1 | n + 1 => n) ≥ 0"},
      {"theorem t15 : (have h : 1 = 1 := rfl; 2) = 2 := rfl",
       "theorem t15 : (have h : 1 = 1 := rfl; 2) = 2"},
      {"theorem t16 (α : Type) [inst : Nonempty α] : ∃ x : α, x = x := by\n  obtain ⟨x⟩ := inst\n  exact ⟨x, rfl⟩",
       "theorem t16 (α : Type) [inst : Nonempty α] : ∃ x : α, x = x"},
      {"theorem t17 (f : ℕ → ℕ) (h : f = fun n => if n = 0 then 1 else n) : f 0 = 1 := by simp [h]",
       "theorem t17 (f : ℕ → ℕ) (h : f = fun n => if n = 0 then 1 else n) : f 0 = 1"},
      {"theorem t18 : ∀ ε > (0 : ℝ), ∃ δ > 0, δ < ε := fun ε hε => ⟨ε / 2, by positivity, by linarith⟩",
       "theorem t18 : ∀ ε > (0 : ℝ), ∃ δ > 0, δ < ε"},
      {"theorem t19 (p : ℕ × ℕ) (h : p = (3, 4)) : p.1 + p.2 = 7 := by subst h; rfl",
       "theorem t19 (p : ℕ × ℕ) (h : p = (3, 4)) : p.1 + p.2 = 7"},
      {"theorem t20 (S : Finset ℕ) (hS : S = Finset.filter (fun x => x < 3) (Finset.range 10)) :\n    S.card = 3 := by\n  subst hS\n  rfl",
       "theorem t20 (S : Finset ℕ) (hS : S = Finset.filter (fun x => x < 3) (Finset.range 10)) :\n    S.card = 3"},
      {"theorem t21 -- trailing comment with := inside\n    (n : ℕ) : n + 0 = n := by simp",
       "theorem t21 -- trailing comment with := inside\n    (n : ℕ) : n + 0 = n"},
      {"theorem t22 (x : ℕ) /- a := b -/ : x = x := rfl",
       "theorem t22 (x : ℕ) /- a := b -/ : x = x"},
      {"theorem t23 (s : String) (h : s = \"a := b\") : s.length = 6 := by subst h; rfl",
       "theorem t23 (s : String) (h : s = \"a := b\") : s.length = 6"},
      {"theorem t24 (c : Char) (h : c = ':') : c.toNat = 58 := by subst h; rfl",
       "theorem t24 (c : Char) (h : c = ':') : c.toNat = 58"},
      {"theorem t25 (a b : ℤ) :\n    (Int.cast a : GaussianInt) ∣ Int.cast b → a ∣ b := by\n  sorry",
       "theorem t25 (a b : ℤ) :\n    (Int.cast a : GaussianInt) ∣ Int.cast b → a ∣ b"},
      {"theorem t26 : Infinite {p : Nat.Primes // p ≡ -1 [ZMOD 6]} :=\n  sorry",
       "theorem t26 : Infinite {p : Nat.Primes // p ≡ -1 [ZMOD 6]}"},
      {"theorem t27 (f : ℕ → ℕ) (hf : StrictMono f) : ∀ n, n ≤ f n\n  | 0 => Nat.zero_le _\n  | n + 1 => sorry",
       "theorem t27 (f : ℕ → ℕ) (hf : StrictMono f) : ∀ n, n ≤ f n\n  | 0 => Nat.zero_le _\n  | n + 1 => sorry"},
      {"theorem t28 (G : Type*) [Group G] (x : G) (hx : orderOf x = 0) :\n    Function.Injective (fun n : ℤ => x ^ n) := by\n  sorry\n\ntheorem other : True := trivial",
       "theorem t28 (G : Type*) [Group G] (x : G) (hx : orderOf x = 0) :\n    Function.Injective (fun n : ℤ => x ^ n)"},
      {"@[simp] theorem t29 {x : ℕ} (h : x ∈ ({1, 2} : Set ℕ)) : x ≤ 2 := by\n  rcases h with rfl | rfl <;> decide",
       "@[simp] theorem t29 {x : ℕ} (h : x ∈ ({1, 2} : Set ℕ)) : x ≤ 2"},
      {"theorem t30 (m : ℕ) (h : ⟪(m : ℝ), 1⟫_ℝ = 0) : m = 0 := by sorry",
       "theorem t30 (m : ℕ) (h : ⟪(m : ℝ), 1⟫_ℝ = 0) : m = 0"},
  };
  return cases;
}

}  // namespace beqh::test_support
