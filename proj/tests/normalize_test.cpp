#include <gtest/gtest.h>

#include "beqh/lexer.hpp"
#include "beqh/normalize.hpp"
#include "support/cleaning_corpus.hpp"

using namespace beqh;
using namespace beqh::normalize;

TEST(StripProof, Basic) {
  EXPECT_EQ(strip_proof("theorem T : 1 = 1 := by rfl"), "theorem T : 1 = 1");
  EXPECT_EQ(strip_proof("theorem T : 1 = 1"), "theorem T : 1 = 1");
  EXPECT_EQ(strip_proof("theorem T : (fun x => x) 1 = 1 := by simp"), "theorem T : (fun x => x) 1 = 1");
}

TEST(StripProof, TacticBlockWithoutAssign) {
  EXPECT_EQ(strip_proof("theorem T : 1 = 1 by rfl"), "theorem T : 1 = 1");
  EXPECT_EQ(strip_proof("theorem T : 1 = 1\n  where aux : True := trivial"), "theorem T : 1 = 1");
}

TEST(StripProof, StopsAtFollowingCommand) {
  EXPECT_EQ(strip_proof("theorem T : True\n\ndef x := 1"), "theorem T : True");
}

TEST(StripProof, NoDeclaration) {
  try {
    strip_proof("def d : ℕ := 1");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoDeclarationFound);
  }
}

TEST(StripProof, CorpusExact) {
  for (const auto& c : test_support::cleaning_corpus()) {
    EXPECT_EQ(strip_proof(c.raw), c.statement) << c.raw;
  }
}

// Independent check on the corpus: the statement is a prefix of the input and
// everything cut off begins at a top-level proof marker.
TEST(StripProof, CorpusNeverTruncatesMidStatement) {
  for (const auto& c : test_support::cleaning_corpus()) {
    std::string out = strip_proof(c.raw);
    ASSERT_EQ(c.raw.compare(0, out.size(), out), 0) << c.raw;
    std::string rest = c.raw.substr(out.size());
    rest.erase(0, rest.find_first_not_of(" \n"));
    bool ok = rest.empty() || rest.starts_with(":=") || rest.starts_with("| ");
    EXPECT_TRUE(ok) << c.raw;
    int depth = 0;
    for (const auto& t : lex::tokenize(out)) {
      auto txt = t.text(out);
      if (t.kind != lex::Kind::Symbol) continue;
      if (lex::is_open_bracket(txt)) ++depth;
      if (lex::is_close_bracket(txt)) --depth;
    }
    EXPECT_EQ(depth, 0) << out;
  }
}

TEST(StripProof, Idempotent) {
  for (const auto& c : test_support::cleaning_corpus()) EXPECT_EQ(strip_proof(strip_proof(c.raw)), strip_proof(c.raw));
}

TEST(Rename, Basic) {
  EXPECT_EQ(rename_theorem("theorem exercise_1_1a (x : ℝ) : x = x", "dummy_thm_0"),
            "theorem dummy_thm_0 (x : ℝ) : x = x");
  EXPECT_EQ(rename_theorem("example : 1 = 1", "dummy_thm_1"), "theorem dummy_thm_1 : 1 = 1");
  EXPECT_EQ(rename_theorem("lemma Foo.bar : True", "d"), "lemma d : True");
  EXPECT_EQ(rename_theorem("@[simp] theorem t : True", "d"), "@[simp] theorem d : True");
}

TEST(Rename, PreservesTokensOutsideName) {
  for (const auto& c : test_support::cleaning_corpus()) {
    auto before = lex::word_tokens(c.statement);
    auto after = lex::word_tokens(rename_theorem(c.statement, "dummy_thm_9"));
    ASSERT_EQ(before.size(), after.size()) << c.statement;
    int diffs = 0;
    for (std::size_t i = 0; i < before.size(); ++i) {
      if (before[i] != after[i]) {
        ++diffs;
        EXPECT_EQ(after[i], "dummy_thm_9");
      }
    }
    EXPECT_EQ(diffs, 1) << c.statement;
  }
}

TEST(Whitespace, Normalizes) {
  EXPECT_EQ(normalize_whitespace("theorem  T :\n\n  1 = 1"), "theorem T :\n1 = 1");
  EXPECT_EQ(normalize_whitespace("theorem T :\n1 = 1"), "theorem T :\n1 = 1");
  EXPECT_EQ(normalize_whitespace("\t a \t b \n"), "a b");
}

TEST(Comments, Stripped) {
  EXPECT_EQ(normalize_whitespace(strip_comments("theorem t /- c -/ : True -- tail\n")), "theorem t : True");
  EXPECT_EQ(normalize_whitespace(strip_comments("/-- doc -/\ntheorem t : True")), "theorem t : True");
  EXPECT_EQ(strip_comments("theorem t (s : String) (h : s = \"-- no\") : True"),
            "theorem t (s : String) (h : s = \"-- no\") : True");
}

TEST(CodeBlock, FirstFenceAnyTag) {
  EXPECT_EQ(extract_code_block("Here:\n```lean4\ntheorem a : True\n```\n```lean\ntheorem b : True\n```"),
            "theorem a : True\n");
  EXPECT_EQ(extract_code_block("theorem a : True"), "theorem a : True");
  EXPECT_EQ(extract_code_block("```\ntheorem a : True"), "theorem a : True");
}

TEST(Clean, FencedOutput) {
  FormalStatement s = clean("```lean\ntheorem foo : 1 = 1 := by rfl\n```", "dummy_thm_0");
  EXPECT_EQ(s.signature_src, "theorem dummy_thm_0 : 1 = 1");
  EXPECT_EQ(s.name, "dummy_thm_0");
  EXPECT_EQ(s.origin, Origin::Prediction);
}

TEST(Clean, DropsPreambleAndKeepsPoolContext) {
  FormalStatement s = clean("import Mathlib\nopen Real\n\n/-- doc -/\ntheorem x (r : ℝ) : r = r := rfl", "d", "open Real");
  EXPECT_EQ(s.signature_src, "theorem d (r : ℝ) : r = r");
  EXPECT_EQ(s.context, "open Real");
}

TEST(Clean, ProseIsRejected) {
  try {
    clean("I cannot formalize this statement.", "d");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoDeclarationFound);
  }
  EXPECT_THROW(clean("def f : ℕ → ℕ := id", "d"), Error);
}

TEST(Clean, IdenticalInputsIdenticalOutput) {
  std::string raw = "theorem a  (x : ℕ) :\n   x + 0 = x := by simp";
  EXPECT_EQ(clean(raw, "d").signature_src, clean(raw, "d").signature_src);
}

TEST(Clean, IdempotentOnCorpus) {
  for (const auto& c : test_support::cleaning_corpus()) {
    FormalStatement once = clean(c.raw, "dummy_thm_3");
    FormalStatement twice = clean(serialize_with_sorry(once), "dummy_thm_3");
    EXPECT_EQ(once.signature_src, twice.signature_src) << c.raw;
  }
}

TEST(Canonical, SpacingInsensitive) {
  EXPECT_EQ(canonical_tokens("theorem a (x:ℕ) : x=x"), canonical_tokens("theorem  a ( x : ℕ )\n: x = x"));
  EXPECT_NE(canonical_tokens("theorem a : x = y"), canonical_tokens("theorem a : y = x"));
}

TEST(Context, Modes) {
  std::string file = "def d := 1\ntheorem t : d = 1 := by rfl";
  EXPECT_EQ(prepare_context(file, ContextMode::None), "");
  EXPECT_EQ(prepare_context(file, ContextMode::FullFile), file);
  EXPECT_EQ(prepare_context(file, ContextMode::NoProofs), "def d := 1\ntheorem t : d = 1 := sorry");
  EXPECT_EQ(prepare_context(file, ContextMode::NoTheoremsProofs), "def d := 1");
}

TEST(Context, KeepsDefinitionsInstancesAndOpens) {
  std::string file =
      "import Mathlib\nopen Nat\n\nvariable {α : Type*}\n\n/-- doc -/\n@[simp] lemma l (n : ℕ) : n + 0 = n := by\n  simp\n\n"
      "instance : Inhabited ℕ := ⟨0⟩\n\ntheorem t : True := trivial\n";
  std::string no_thm = prepare_context(file, ContextMode::NoTheoremsProofs);
  EXPECT_EQ(no_thm, "import Mathlib\nopen Nat\n\nvariable {α : Type*}\n\ninstance : Inhabited ℕ := ⟨0⟩\n");
  std::string no_proofs = prepare_context(file, ContextMode::NoProofs);
  EXPECT_EQ(no_proofs,
            "import Mathlib\nopen Nat\n\nvariable {α : Type*}\n\n/-- doc -/\n@[simp] lemma l (n : ℕ) : n + 0 = n := sorry\n\n"
            "instance : Inhabited ℕ := ⟨0⟩\n\ntheorem t : True := sorry\n");
}

TEST(Context, FullFileIsIdentity) {
  for (const auto& c : test_support::cleaning_corpus()) EXPECT_EQ(prepare_context(c.raw, ContextMode::FullFile), c.raw);
}

TEST(Context, ProoflessTheoremPassesThroughWithWarning) {
  std::vector<std::string> warnings;
  warning_sink() = [&](const std::string& m) { warnings.push_back(m); };
  EXPECT_EQ(prepare_context("theorem t : True", ContextMode::NoProofs), "theorem t : True");
  warning_sink() = nullptr;
  EXPECT_EQ(warnings.size(), 1u);
}
