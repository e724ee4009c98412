#include <gtest/gtest.h>

#include <random>

#include "beqh/core.hpp"

using namespace beqh;

TEST(Utf8Length, CountsScalarValues) {
  EXPECT_EQ(utf8_length(""), 0u);
  EXPECT_EQ(utf8_length("abc"), 3u);
  EXPECT_EQ(utf8_length("∀ x : ℕ, x ≤ x"), 14u);
  EXPECT_EQ(utf8_length("⟪a, b⟫_ℝ"), 8u);
}

TEST(Serialize, AppendsSorryAndContext) {
  FormalStatement s{"foo", "open Nat", "theorem foo : 1 = 1", Origin::Reference};
  EXPECT_EQ(serialize_with_sorry(s), "open Nat\ntheorem foo : 1 = 1 := sorry");
  s.context.clear();
  EXPECT_EQ(serialize_with_sorry(s), "theorem foo : 1 = 1 := sorry");
}

TEST(Serialize, ParseRecoversNameContextAndSignature) {
  auto s = parse_serialized("import Mathlib\nopen Real\n\ntheorem bar (x : ℝ) : x = x := sorry", Origin::Prediction);
  EXPECT_EQ(s.name, "bar");
  EXPECT_EQ(s.context, "import Mathlib\nopen Real\n");
  EXPECT_EQ(s.signature_src, "theorem bar (x : ℝ) : x = x");
  EXPECT_EQ(s.origin, Origin::Prediction);
}

TEST(Serialize, NameStopsAtBinder) {
  EXPECT_EQ(parse_serialized("lemma baz(x : ℕ) : x = x := sorry").name, "baz");
  EXPECT_EQ(parse_serialized("theorem qux: True := sorry").name, "qux");
  EXPECT_EQ(parse_serialized("example : True := sorry").name, "");
}

TEST(Serialize, MissingDeclarationIsAnError) {
  try {
    parse_serialized("def x := 1");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoDeclarationFound);
  }
}

TEST(Serialize, DeclarationKeywordMustStartALine) {
  auto s = parse_serialized("-- the theorem below\ntheorem t : True := sorry");
  EXPECT_EQ(s.context, "-- the theorem below");
  EXPECT_EQ(s.name, "t");
  EXPECT_THROW(parse_serialized("def theorem_like := 1"), Error);
}

// parse_serialized inverts serialize_with_sorry for any context made of lines
// that do not open a declaration.
TEST(SerializeProperty, RoundTrip) {
  std::mt19937 rng(7);
  const std::vector<std::string> ctx_lines = {"open Nat", "variable (x : ℕ)", "def f := 2", "", "namespace Foo",
                                              "-- theorem in a comment is fine here?", "noncomputable section"};
  const std::vector<std::string> sigs = {"theorem a : True", "theorem b (n : ℕ) :\n    n = n",
                                         "lemma c {α : Type*} [Group α] (g : α) : g * 1 = g"};
  for (int iter = 0; iter < 500; ++iter) {
    std::string ctx;
    int lines = rng() % 4;
    for (int i = 0; i < lines; ++i) {
      const std::string& l = ctx_lines[rng() % ctx_lines.size()];
      if (l.starts_with("-- theorem")) continue;
      if (!ctx.empty()) ctx += '\n';
      ctx += l;
    }
    while (!ctx.empty() && ctx.back() == '\n') ctx.pop_back();
    FormalStatement s{"", ctx, sigs[rng() % sigs.size()], Origin::Synthetic};
    FormalStatement back = parse_serialized(serialize_with_sorry(s));
    EXPECT_EQ(back.signature_src, s.signature_src);
    EXPECT_EQ(back.context, s.context);
  }
}

TEST(Combine, VerdictTable) {
  EXPECT_EQ(combine_directions(true, true, false), Verdict::Equivalent);
  EXPECT_EQ(combine_directions(true, false, false), Verdict::ForwardOnly);
  EXPECT_EQ(combine_directions(false, true, false), Verdict::BackwardOnly);
  EXPECT_EQ(combine_directions(false, false, false), Verdict::NotProven);
  for (bool f : {false, true}) {
    for (bool b : {false, true}) EXPECT_EQ(combine_directions(f, b, true), Verdict::TrivialityFlagged);
  }
}

TEST(Combine, GuardOffIgnoresFlags) {
  DirectionProof f, b;
  f.success = b.success = true;
  f.trivially_provable = true;
  EXPECT_EQ(combine_directions(f, b, false), Verdict::Equivalent);
  EXPECT_EQ(combine_directions(f, b, true), Verdict::TrivialityFlagged);
}

TEST(Enums, ParseAndPrintAgree) {
  for (auto m : {ContextMode::None, ContextMode::FullFile, ContextMode::NoTheoremsProofs, ContextMode::NoProofs}) {
    EXPECT_EQ(parse_context_mode(to_string(m)), m);
  }
  EXPECT_EQ(parse_context_mode(""), ContextMode::None);
  EXPECT_FALSE(parse_context_mode("everything"));
  for (auto v : {Verdict::Equivalent, Verdict::ForwardOnly, Verdict::BackwardOnly, Verdict::NotProven,
                 Verdict::TrivialityFlagged, Verdict::Error}) {
    EXPECT_EQ(parse_verdict(to_string(v)), v);
  }
  EXPECT_FALSE(parse_verdict("equivalent"));
}

TEST(ErrorType, CarriesCodeAndPrefix) {
  Error e(ErrorCode::SchemaError, "line 3: field 'id' is missing");
  EXPECT_EQ(e.code(), ErrorCode::SchemaError);
  EXPECT_STREQ(e.what(), "SchemaError: line 3: field 'id' is missing");
}

TEST(TypeCheck, WellTypedKinds) {
  TypeCheckStatus s;
  for (auto [k, ok] : {std::pair{TypeCheckKind::WellTypedWithSorry, true}, {TypeCheckKind::WellTypedComplete, true},
                       {TypeCheckKind::IllTyped, false}, {TypeCheckKind::Timeout, false},
                       {TypeCheckKind::BackendFailure, false}}) {
    s.kind = k;
    EXPECT_EQ(s.well_typed(), ok) << to_string(k);
  }
}
