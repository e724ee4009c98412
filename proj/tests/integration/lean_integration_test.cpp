#include <gtest/gtest.h>

#include "integration/fixture_checks.hpp"

using namespace beqh::test_support;

TEST(LeanIntegration, FixturePairs) {
  auto project = lean_project();
  if (!project) GTEST_SKIP() << "set BEQH_LEAN_PROJECT to a Lean project with the fixture and a built REPL";
  check_fixture_against_lean(*project);
}
