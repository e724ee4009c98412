#pragma once

// A synthetic autoformalization set whose Type-Check, BEq_L and BEq+ outcomes
// are fixed in advance. Statements carry a class tag `cls_<K>_...`; the mock
// prover relates statements of the same class by the route planted for K.

#include <filesystem>
#include <string>
#include <vector>

#include "beqh/dataset.hpp"
#include "support/mock_lean.hpp"
#include "support/test_util.hpp"

namespace beqh::test_support {

struct PlantedSet {
  std::size_t problems = 0;
  std::size_t type_checked = 0;
  std::size_t beq_l = 0;
  std::size_t beq_plus = 0;
  std::vector<Plan> routes;  // by problem index
};

inline Plan planted_route(std::size_t problem) {
  switch (problem % 10) {
    case 0: case 1: return {Route::None};  // problems 0 and 1 never type-check
    case 2: case 3: return {Route::Exact};
    case 4: return {Route::Apply};
    case 5: return {Route::Convert, 2};
    case 6: return {Route::Convert, 5};
    case 7: return {Route::ApplyRules};
    default: return {Route::None};
  }
}

inline bool planted_untypeable(std::size_t problem) { return problem % 10 < 2; }

/// Writes pools.jsonl, refs.jsonl and labels.jsonl into `dir`.
inline PlantedSet write_planted_set(const std::filesystem::path& dir, std::size_t problems = 20,
                                    std::size_t pool_size = 6) {
  PlantedSet set;
  set.problems = problems;
  std::vector<nlohmann::ordered_json> pools, refs, labels;
  for (std::size_t i = 0; i < problems; ++i) {
    std::string id = "prob" + std::to_string(i);
    std::string cls = "cls_" + std::to_string(i);
    Plan plan = planted_route(i);
    set.routes.push_back(plan);
    bool untypeable = planted_untypeable(i);
    nlohmann::ordered_json cands = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < pool_size; ++c) {
      bool ill = untypeable || c % 3 == 1;
      std::string var = std::string(1, static_cast<char>('a' + c % 3));
      std::string text = "theorem cand" + std::to_string(c) + " (" + var + " : ℕ) : " + cls + "_" +
                         (ill ? "ILL" : "ok") + " " + var + " = " + var + " := by\n  sorry";
      cands.push_back(text);
    }
    pools.push_back({{"problem_id", id},
                     {"informal", "Planted problem " + std::to_string(i) + "."},
                     {"candidates", cands},
                     {"gen_config", {{"temperature", 0.8}, {"num_samples", pool_size}, {"model_id", "planted"}}}});
    refs.push_back({{"problem_id", id}, {"reference", "theorem ref" + std::to_string(i) + " (n : ℕ) : " + cls + "_ref n = n := by sorry"}});
    labels.push_back({{"problem_id", id}, {"correct", plan.route != Route::None}});
    if (!untypeable) {
      ++set.type_checked;
      set.beq_l += plan.route == Route::Exact;
      set.beq_plus += plan.route != Route::None;
    }
  }
  write_text(dir / "pools.jsonl", dataset::to_jsonl(pools));
  write_text(dir / "refs.jsonl", dataset::to_jsonl(refs));
  write_text(dir / "labels.jsonl", dataset::to_jsonl(labels));
  return set;
}

inline Relation planted_relation() {
  return class_relation([](int k) { return planted_route(static_cast<std::size_t>(k)); });
}

}  // namespace beqh::test_support
