// beqh: command-line front end for the evaluation harness.

#include <cstdlib>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "beqh/generate.hpp"
#include "beqh/harness.hpp"

namespace {

using namespace beqh;
namespace fs = std::filesystem;

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty()) continue;
    std::size_t used = 0;
    int v = std::stoi(item, &used);
    if (used != item.size() || v < 1) throw Error(ErrorCode::InvalidArgument, "bad list entry '" + item + "'");
    out.push_back(v);
  }
  return out;
}

struct Globals {
  harness::BackendOptions backend;
  std::size_t jobs = 1;
  double timeout_s = 60;
  double attempt_timeout_s = 20;
  double startup_timeout_s = 600;
  std::size_t recycle_after = kDefaultRecycleAfter;
  std::string manifest = "beqh_manifest.json";
  bool no_guard = false;
  bool short_circuit = false;
  int max_convert_depth = 5;
};

Millis to_ms(double s) { return Millis(static_cast<long long>(s * 1000.0)); }

beq::BeqConfig beq_config(const Globals& g) {
  beq::BeqConfig c;
  c.triviality_guard = !g.no_guard;
  c.short_circuit = g.short_circuit;
  c.max_convert_depth = g.max_convert_depth;
  c.per_attempt_timeout = to_ms(g.attempt_timeout_s);
  c.command_timeout = to_ms(g.timeout_s);
  return c;
}

void add_beq_flags(CLI::App* sub, Globals& g) {
  sub->add_flag("--no-guard", g.no_guard, "Disable the triviality guard");
  sub->add_flag("--short-circuit", g.short_circuit, "Skip the backward direction when the forward one fails");
  sub->add_option("--max-convert-depth", g.max_convert_depth, "Largest k tried in `convert ... using k`")
      ->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Statement-equivalence metrics and autoformalization evaluation"};
  app.set_config("--config", "", "TOML file with option values; command-line flags win");
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(harness::kVersion));

  Globals g;
  app.add_option("--backend", g.backend.kind, "Prover backend: lean or scripted")
      ->check(CLI::IsMember({"lean", "scripted"}))
      ->capture_default_str();
  app.add_option("--project", g.backend.project, "Lean project root")->envname("BEQH_LEAN_PROJECT");
  app.add_option("--transcript", g.backend.transcript, "Transcript for the scripted backend");
  app.add_option("--repl", g.backend.repl_command, "Command that starts the Lean REPL");
  app.add_option("--jobs", g.jobs, "Worker sessions")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--timeout", g.timeout_s, "Per-command timeout in seconds")
      ->envname("BEQH_TIMEOUT")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--attempt-timeout", g.attempt_timeout_s, "Per proof-attempt timeout in seconds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--startup-timeout", g.startup_timeout_s, "Session startup timeout in seconds")
      ->check(CLI::PositiveNumber);
  app.add_option("--recycle-after", g.recycle_after, "Restart a session after this many commands (0: never)");
  app.add_option("--manifest", g.manifest, "Where to write the run manifest")->capture_default_str();

  std::string fields;
  app.add_option("--fields", fields, "JSON sidecar mapping canonical field names to dataset names")
      ->check(CLI::ExistingFile);

  // typecheck
  harness::TypecheckOptions tc;
  auto* typecheck = app.add_subcommand("typecheck", "Clean and type-check every candidate of every pool");
  typecheck->add_option("--pools", tc.pools, "Pool JSONL")->required()->check(CLI::ExistingFile);
  typecheck->add_option("--out", tc.out, "Per-candidate JSONL (default stdout)");

  // beq
  harness::BeqOptions bq;
  std::string bq_metric = "beq-plus";
  auto* beq_cmd = app.add_subcommand("beq", "Check statement pairs for equivalence");
  beq_cmd->add_option("--pairs", bq.pairs, "Pairs JSONL: id, context, t1, t2")->required()->check(CLI::ExistingFile);
  beq_cmd->add_option("--metric", bq_metric, "beq-l or beq-plus")
      ->check(CLI::IsMember({"beq-l", "beq-plus"}))
      ->capture_default_str();
  beq_cmd->add_option("--out", bq.out, "Verdict JSONL (default stdout)");
  add_beq_flags(beq_cmd, g);

  // eval-verif
  harness::EvalVerifOptions ev;
  std::string ev_metric = "beq-plus", strata = "115,165";
  auto* eval_verif = app.add_subcommand("eval-verif", "Score a metric against human equivalence labels");
  eval_verif->add_option("--dataset", ev.dataset, "Verification JSONL")->required()->check(CLI::ExistingFile);
  eval_verif->add_option("--metric", ev_metric, "beq-l or beq-plus")
      ->check(CLI::IsMember({"beq-l", "beq-plus"}))
      ->capture_default_str();
  eval_verif->add_option("--strata", strata, "Reference-length cuts")->capture_default_str();
  eval_verif->add_option("--report", ev.report, "Report JSON (default stdout)");
  eval_verif->add_option("--log", ev.log, "Verdict JSONL");
  add_beq_flags(eval_verif, g);

  // eval-autoform
  harness::EvalAutoformOptions ea;
  std::string select = "random", ks;
  auto* eval_af = app.add_subcommand("eval-autoform", "Clean, filter, select and score candidate pools");
  eval_af->add_option("--pools", ea.pools, "Pool JSONL")->required()->check(CLI::ExistingFile);
  eval_af->add_option("--refs", ea.refs, "Reference JSONL: problem_id, reference, context")
      ->required()
      ->check(CLI::ExistingFile);
  eval_af->add_option("--labels", ea.labels, "Human labels JSONL: problem_id, correct")->check(CLI::ExistingFile);
  eval_af->add_option("--select", select, "Comma list of greedy, random, majority, self-bleu, symbolic")
      ->capture_default_str();
  eval_af->add_option("--seed", ea.seed, "Seed for random selection")->capture_default_str();
  eval_af->add_option("--k", ks, "Comma list of k for pass@k");
  eval_af->add_option("--report", ea.report, "Report JSON (default stdout)");
  eval_af->add_option("--markdown", ea.markdown, "Markdown table (default stdout)");
  eval_af->add_option("--selections", ea.selection_log, "Selection log JSONL");
  eval_af->add_option("--log", ea.verdict_log, "Verdict JSONL");
  add_beq_flags(eval_af, g);

  // correlate
  harness::CorrelateOptions co;
  auto* correlate = app.add_subcommand("correlate", "Correlate automated rates with human accuracy");
  correlate->add_option("--points", co.points, "Benchmark point JSONL")->required()->check(CLI::ExistingFile);
  correlate->add_option("--out", co.out, "Correlation JSON");

  // generate
  generate::EndpointConfig gen;
  fs::path problems_path, gen_out, prompt_file;
  double backoff_s = 0.5;
  auto* gen_cmd = app.add_subcommand("generate", "Sample candidate formalizations from a completions endpoint");
  gen_cmd->add_option("--problems", problems_path, "Problem JSONL: problem_id, informal, context, context_mode")
      ->required()
      ->check(CLI::ExistingFile);
  gen_cmd->add_option("--endpoint", gen.url, "Completions URL");
  gen_cmd->add_option("--token-env", gen.token_env, "Environment variable holding the bearer token");
  gen_cmd->add_option("--model", gen.model_id, "Model id");
  gen_cmd->add_option("--temperature", gen.temperature, "Sampling temperature")->capture_default_str();
  gen_cmd->add_option("--n", gen.n, "Completions per problem")->check(CLI::PositiveNumber)->capture_default_str();
  gen_cmd->add_option("--max-tokens", gen.max_tokens, "Completion length limit")->capture_default_str();
  gen_cmd->add_option("--retries", gen.max_attempts, "Attempts per request")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--backoff", backoff_s, "Initial retry delay in seconds")->capture_default_str();
  gen_cmd->add_option("--prompt", prompt_file, "Prompt template with {informal} and {context}")
      ->check(CLI::ExistingFile);
  gen_cmd->add_option("--out", gen_out, "Pool JSONL")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    fs::path fields_path = fields;
    if (*correlate) {
      co.fields = fields_path;
      ScriptedBackend unused;
      harness::RunContext ctx{unused, {}};
      int rc = harness::cmd_correlate(ctx, co);
      harness::Manifest m{"correlate", {{"points", co.points.string()}, {"out", co.out.string()}}, {co.points}, "none", ""};
      m.write(g.manifest);
      return rc;
    }
    if (*gen_cmd) {
      gen.backoff = std::chrono::milliseconds(static_cast<long long>(backoff_s * 1000));
      if (!prompt_file.empty()) gen.prompt_template = dataset::read_file(prompt_file);
      auto problems = dataset::load_problems(problems_path, fields_path.empty() ? dataset::FieldMap{}
                                                                                : dataset::FieldMap::load(fields_path));
      auto result = generate::generate_candidates(problems, gen);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
      std::vector<nlohmann::ordered_json> rows;
      for (const auto& p : result.pools) rows.push_back(dataset::to_json(p));
      dataset::write_atomic(gen_out, dataset::to_jsonl(rows));
      // The token's value never reaches the manifest, only its variable name.
      harness::Manifest m{"generate",
                          {{"endpoint", gen.url},
                           {"token_env", gen.token_env},
                           {"model", gen.model_id},
                           {"temperature", gen.temperature},
                           {"n", gen.n},
                           {"max_tokens", gen.max_tokens},
                           {"out", gen_out.string()}},
                          {problems_path, prompt_file},
                          "none",
                          ""};
      m.write(g.manifest);
      std::cerr << "pools written: " << result.pools.size() << "/" << problems.size() << '\n';
      if (result.failure) {
        std::cerr << "error: " << *result.failure << '\n';
        return harness::kPartial;
      }
      return harness::kOk;
    }

    auto backend = harness::make_backend(g.backend);
    harness::RunContext ctx{*backend, g.backend.project};
    ctx.jobs = g.jobs;
    ctx.command_timeout = to_ms(g.timeout_s);
    ctx.attempt_timeout = to_ms(g.attempt_timeout_s);
    ctx.startup_timeout = to_ms(g.startup_timeout_s);
    ctx.recycle_after = g.recycle_after;

    harness::Manifest m;
    m.backend = backend->kind();
    m.options = {{"backend", g.backend.kind},
                 {"project", g.backend.project.string()},
                 {"jobs", g.jobs},
                 {"timeout", g.timeout_s},
                 {"attempt_timeout", g.attempt_timeout_s},
                 {"recycle_after", g.recycle_after},
                 {"no_guard", g.no_guard},
                 {"short_circuit", g.short_circuit},
                 {"max_convert_depth", g.max_convert_depth}};
    m.inputs = {g.backend.transcript, fields_path};
    int rc = harness::kOk;
    if (*typecheck) {
      tc.fields = fields_path;
      m.command = "typecheck";
      m.inputs.push_back(tc.pools);
      rc = harness::cmd_typecheck(ctx, tc);
    } else if (*beq_cmd) {
      bq.fields = fields_path;
      bq.metric = *harness::parse_metric(bq_metric);
      bq.config = beq_config(g);
      m.command = "beq";
      m.options["metric"] = bq_metric;
      m.inputs.push_back(bq.pairs);
      rc = harness::cmd_beq(ctx, bq);
    } else if (*eval_verif) {
      ev.fields = fields_path;
      ev.metric = *harness::parse_metric(ev_metric);
      ev.config = beq_config(g);
      auto cuts = parse_int_list(strata);
      if (cuts.size() != 2) throw Error(ErrorCode::InvalidArgument, "--strata takes two cuts, e.g. 115,165");
      ev.cuts = {static_cast<std::size_t>(cuts[0]), static_cast<std::size_t>(cuts[1])};
      m.command = "eval-verif";
      m.options["metric"] = ev_metric;
      m.options["strata"] = strata;
      m.inputs.push_back(ev.dataset);
      rc = harness::cmd_eval_verif(ctx, ev);
    } else if (*eval_af) {
      ea.fields = fields_path;
      ea.config = beq_config(g);
      ea.k_list = parse_int_list(ks);
      ea.methods.clear();
      std::stringstream ss(select);
      for (std::string item; std::getline(ss, item, ',');) {
        auto method = harness::parse_selection(item);
        if (!method) throw Error(ErrorCode::InvalidArgument, "unknown selection method '" + item + "'");
        ea.methods.push_back(*method);
      }
      m.command = "eval-autoform";
      m.options["select"] = select;
      m.options["seed"] = ea.seed;
      m.options["k"] = ks;
      m.inputs.insert(m.inputs.end(), {ea.pools, ea.refs, ea.labels});
      rc = harness::cmd_eval_autoform(ctx, ea);
    }
    m.toolchain = ctx.toolchain;
    m.write(g.manifest);
    return rc;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return harness::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return harness::kBackend;
  }
}
