#pragma once

#include <atomic>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "beqh/beq.hpp"
#include "beqh/core.hpp"
#include "beqh/dataset.hpp"
#include "beqh/metrics.hpp"
#include "beqh/pipeline.hpp"
#include "beqh/prover.hpp"
#include "beqh/subprocess.hpp"

namespace beqh::harness {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kSchema = 2, kBackend = 3, kPartial = 4 };

inline constexpr std::string_view kVersion = "0.1.0";

// --- backends ------------------------------------------------------------------------

struct BackendOptions {
  std::string kind = "lean";  // lean | scripted
  fs::path project;
  fs::path transcript;        // scripted only
  std::string repl_command;   // lean only; overrides discovery
};

inline std::unique_ptr<ProverBackend> make_backend(const BackendOptions& o) {
  if (o.kind == "scripted") {
    if (o.transcript.empty()) throw Error(ErrorCode::InvalidArgument, "--backend scripted needs --transcript FILE");
    return std::make_unique<ScriptedBackend>(load_transcript(o.transcript));
  }
  if (o.kind == "lean") {
    LeanReplOptions lo;
    if (!o.repl_command.empty()) lo.repl_command = detail::split_words(o.repl_command);
    return std::make_unique<LeanReplBackend>(lo);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown backend '" + o.kind + "' (expected lean or scripted)");
}

// --- worker pool ---------------------------------------------------------------------------

struct RunContext {
  RunContext(ProverBackend& b, fs::path root = {}) : backend(b), project(std::move(root)) {}

  ProverBackend& backend;
  fs::path project;
  std::size_t jobs = 1;
  Millis command_timeout = kDefaultCommandTimeout;
  Millis attempt_timeout = kDefaultAttemptTimeout;
  Millis startup_timeout = kDefaultStartupTimeout;
  std::size_t recycle_after = kDefaultRecycleAfter;
  std::ostream* out = &std::cout;
  std::ostream* err = &std::cerr;
  std::string toolchain;  // filled from the first session started

  void warn(const std::string& msg) const { *err << "warning: " << msg << '\n'; }
};

template <class T>
struct ParallelResult {
  std::vector<std::optional<T>> results;
  std::exception_ptr error;  // first failure by task index
  std::size_t failed_task = 0;
};

/// Runs `fn(i, session)` for i in [0, count) over `jobs` workers, each owning
/// one backend session. Results are stored by index, so output order never
/// depends on scheduling. After a failure no new tasks start.
template <class T, class Fn>
ParallelResult<T> run_parallel(RunContext& ctx, std::size_t count, Fn fn) {
  ParallelResult<T> res;
  res.results.resize(count);
  if (count == 0) return res;
  std::size_t workers = std::max<std::size_t>(1, std::min(ctx.jobs, count));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  std::optional<std::size_t> first_failure;
  auto fail = [&](std::size_t task) {
    std::lock_guard lock(mu);
    if (!first_failure || task < *first_failure) {
      first_failure = task;
      res.error = std::current_exception();
    }
    stop = true;
  };
  auto worker = [&] {
    std::optional<SessionHandle> session;
    try {
      session = ctx.backend.start_session(ctx.project, ctx.startup_timeout);
      std::lock_guard lock(mu);
      if (ctx.toolchain.empty()) ctx.toolchain = session->toolchain;
    } catch (...) {
      fail(0);
      return;
    }
    while (!stop) {
      std::size_t i = next++;
      if (i >= count) break;
      try {
        ctx.backend.maybe_recycle(*session, ctx.recycle_after);
        res.results[i] = fn(i, *session);
      } catch (...) {
        fail(i);
      }
    }
    try {
      ctx.backend.close(*session);
    } catch (...) {
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (first_failure) res.failed_task = *first_failure;
  return res;
}

inline std::string describe(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    return ex.what();
  } catch (...) {
    return "unknown failure";
  }
}

// --- manifest ---------------------------------------------------------------------------------

/// Everything needed to rerun a command: options, seed, input hashes, backend
/// and toolchain. No timestamps, so identical runs give identical manifests.
struct Manifest {
  std::string command;
  ordered_json options = ordered_json::object();
  std::vector<fs::path> inputs;
  std::string backend;
  std::string toolchain;

  ordered_json to_json() const {
    ordered_json j;
    j["tool"] = "beqh";
    j["version"] = std::string(kVersion);
    j["command"] = command;
    j["options"] = options;
    ordered_json hashes = ordered_json::object();
    for (const auto& p : inputs) {
      if (!p.empty()) hashes[p.string()] = dataset::sha256_file(p);
    }
    j["inputs"] = hashes;
    j["backend"] = backend;
    j["toolchain"] = toolchain;
    return j;
  }

  void write(const fs::path& path) const { dataset::write_atomic(path, to_json().dump(2) + "\n"); }
};

inline void emit(const RunContext& ctx, const fs::path& path, const std::string& content) {
  if (path.empty() || path == "-") *ctx.out << content;
  else dataset::write_atomic(path, content);
}

// --- typecheck ------------------------------------------------------------------------------------

struct TypecheckOptions {
  fs::path pools;
  fs::path fields;
  fs::path out;  // JSONL, one row per candidate
};

inline ordered_json to_json(const TypeCheckStatus& st) {
  ordered_json diags = ordered_json::array();
  for (const auto& d : st.diagnostics) {
    diags.push_back({{"severity", std::string(to_string(d.severity))}, {"message", d.message}});
  }
  return {{"kind", std::string(to_string(st.kind))}, {"diagnostics", diags}};
}

inline int cmd_typecheck(RunContext& ctx, const TypecheckOptions& o) {
  auto pools = dataset::load_pools(o.pools, o.fields.empty() ? dataset::FieldMap{} : dataset::FieldMap::load(o.fields));
  auto run = run_parallel<CandidatePool>(ctx, pools.size(), [&](std::size_t i, SessionHandle& s) {
    CandidatePool p = pools[i];
    pipeline::filter_well_typed(p, ctx.backend, s, ctx.command_timeout);
    return p;
  });
  std::vector<ordered_json> rows;
  std::size_t done = 0, passing = 0;
  for (const auto& p : run.results) {
    if (!p) continue;
    ++done;
    bool any = false;
    for (const auto& c : p->candidates) {
      ordered_json row{{"problem_id", p->problem_id}, {"index", c.index}};
      row.update(to_json(*c.typecheck));
      rows.push_back(std::move(row));
      any = any || c.typecheck->well_typed();
    }
    passing += any;
  }
  emit(ctx, o.out, dataset::to_jsonl(rows));
  *ctx.err << "problems " << done << "/" << pools.size() << ", type-check "
           << metrics::format_pct(metrics::percent(passing, done)) << "%\n";
  if (run.error) {
    *ctx.err << "error: " << describe(run.error) << '\n';
    return kBackend;
  }
  return kOk;
}

// --- beq over pairs ------------------------------------------------------------------------------------

enum class Metric { BeqL, BeqPlus };

inline std::optional<Metric> parse_metric(std::string_view s) {
  if (s == "beq-l" || s == "beq_l") return Metric::BeqL;
  if (s == "beq-plus" || s == "beq_plus" || s == "beq+") return Metric::BeqPlus;
  return std::nullopt;
}

inline std::string_view to_string(Metric m) { return m == Metric::BeqL ? "beq_l" : "beq_plus"; }

inline EquivalenceVerdict check(beq::BeqEngine& engine, Metric m, const FormalStatement& t1, const FormalStatement& t2,
                                SessionHandle& s) {
  return m == Metric::BeqL ? engine.beq_l(t1, t2, s) : engine.beq_plus(t1, t2, s);
}

struct BeqOptions {
  fs::path pairs;
  fs::path fields;
  Metric metric = Metric::BeqPlus;
  beq::BeqConfig config;
  fs::path out;  // verdict JSONL
};

inline int cmd_beq(RunContext& ctx, const BeqOptions& o) {
  auto pairs = dataset::load_pairs(o.pairs, o.fields.empty() ? dataset::FieldMap{} : dataset::FieldMap::load(o.fields));
  beq::BeqEngine engine(ctx.backend, o.config);
  auto run = run_parallel<EquivalenceVerdict>(ctx, pairs.size(), [&](std::size_t i, SessionHandle& s) {
    return check(engine, o.metric, pairs[i].t1, pairs[i].t2, s);
  });
  std::vector<ordered_json> rows;
  std::map<std::string, std::size_t> counts;
  std::size_t errors = 0, mismatches = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!run.results[i]) continue;
    const auto& v = *run.results[i];
    ordered_json row{{"id", pairs[i].id}, {"metric", std::string(to_string(o.metric))}};
    row.update(beq::to_json(v));
    if (pairs[i].expected) {
      row["expected"] = std::string(to_string(*pairs[i].expected));
      bool match = *pairs[i].expected == v.verdict;
      row["matches_expected"] = match;
      mismatches += !match;
    }
    rows.push_back(std::move(row));
    ++counts[std::string(to_string(v.verdict))];
    errors += v.verdict == Verdict::Error;
  }
  emit(ctx, o.out, dataset::to_jsonl(rows));
  for (const auto& [name, n] : counts) *ctx.err << name << ": " << n << '\n';
  if (mismatches) *ctx.err << "expected verdict mismatches: " << mismatches << '\n';
  if (run.error) {
    *ctx.err << "error: " << describe(run.error) << '\n';
    return kBackend;
  }
  return errors ? kPartial : kOk;
}

// --- eval-verif -------------------------------------------------------------------------------------------

struct EvalVerifOptions {
  fs::path dataset;
  fs::path fields;
  Metric metric = Metric::BeqPlus;
  beq::BeqConfig config;
  metrics::LengthCuts cuts;
  fs::path report;  // JSON
  fs::path log;     // verdict JSONL
};

inline int cmd_eval_verif(RunContext& ctx, const EvalVerifOptions& o) {
  auto records =
      dataset::load_verif_dataset(o.dataset, o.fields.empty() ? dataset::FieldMap{} : dataset::FieldMap::load(o.fields));
  std::size_t positives = 0;
  for (const auto& r : records) positives += r.label;
  *ctx.err << "records " << records.size() << ", positives " << positives << '\n';

  beq::BeqEngine engine(ctx.backend, o.config);
  auto run = run_parallel<EquivalenceVerdict>(ctx, records.size(), [&](std::size_t i, SessionHandle& s) {
    return check(engine, o.metric, records[i].reference, records[i].prediction, s);
  });

  std::vector<ordered_json> log;
  std::vector<VerifRecord> scored;
  std::vector<bool> preds, labels;
  std::map<std::string, bool> predicted;
  std::size_t errors = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!run.results[i]) continue;
    const auto& v = *run.results[i];
    ordered_json row{{"id", records[i].id}, {"metric", std::string(to_string(o.metric))}, {"label", records[i].label}};
    row.update(beq::to_json(v));
    log.push_back(std::move(row));
    scored.push_back(records[i]);
    preds.push_back(v.verdict == Verdict::Equivalent);
    labels.push_back(records[i].label);
    predicted[records[i].id] = preds.back();
    errors += v.verdict == Verdict::Error;
  }
  if (!o.log.empty()) dataset::write_atomic(o.log, dataset::to_jsonl(log));
  if (run.error) {
    *ctx.err << "error: backend failed on record " << records[run.failed_task].id << ": " << describe(run.error)
             << " (" << log.size() << " verdicts kept)\n";
    return kBackend;
  }

  ordered_json report;
  report["metric"] = std::string(to_string(o.metric));
  report["records"] = records.size();
  report["positives"] = positives;
  report["errors"] = errors;
  std::string md = "| Subset | Records | Precision | Recall | F1 |\n|---|---|---|---|---|\n";
  auto add_row = [&](const std::string& name, const metrics::BinaryScore& s, std::size_t n) {
    md += "| " + name + " | " + std::to_string(n) + " | " + metrics::format_pct(s.precision) + " | " +
          metrics::format_pct(s.recall) + " | " + metrics::format_pct(s.f1) + " |\n";
  };
  if (!scored.empty()) {
    auto overall = metrics::binary_metrics(preds, labels);
    report["overall"] = metrics::to_json(overall);
    add_row("all", overall, scored.size());
  }
  ordered_json strata = ordered_json::array();
  auto buckets = metrics::stratify_by_length(scored, o.cuts);
  const std::string names[3] = {"<" + std::to_string(o.cuts.lower),
                                std::to_string(o.cuts.lower) + "-" + std::to_string(o.cuts.upper),
                                ">" + std::to_string(o.cuts.upper)};
  for (int b = 0; b < 3; ++b) {
    ordered_json sj{{"range", names[b]}, {"records", buckets[b].size()}};
    if (!buckets[b].empty()) {
      std::vector<bool> bp, bl;
      for (const auto& r : buckets[b]) {
        bp.push_back(predicted[r.id]);
        bl.push_back(r.label);
      }
      auto s = metrics::binary_metrics(bp, bl);
      sj["score"] = metrics::to_json(s);
      add_row(names[b], s, buckets[b].size());
    }
    strata.push_back(std::move(sj));
  }
  report["strata"] = strata;
  emit(ctx, o.report, report.dump(2) + "\n");
  *ctx.out << md;
  return errors ? kPartial : kOk;
}

// --- eval-autoform ------------------------------------------------------------------------------------------

struct EvalAutoformOptions {
  fs::path pools;
  fs::path refs;
  fs::path labels;
  fs::path fields;
  std::vector<pipeline::Method> methods{pipeline::Method::Random};
  std::uint64_t seed = 0;
  std::vector<int> k_list;
  beq::BeqConfig config;
  fs::path report;          // JSON
  fs::path markdown;        // table; stdout when empty
  fs::path selection_log;   // JSONL
  fs::path verdict_log;     // JSONL
};

inline std::optional<pipeline::Method> parse_selection(std::string_view s) {
  if (s == "self-bleu") return pipeline::Method::SelfBleu;
  if (s == "symbolic") return pipeline::Method::SymbolicEquiv;
  return pipeline::parse_method(s);
}

struct ProblemRun {
  std::vector<metrics::ProblemOutcome> outcomes;  // one per method
  std::vector<ordered_json> selections;
  std::vector<ordered_json> verdicts;
};

inline ProblemRun evaluate_problem(RunContext& ctx, beq::BeqEngine& engine, const EvalAutoformOptions& o,
                                   CandidatePool pool, const FormalStatement& reference, SessionHandle& s) {
  ProblemRun run;
  std::size_t pool_size = pool.candidates.size();
  CandidatePool survivors = pipeline::filter_well_typed(pool, ctx.backend, s, ctx.command_timeout);

  // BEq+ of every survivor against the reference, needed for pass@k.
  std::map<std::size_t, EquivalenceVerdict> plus_cache;
  auto beq_plus = [&](const Candidate& c) -> const EquivalenceVerdict& {
    auto it = plus_cache.find(c.index);
    if (it == plus_cache.end()) it = plus_cache.emplace(c.index, engine.beq_plus(reference, *c.cleaned, s)).first;
    return it->second;
  };
  std::size_t correct = 0;
  if (!o.k_list.empty()) {
    for (const auto& c : survivors.candidates) correct += beq_plus(c).verdict == Verdict::Equivalent;
  }

  for (auto method : o.methods) {
    metrics::ProblemOutcome out;
    out.problem_id = pool.problem_id;
    out.type_checked = !survivors.candidates.empty();
    out.n = pool_size;
    out.c = correct;
    std::optional<pipeline::Selection> sel;
    if (out.type_checked) {
      switch (method) {
        case pipeline::Method::Greedy: sel = pipeline::make_selection(survivors, 0, false); break;
        case pipeline::Method::Random: sel = pipeline::select_random(survivors, o.seed); break;
        case pipeline::Method::Majority: sel = pipeline::select_majority(survivors); break;
        case pipeline::Method::SelfBleu: sel = pipeline::select_self_bleu(survivors); break;
        case pipeline::Method::SymbolicEquiv: sel = pipeline::select_symbolic_equiv(survivors, engine, s); break;
      }
      const Candidate& chosen = sel->candidate;
      out.chosen_index = chosen.index;
      EquivalenceVerdict l = engine.beq_l(reference, *chosen.cleaned, s);
      const EquivalenceVerdict& plus = beq_plus(chosen);
      out.beq_l = l.verdict;
      out.beq_plus = plus.verdict;
      for (auto [metric, v] : {std::pair<Metric, const EquivalenceVerdict*>{Metric::BeqL, &l},
                               std::pair<Metric, const EquivalenceVerdict*>{Metric::BeqPlus, &plus}}) {
        ordered_json row;
        row["problem_id"] = pool.problem_id;
        row["method"] = std::string(pipeline::to_string(method));
        row["candidate_index"] = chosen.index;
        row["metric"] = std::string(to_string(metric));
        row.update(beq::to_json(*v));
        run.verdicts.push_back(std::move(row));
      }
    }
    run.selections.push_back(
        pipeline::selection_log_entry(pool.problem_id, method, sel, pool_size, survivors.candidates.size()));
    run.outcomes.push_back(std::move(out));
  }
  return run;
}

inline int cmd_eval_autoform(RunContext& ctx, const EvalAutoformOptions& o) {
  auto fields = o.fields.empty() ? dataset::FieldMap{} : dataset::FieldMap::load(o.fields);
  auto pools = dataset::load_pools(o.pools, fields);
  auto refs = dataset::load_references(o.refs, fields);
  std::map<std::string, bool> labels;
  if (!o.labels.empty()) labels = dataset::load_labels(o.labels, fields);

  bool join_failed = false;
  std::vector<CandidatePool> joined;
  std::set<std::string> pooled;
  for (auto& p : pools) {
    pooled.insert(p.problem_id);
    if (refs.count(p.problem_id)) joined.push_back(p);
    else {
      ctx.warn("pool " + p.problem_id + " has no reference; skipped");
      join_failed = true;
    }
  }
  for (const auto& [id, r] : refs) {
    if (!pooled.count(id)) {
      ctx.warn("reference " + id + " has no pool; skipped");
      join_failed = true;
    }
  }

  beq::BeqEngine engine(ctx.backend, o.config);
  auto run = run_parallel<ProblemRun>(ctx, joined.size(), [&](std::size_t i, SessionHandle& s) {
    return evaluate_problem(ctx, engine, o, joined[i], refs.at(joined[i].problem_id), s);
  });

  std::vector<ordered_json> selections, verdicts;
  std::vector<std::vector<metrics::ProblemOutcome>> per_method(o.methods.size());
  for (std::size_t i = 0; i < joined.size(); ++i) {
    if (!run.results[i]) continue;
    auto& pr = *run.results[i];
    selections.insert(selections.end(), pr.selections.begin(), pr.selections.end());
    verdicts.insert(verdicts.end(), pr.verdicts.begin(), pr.verdicts.end());
    for (std::size_t m = 0; m < o.methods.size(); ++m) {
      auto out = pr.outcomes[m];
      if (auto it = labels.find(out.problem_id); it != labels.end()) out.human_correct = it->second;
      per_method[m].push_back(std::move(out));
    }
  }
  if (!o.selection_log.empty()) dataset::write_atomic(o.selection_log, dataset::to_jsonl(selections));
  if (!o.verdict_log.empty()) dataset::write_atomic(o.verdict_log, dataset::to_jsonl(verdicts));
  if (run.error) {
    *ctx.err << "error: backend failed on problem " << joined[run.failed_task].problem_id << ": "
             << describe(run.error) << '\n';
    return kBackend;
  }

  metrics::EvalReport report;
  report.k_list = o.k_list;
  for (std::size_t m = 0; m < o.methods.size(); ++m) {
    report.rows.push_back(
        metrics::aggregate_report(std::string(pipeline::to_string(o.methods[m])), per_method[m], o.k_list));
  }
  ordered_json j = metrics::to_json(report);
  j["problems"] = joined.size();
  j["seed"] = o.seed;
  ordered_json points = ordered_json::array();
  for (const auto& row : report.rows) {
    if (auto p = metrics::to_point(row)) points.push_back(metrics::to_json(*p));
  }
  j["benchmark_points"] = points;
  emit(ctx, o.report, j.dump(2) + "\n");
  emit(ctx, o.markdown, metrics::to_markdown(report));
  return join_failed ? kPartial : kOk;
}

// --- correlate --------------------------------------------------------------------------------------------------

struct CorrelateOptions {
  fs::path points;
  fs::path fields;
  fs::path out;  // JSON
};

inline int cmd_correlate(RunContext& ctx, const CorrelateOptions& o) {
  auto points = dataset::load_points(o.points, o.fields.empty() ? dataset::FieldMap{} : dataset::FieldMap::load(o.fields));
  auto rows = metrics::correlate(points);
  if (!o.out.empty()) dataset::write_atomic(o.out, metrics::to_json(rows).dump(2) + "\n");
  *ctx.out << metrics::to_markdown(rows);
  return kOk;
}

/// Maps a library error to the documented exit code.
inline int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::SchemaError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::NoDeclarationFound:
      return kSchema;
    case ErrorCode::ToolchainMissing:
    case ErrorCode::StartupTimeout:
    case ErrorCode::CommandTimeout:
    case ErrorCode::SessionDead:
    case ErrorCode::ProtocolError:
    case ErrorCode::EndpointError:
    case ErrorCode::OfflineMode:
      return kBackend;
    default:
      return kPartial;
  }
}

}  // namespace beqh::harness
