#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "beqh/core.hpp"

namespace beqh::metrics {

using ordered_json = nlohmann::ordered_json;

/// Round half to even at one decimal. Values within 1e-9 of a tie are treated
/// as ties so that e.g. 0.25 stored slightly below still rounds to 0.2.
inline double round1(double x) {
  double y = x * 10.0;
  double fl = std::floor(y);
  double frac = y - fl;
  double r;
  if (std::abs(frac - 0.5) < 1e-9) {
    r = std::fmod(fl, 2.0) == 0.0 ? fl : fl + 1.0;
  } else {
    r = std::round(y);
  }
  return r / 10.0;
}

inline std::string format_pct(std::optional<double> v) {
  if (!v) return "—";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", round1(*v));
  return buf;
}

inline std::string format_coef(std::optional<double> v) {
  if (!v) return "—";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", *v);
  return buf;
}

// --- binary scores -----------------------------------------------------------------

struct BinaryScore {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::optional<double> precision, recall, f1;  // percentages, full precision
};

inline std::optional<double> f1_from(std::optional<double> p, std::optional<double> r) {
  if (!p || !r || *p + *r <= 0.0) return std::nullopt;
  return 2.0 * *p * *r / (*p + *r);
}

inline BinaryScore score_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
  BinaryScore s{tp, fp, tn, fn, {}, {}, {}};
  if (tp + fp > 0) s.precision = 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) s.recall = 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fn);
  s.f1 = f1_from(s.precision, s.recall);
  return s;
}

inline BinaryScore binary_metrics(const std::vector<bool>& predictions, const std::vector<bool>& labels) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "predictions and labels differ in length");
  }
  if (predictions.empty()) throw Error(ErrorCode::EmptyInput, "no predictions to score");
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (predictions[i]) (labels[i] ? tp : fp)++;
    else (labels[i] ? fn : tn)++;
  }
  return score_counts(tp, fp, tn, fn);
}

inline ordered_json to_json(const BinaryScore& s) {
  auto opt = [](std::optional<double> v) { return v ? ordered_json(round1(*v)) : ordered_json(nullptr); };
  return ordered_json{{"tp", s.tp},         {"fp", s.fp},       {"tn", s.tn}, {"fn", s.fn},
                      {"precision", opt(s.precision)}, {"recall", opt(s.recall)}, {"f1", opt(s.f1)}};
}

// --- strata ----------------------------------------------------------------------------

struct LengthCuts {
  std::size_t lower = 115;
  std::size_t upper = 165;
};

/// (< lower), [lower, upper], (> upper) on reference length.
inline std::array<std::vector<VerifRecord>, 3> stratify_by_length(const std::vector<VerifRecord>& records,
                                                                  LengthCuts cuts = {}) {
  if (cuts.lower >= cuts.upper) throw Error(ErrorCode::InvalidArgument, "length cuts must be strictly increasing");
  std::array<std::vector<VerifRecord>, 3> out;
  for (const auto& r : records) {
    std::size_t bucket = r.reference_length < cuts.lower ? 0 : (r.reference_length <= cuts.upper ? 1 : 2);
    out[bucket].push_back(r);
  }
  return out;
}

// --- pass@k -------------------------------------------------------------------------------

/// Unbiased estimator 1 - C(n-c, k) / C(n, k) as the running product
/// 1 - prod_{i=n-c+1..n} (1 - k/i). Instantiate with an exact rational type
/// for exact results.
template <class T>
T pass_at_k_as(long long n, long long c, long long k) {
  if (n < 0 || c < 0 || c > n || k < 1 || k > n) {
    throw Error(ErrorCode::DomainError, "pass@k needs 0 <= c <= n and 1 <= k <= n");
  }
  if (n - c < k) return T(1);
  T miss(1);
  for (long long i = n - c + 1; i <= n; ++i) miss *= T(1) - T(k) / T(i);
  return T(1) - miss;
}

inline double pass_at_k(long long n, long long c, long long k) { return pass_at_k_as<double>(n, c, k); }

// --- correlations ---------------------------------------------------------------------------

inline void check_pairs(std::size_t nx, std::size_t ny) {
  if (nx != ny) throw Error(ErrorCode::LengthMismatch, "correlation inputs differ in length");
  if (nx < 2) throw Error(ErrorCode::DomainError, "correlation needs at least two points");
}

/// Sample Pearson r; absent when either input is constant.
inline std::optional<double> pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  check_pairs(xs.size(), ys.size());
  const double n = static_cast<double>(xs.size());
  double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

struct KendallCounts {
  std::int64_t n0 = 0;       // all pairs
  std::int64_t n1 = 0;       // pairs tied in x
  std::int64_t n2 = 0;       // pairs tied in y
  std::int64_t n3 = 0;       // pairs tied in both
  std::int64_t c_minus_d = 0;
};

inline std::optional<double> tau_b_from(const KendallCounts& k) {
  if (k.n0 == k.n1 || k.n0 == k.n2) return std::nullopt;
  return static_cast<double>(k.c_minus_d) /
         std::sqrt(static_cast<double>(k.n0 - k.n1) * static_cast<double>(k.n0 - k.n2));
}

namespace detail {

inline std::int64_t tie_pairs(const std::vector<double>& sorted) {
  std::int64_t total = 0, run = 1;
  for (std::size_t i = 1; i <= sorted.size(); ++i) {
    if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  return total;
}

// Merge sort counting strict inversions.
inline std::int64_t sort_count_swaps(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = sort_count_swaps(v, buf, lo, mid) + sort_count_swaps(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + lo, buf.begin() + hi, v.begin() + lo);
  return swaps;
}

}  // namespace detail

/// Pair counts in O(n log n) (Knight's algorithm).
inline KendallCounts kendall_counts(const std::vector<double>& xs, const std::vector<double>& ys) {
  check_pairs(xs.size(), ys.size());
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return xs[a] != xs[b] ? xs[a] < xs[b] : ys[a] < ys[b];
  });
  KendallCounts k;
  k.n0 = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  std::vector<double> sx(n), sy(n);
  for (std::size_t i = 0; i < n; ++i) {
    sx[i] = xs[order[i]];
    sy[i] = ys[order[i]];
  }
  k.n1 = detail::tie_pairs(sx);
  std::int64_t run = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && sx[i] == sx[i - 1] && sy[i] == sy[i - 1]) {
      ++run;
    } else {
      k.n3 += run * (run - 1) / 2;
      run = 1;
    }
  }
  std::vector<double> buf(n);
  std::int64_t swaps = detail::sort_count_swaps(sy, buf, 0, n);
  k.n2 = detail::tie_pairs(sy);
  k.c_minus_d = k.n0 - k.n1 - k.n2 + k.n3 - 2 * swaps;
  return k;
}

/// Kendall tau-b; absent when either input is entirely tied.
inline std::optional<double> kendall_tau_b(const std::vector<double>& xs, const std::vector<double>& ys) {
  return tau_b_from(kendall_counts(xs, ys));
}

// --- reports ---------------------------------------------------------------------------------

struct BenchmarkPoint {
  std::string label;
  double human_accuracy = 0;
  double type_check_rate = 0;
  double beq_l_rate = 0;
  double beq_plus_rate = 0;
};

/// Outcome of one problem under one selection method.
struct ProblemOutcome {
  std::string problem_id;
  bool type_checked = false;  // at least one well-typed candidate
  std::optional<std::size_t> chosen_index;
  std::optional<Verdict> beq_l;
  std::optional<Verdict> beq_plus;
  std::size_t n = 0;  // candidates sampled
  std::size_t c = 0;  // candidates BEq+-equivalent to the reference
  std::optional<bool> human_correct;
};

struct PassAtK {
  int k = 1;
  double rate = 0;  // percentage
};

struct MethodRow {
  std::string method;
  std::size_t problems = 0;
  std::size_t type_checked = 0;
  std::size_t beq_l_hits = 0;
  std::size_t beq_plus_hits = 0;
  double type_check_rate = 0;
  std::optional<double> accuracy;
  double beq_l_rate = 0;
  double beq_plus_rate = 0;
  std::vector<PassAtK> pass_at_k;
};

struct EvalReport {
  std::vector<int> k_list;
  std::vector<MethodRow> rows;
};

inline double percent(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

/// One report row. Problems without a well-typed candidate score zero on every
/// metric; pass@k with fewer than k samples uses k = n.
inline MethodRow aggregate_report(const std::string& method, const std::vector<ProblemOutcome>& outcomes,
                                  const std::vector<int>& k_list) {
  MethodRow row;
  row.method = method;
  row.problems = outcomes.size();
  std::size_t labelled = 0, correct = 0;
  std::vector<double> pass_sum(k_list.size(), 0.0);
  for (const auto& o : outcomes) {
    if (o.type_checked && (!o.beq_l || !o.beq_plus)) {
      throw Error(ErrorCode::MissingVerdicts, "problem " + o.problem_id + " lacks a verdict");
    }
    row.type_checked += o.type_checked;
    row.beq_l_hits += o.type_checked && *o.beq_l == Verdict::Equivalent;
    row.beq_plus_hits += o.type_checked && *o.beq_plus == Verdict::Equivalent;
    if (o.human_correct) {
      ++labelled;
      correct += *o.human_correct;
    }
    for (std::size_t i = 0; i < k_list.size(); ++i) {
      if (o.n == 0) continue;
      long long k = std::min<long long>(k_list[i], static_cast<long long>(o.n));
      pass_sum[i] += pass_at_k(static_cast<long long>(o.n), static_cast<long long>(o.c), k);
    }
  }
  row.type_check_rate = percent(row.type_checked, row.problems);
  row.beq_l_rate = percent(row.beq_l_hits, row.problems);
  row.beq_plus_rate = percent(row.beq_plus_hits, row.problems);
  if (labelled > 0 && labelled == outcomes.size()) row.accuracy = percent(correct, labelled);
  for (std::size_t i = 0; i < k_list.size(); ++i) {
    double rate = row.problems == 0 ? 0.0 : 100.0 * pass_sum[i] / static_cast<double>(row.problems);
    row.pass_at_k.push_back({k_list[i], rate});
  }
  return row;
}

inline std::optional<BenchmarkPoint> to_point(const MethodRow& row) {
  if (!row.accuracy) return std::nullopt;
  return BenchmarkPoint{row.method, *row.accuracy, row.type_check_rate, row.beq_l_rate, row.beq_plus_rate};
}

inline ordered_json to_json(const BenchmarkPoint& p) {
  return ordered_json{{"label", p.label},
                      {"human_accuracy", p.human_accuracy},
                      {"type_check_rate", p.type_check_rate},
                      {"beq_l_rate", p.beq_l_rate},
                      {"beq_plus_rate", p.beq_plus_rate}};
}

inline ordered_json to_json(const MethodRow& r) {
  ordered_json j;
  j["method"] = r.method;
  j["problems"] = r.problems;
  j["type_checked"] = r.type_checked;
  j["beq_l_hits"] = r.beq_l_hits;
  j["beq_plus_hits"] = r.beq_plus_hits;
  j["type_check"] = round1(r.type_check_rate);
  j["accuracy"] = r.accuracy ? ordered_json(round1(*r.accuracy)) : ordered_json(nullptr);
  j["beq_l"] = round1(r.beq_l_rate);
  j["beq_plus"] = round1(r.beq_plus_rate);
  ordered_json pk = ordered_json::object();
  for (const auto& p : r.pass_at_k) pk[std::to_string(p.k)] = round1(p.rate);
  j["pass_at_k"] = pk;
  return j;
}

inline ordered_json to_json(const EvalReport& r) {
  ordered_json j;
  j["k_list"] = r.k_list;
  j["rows"] = ordered_json::array();
  for (const auto& row : r.rows) j["rows"].push_back(to_json(row));
  return j;
}

inline std::string to_markdown(const EvalReport& r) {
  std::string out = "| Method | Type-Check | Accuracy | BEq_L | BEq+ |";
  std::string rule = "|---|---|---|---|---|";
  for (int k : r.k_list) {
    out += " pass@" + std::to_string(k) + " |";
    rule += "---|";
  }
  out += "\n" + rule + "\n";
  for (const auto& row : r.rows) {
    out += "| " + row.method + " | " + format_pct(row.type_check_rate) + " | " + format_pct(row.accuracy) + " | " +
           format_pct(row.beq_l_rate) + " | " + format_pct(row.beq_plus_rate) + " |";
    for (const auto& p : row.pass_at_k) out += " " + format_pct(p.rate) + " |";
    out += "\n";
  }
  return out;
}

// --- benchmark-level correlation ---------------------------------------------------------------

struct CorrelationRow {
  std::string metric;
  std::optional<double> pearson;
  std::optional<double> kendall;
};

/// Human accuracy against each automated rate.
inline std::vector<CorrelationRow> correlate(const std::vector<BenchmarkPoint>& points) {
  if (points.size() < 2) throw Error(ErrorCode::DomainError, "correlation needs at least two points");
  std::vector<double> human;
  for (const auto& p : points) human.push_back(p.human_accuracy);
  std::vector<CorrelationRow> rows;
  auto add = [&](const char* name, double BenchmarkPoint::*field) {
    std::vector<double> v;
    for (const auto& p : points) v.push_back(p.*field);
    rows.push_back({name, pearson(human, v), kendall_tau_b(human, v)});
  };
  add("Type-Check", &BenchmarkPoint::type_check_rate);
  add("BEq_L", &BenchmarkPoint::beq_l_rate);
  add("BEq+", &BenchmarkPoint::beq_plus_rate);
  return rows;
}

inline std::string to_markdown(const std::vector<CorrelationRow>& rows) {
  std::string out = "| Metric | Pearson | Kendall |\n|---|---|---|\n";
  for (const auto& r : rows) out += "| " + r.metric + " | " + format_coef(r.pearson) + " | " + format_coef(r.kendall) + " |\n";
  return out;
}

inline ordered_json to_json(const std::vector<CorrelationRow>& rows) {
  ordered_json j = ordered_json::array();
  for (const auto& r : rows) {
    j.push_back({{"metric", r.metric},
                 {"pearson", r.pearson ? ordered_json(*r.pearson) : ordered_json(nullptr)},
                 {"kendall", r.kendall ? ordered_json(*r.kendall) : ordered_json(nullptr)}});
  }
  return j;
}

}  // namespace beqh::metrics
