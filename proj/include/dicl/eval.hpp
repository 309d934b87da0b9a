#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dicl/error.hpp"
#include "dicl/llm_client.hpp"
#include "dicl/rerank.hpp"
#include "dicl/stats.hpp"

namespace dicl {

enum class Method { zero_shot, tfidf, sbert, tfidf_mmr, sbert_mmr };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::zero_shot: return "zero_shot";
    case Method::tfidf: return "tfidf";
    case Method::sbert: return "sbert";
    case Method::tfidf_mmr: return "tfidf_mmr";
    case Method::sbert_mmr: return "sbert_mmr";
  }
  return "?";
}

inline const char* method_display_name(Method m) {
  switch (m) {
    case Method::zero_shot: return "0-Shot";
    case Method::tfidf: return "TFIDF";
    case Method::sbert: return "SBERT";
    case Method::tfidf_mmr: return "TFIDF-MMR";
    case Method::sbert_mmr: return "SBERT-MMR";
  }
  return "?";
}

inline Method method_from_name(std::string_view name) {
  if (name == "zero_shot") return Method::zero_shot;
  if (name == "tfidf") return Method::tfidf;
  if (name == "sbert") return Method::sbert;
  if (name == "tfidf_mmr") return Method::tfidf_mmr;
  if (name == "sbert_mmr") return Method::sbert_mmr;
  throw ConfigError("unknown method: " + std::string(name));
}

inline bool is_mmr(Method m) { return m == Method::tfidf_mmr || m == Method::sbert_mmr; }

inline bool uses_retrieval(Method m) { return m != Method::zero_shot; }

/// The non-MMR counterpart an MMR method is compared against in reports.
inline Method baseline_of(Method m) {
  switch (m) {
    case Method::tfidf_mmr: return Method::tfidf;
    case Method::sbert_mmr: return Method::sbert;
    default: throw Error("baseline_of: not an MMR method");
  }
}

inline SimilarityKind similarity_of(Method m) {
  switch (m) {
    case Method::tfidf:
    case Method::tfidf_mmr: return SimilarityKind::lexical;
    case Method::sbert:
    case Method::sbert_mmr: return SimilarityKind::semantic;
    default: throw Error("similarity_of: zero_shot has no similarity function");
  }
}

/// Unweighted mean of per-class F1 over the label set. A class absent from
/// both golds and predictions is skipped; a class with any support but a 0/0
/// F1 numerator contributes 0. INVALID predictions never match any class, so
/// they count against the gold class (denominators stay |records|).
inline double macro_f1(const std::vector<PredictionRecord>& records,
                       const std::vector<std::string>& label_set) {
  if (records.empty()) throw Error("macro_f1: no records");
  std::map<std::string, int> tp;
  std::map<std::string, int> fp;
  std::map<std::string, int> fn;
  for (const PredictionRecord& r : records) {
    const std::string& gold = r.gold_label;
    if (r.parsed_label && *r.parsed_label == gold) {
      ++tp[gold];
    } else {
      ++fn[gold];
      if (r.parsed_label) ++fp[*r.parsed_label];
    }
  }
  double sum = 0.0;
  int classes = 0;
  for (const std::string& label : label_set) {
    int t = tp.count(label) ? tp.at(label) : 0;
    int p = fp.count(label) ? fp.at(label) : 0;
    int n = fn.count(label) ? fn.at(label) : 0;
    if (t + p + n == 0) continue;  // absent from both golds and predictions
    double denom = 2.0 * t + p + n;
    sum += denom == 0.0 ? 0.0 : 2.0 * t / denom;
    ++classes;
  }
  return classes == 0 ? 0.0 : sum / classes;
}

/// 100 * (dicl_f1 - baseline_f1) / baseline_f1.
inline double delta_percent(double dicl_f1, double baseline_f1) {
  if (baseline_f1 <= 0.0) throw Error("delta_percent: baseline F1 must be > 0");
  return 100.0 * (dicl_f1 - baseline_f1) / baseline_f1;
}

struct TTestResult {
  double t = 0.0;
  int df = 0;
  double p = 1.0;
  bool significant = false;  // p < 0.05
};

/// Two-sided paired t-test on per-instance differences a[i] - b[i].
/// All-zero differences give t = 0, p = 1. A zero-variance nonzero mean
/// difference is reported as infinitely significant (p = 0).
inline TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw Error("paired_t_test: length mismatch");
  std::size_t n = a.size();
  if (n < 2) throw Error("paired_t_test: need at least 2 paired samples");

  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = a[i] - b[i] - mean;
    ss += d * d;
  }
  double sd = std::sqrt(ss / static_cast<double>(n - 1));

  TTestResult res;
  res.df = static_cast<int>(n) - 1;
  if (sd == 0.0) {
    if (mean == 0.0) {
      res.t = 0.0;
      res.p = 1.0;
    } else {
      res.t = mean > 0.0 ? std::numeric_limits<double>::infinity()
                         : -std::numeric_limits<double>::infinity();
      res.p = 0.0;
    }
  } else {
    res.t = mean * std::sqrt(static_cast<double>(n)) / sd;
    res.p = student_t_two_sided_p(res.t, res.df);
  }
  res.significant = res.p < 0.05;
  return res;
}

// ---------------------------------------------------------------------------
// Grid search
// ---------------------------------------------------------------------------

/// The validation grids: alpha in {0, 0.1, ..., 0.9} (1 degenerates to
/// standard ICL) and k in {1, 3, 5, 7, 9, 10}.
inline std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 9; ++i) grid.push_back(i / 10.0);
  return grid;
}

inline std::vector<int> default_k_grid() { return {1, 3, 5, 7, 9, 10}; }

struct GridPoint {
  int k = 0;
  std::optional<double> alpha;  // absent for non-MMR baselines
  double f1 = 0.0;
};

struct GridSearchResult {
  GridPoint best;
  std::vector<GridPoint> points;  // every evaluated grid point
};

/// Strictly-better ordering for grid choices: higher F1, then smaller k,
/// then larger alpha. Total, so the argmax is enumeration-order invariant.
inline bool grid_point_better(const GridPoint& a, const GridPoint& b) {
  if (a.f1 != b.f1) return a.f1 > b.f1;
  if (a.k != b.k) return a.k < b.k;
  double aa = a.alpha.value_or(-1.0);
  double ba = b.alpha.value_or(-1.0);
  return aa > ba;
}

/// Evaluates every grid point with `eval_f1(k, alpha)` (validation F1) and
/// returns the argmax. MMR methods search the full alpha x k grid; ICL
/// baselines search k only.
template <class EvalFn>
GridSearchResult grid_search(Method method, const std::vector<int>& k_grid,
                             const std::vector<double>& alpha_grid, EvalFn&& eval_f1) {
  if (k_grid.empty()) throw Error("grid_search: empty k grid");
  if (is_mmr(method) && alpha_grid.empty()) throw Error("grid_search: empty alpha grid");

  GridSearchResult result;
  for (int k : k_grid) {
    if (is_mmr(method)) {
      for (double alpha : alpha_grid) {
        GridPoint p{k, alpha, 0.0};
        p.f1 = eval_f1(k, std::optional<double>(alpha));
        result.points.push_back(p);
      }
    } else {
      GridPoint p{k, std::nullopt, 0.0};
      p.f1 = eval_f1(k, std::optional<double>());
      result.points.push_back(p);
    }
  }
  result.best = result.points.front();
  for (const GridPoint& p : result.points) {
    if (grid_point_better(p, result.best)) result.best = p;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

/// One evaluated configuration, as stored in a run's result.json.
struct MethodResult {
  Method method = Method::zero_shot;
  int k = 0;                       // shots (0 for zero-shot)
  std::optional<double> alpha;     // MMR methods only
  double f1 = 0.0;
  std::vector<double> correct;     // per-instance 0/1 correctness, by query id
  std::string dataset;
  std::string split;
};

namespace detail {

inline std::string format_double(double v, const char* fmt) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

/// Significant improvement of `a` over `b` at 0.05 (per-instance pairing).
inline bool significant_improvement(const MethodResult& a, const MethodResult& b) {
  if (a.correct.size() != b.correct.size() || a.correct.size() < 2) return false;
  TTestResult t = paired_t_test(a.correct, b.correct);
  return t.significant && t.t > 0.0;
}

}  // namespace detail

/// Renders the per-method result table: method, K, alpha, F1, delta% vs the
/// non-MMR counterpart, and significance superscripts (a: vs 0-shot, b: vs
/// the standard-ICL counterpart; paired t-test, p = 0.05).
inline std::string render_report_md(const std::vector<MethodResult>& results) {
  if (results.empty()) throw Error("render_report_md: no results");

  auto find = [&](Method m) -> const MethodResult* {
    for (const MethodResult& r : results) {
      if (r.method == m) return &r;
    }
    return nullptr;
  };

  std::string out;
  out += "# Evaluation report\n\n";
  out += "Dataset: " + results.front().dataset + " (" + results.front().split + " split, " +
         std::to_string(results.front().correct.size()) + " instances)\n\n";
  out += "| Method | K | alpha | F1 | Delta% | sig |\n";
  out += "|---|---|---|---|---|---|\n";

  const MethodResult* zero = find(Method::zero_shot);
  for (Method m : {Method::zero_shot, Method::tfidf, Method::tfidf_mmr, Method::sbert,
                   Method::sbert_mmr}) {
    const MethodResult* r = find(m);
    if (!r) continue;
    std::string delta = "N/A";
    bool sig_a = false;
    bool sig_b = false;
    if (is_mmr(m)) {
      if (const MethodResult* base = find(baseline_of(m))) {
        delta = detail::format_double(delta_percent(r->f1, base->f1), "%+.1f");
        sig_b = detail::significant_improvement(*r, *base);
      }
    }
    if (m != Method::zero_shot && zero) {
      sig_a = detail::significant_improvement(*r, *zero);
    }
    std::string sig;
    if (sig_a) sig = "a";
    if (sig_b) sig += sig.empty() ? "b" : std::string(",b");
    out += "| " + std::string(method_display_name(m)) + " | " + std::to_string(r->k) + " | " +
           (r->alpha ? detail::format_double(*r->alpha, "%g") : std::string("N/A")) + " | " +
           detail::format_double(r->f1, "%.4f") + " | " + delta + " | " + sig + " |\n";
  }
  return out;
}

/// CSV with one row per evaluated grid point: method,k,alpha,f1.
inline std::string render_sweep_csv(
    const std::vector<std::pair<Method, GridSearchResult>>& sweeps) {
  std::string out = "method,k,alpha,f1\n";
  for (const auto& [method, result] : sweeps) {
    for (const GridPoint& p : result.points) {
      out += std::string(method_name(method)) + "," + std::to_string(p.k) + "," +
             (p.alpha ? detail::format_double(*p.alpha, "%g") : std::string("")) + "," +
             detail::format_double(p.f1, "%.6f") + "\n";
    }
  }
  return out;
}

}  // namespace dicl
