#include "absence/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace absence {

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) {
  tp += o.tp;
  tn += o.tn;
  fp += o.fp;
  fn += o.fn;
  return *this;
}

ConfusionMatrix confusion(const std::vector<int>& truth,
                          const std::vector<int>& pred, int positive_class) {
  if (truth.empty() || truth.size() != pred.size()) {
    throw std::invalid_argument("confusion: need equal-length non-empty inputs");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool pos = truth[i] == positive_class;
    const bool pred_pos = pred[i] == positive_class;
    if (pos && pred_pos) ++cm.tp;
    else if (!pos && !pred_pos) ++cm.tn;
    else if (!pos && pred_pos) ++cm.fp;
    else ++cm.fn;
  }
  return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  if (cm.total() < 1) throw std::invalid_argument("metrics: empty confusion matrix");
  MetricsReport r;
  r.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  // 0/0 cases report 0 and raise the degenerate flag to keep aggregation total.
  if (cm.tp + cm.fp > 0) {
    r.precision = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
  } else {
    r.degenerate = true;
  }
  if (cm.tp + cm.fn > 0) {
    r.recall = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
  } else {
    r.degenerate = true;
  }
  if (r.precision + r.recall > 0) {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  } else {
    r.degenerate = true;
  }
  return r;
}

std::vector<int> shuffled_folds(std::size_t n, int k, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> fold(n);
  for (std::size_t i = 0; i < n; ++i) {
    fold[order[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  }
  return fold;
}

std::vector<int> stratified_folds(const std::vector<int>& labels, int k, Rng& rng) {
  std::vector<int> fold(labels.size(), -1);
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    if (members.empty()) continue;
    if (members.size() < static_cast<std::size_t>(k)) {
      throw std::invalid_argument("stratified_folds: class " + std::to_string(cls) +
                                  " has fewer rows than folds");
    }
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t i = 0; i < members.size(); ++i) {
      fold[members[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    }
  }
  return fold;
}

namespace {

MetricsReport mean_of(const std::vector<MetricsReport>& reports) {
  MetricsReport m;
  for (const auto& r : reports) {
    m.accuracy += r.accuracy;
    m.precision += r.precision;
    m.recall += r.recall;
    m.f1 += r.f1;
    m.degenerate = m.degenerate || r.degenerate;
  }
  const auto n = static_cast<double>(reports.size());
  m.accuracy /= n;
  m.precision /= n;
  m.recall /= n;
  m.f1 /= n;
  return m;
}

template <typename Fn>
void parallel_for(int n, int workers, Fn&& fn) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::future<void>> futures;
  std::atomic<int> next{0};
  const int threads = std::min(workers, n);
  for (int t = 0; t < threads; ++t) {
    futures.push_back(std::async(std::launch::async, [&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    }));
  }
  for (auto& f : futures) f.get();
}

}  // namespace

CvResult cross_validate(const DataView& data, LearnerKind kind,
                        const Hyperparams& hp, const CvOptions& opt,
                        std::uint64_t seed) {
  if (opt.folds < 2 || opt.runs < 1) {
    throw std::invalid_argument("cross_validate: need folds >= 2, runs >= 1");
  }
  // Fold assignments first, all from the fold stream, so every learner
  // evaluated under the same seed shares identical splits.
  std::vector<std::vector<int>> assignments;
  for (int run = 0; run < opt.runs; ++run) {
    Rng rng(derive_seed(seed, "cv-folds", static_cast<std::uint64_t>(run)));
    assignments.push_back(opt.stratified
                              ? stratified_folds(data.y, opt.folds, rng)
                              : shuffled_folds(data.size(), opt.folds, rng));
  }

  CvResult result;
  result.per_fold.assign(static_cast<std::size_t>(opt.runs), {});
  for (auto& run : result.per_fold) {
    run.resize(static_cast<std::size_t>(opt.folds));
  }

  struct Task {
    int run, fold;
  };
  std::vector<Task> tasks;
  for (int run = 0; run < opt.runs; ++run) {
    for (int fold = 0; fold < opt.folds; ++fold) tasks.push_back({run, fold});
  }
  std::vector<ConfusionMatrix> fold_cms(tasks.size());

  parallel_for(static_cast<int>(tasks.size()), opt.workers, [&](int ti) {
    const auto [run, fold] = tasks[static_cast<std::size_t>(ti)];
    const auto& fold_of = assignments[static_cast<std::size_t>(run)];
    DataView train;
    std::vector<FeatureVec> test_x;
    std::vector<int> test_y;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (fold_of[i] == fold) {
        test_x.push_back(data.x[i]);
        test_y.push_back(data.y[i]);
      } else {
        train.x.push_back(data.x[i]);
        train.y.push_back(data.y[i]);
      }
    }
    const auto model_seed =
        derive_seed(seed, "cv-train",
                    static_cast<std::uint64_t>(run) * 1000 +
                        static_cast<std::uint64_t>(fold));
    const auto model = fit(kind, train, hp, model_seed);
    const auto pred = model->predict_all(test_x);
    fold_cms[static_cast<std::size_t>(ti)] =
        confusion(test_y, pred, opt.positive_class);
  });

  for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
    result.per_fold[static_cast<std::size_t>(tasks[ti].run)]
                   [static_cast<std::size_t>(tasks[ti].fold)] =
        metrics(fold_cms[ti]);
  }

  for (int run = 0; run < opt.runs; ++run) {
    const auto& folds = result.per_fold[static_cast<std::size_t>(run)];
    if (opt.pool_folds) {
      ConfusionMatrix pooled;
      for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
        if (tasks[ti].run == run) pooled += fold_cms[ti];
      }
      result.per_run_mean.push_back(metrics(pooled));
    } else {
      result.per_run_mean.push_back(mean_of(folds));
    }
  }
  result.overall_mean = mean_of(result.per_run_mean);

  result.best_run_index = 0;
  for (int run = 1; run < opt.runs; ++run) {
    const auto& cur = result.per_run_mean[static_cast<std::size_t>(run)];
    const auto& best = result.per_run_mean[static_cast<std::size_t>(result.best_run_index)];
    // Best run by F-score, ties by accuracy.
    if (cur.f1 > best.f1 ||
        (cur.f1 == best.f1 && cur.accuracy > best.accuracy)) {
      result.best_run_index = run;
    }
  }
  result.best_run = result.per_run_mean[static_cast<std::size_t>(result.best_run_index)];
  return result;
}

std::vector<double> CvResult::f1_scores() const {
  std::vector<double> scores;
  for (const auto& run : per_fold) {
    for (const auto& fold : run) scores.push_back(fold.f1);
  }
  return scores;
}

TTestResult paired_ttest(const std::vector<double>& scores_a,
                         const std::vector<double>& scores_b, double alpha,
                         double test_train_ratio) {
  if (scores_a.size() != scores_b.size() || scores_a.size() < 2) {
    throw std::invalid_argument("paired_ttest: need equal-length samples, n >= 2");
  }
  const auto n = static_cast<double>(scores_a.size());
  std::vector<double> diff(scores_a.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = scores_a[i] - scores_b[i];
  const double mean = std::accumulate(diff.begin(), diff.end(), 0.0) / n;
  double var = 0.0;
  for (double d : diff) var += (d - mean) * (d - mean);
  var /= n - 1.0;

  TTestResult r;
  if (var <= 0.0) {
    if (mean == 0.0) {
      r.t = 0.0;
      r.p = 1.0;
      return r;  // identical samples
    }
    // Constant nonzero difference: the statistic is unbounded.
    r.degenerate = true;
    r.significant = true;
    r.t = mean > 0 ? std::numeric_limits<double>::infinity()
                   : -std::numeric_limits<double>::infinity();
    r.p = 0.0;
    return r;
  }
  r.t = mean / std::sqrt((1.0 / n + test_train_ratio) * var);
  const boost::math::students_t_distribution<double> dist(n - 1.0);
  r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  r.significant = r.p < alpha;
  return r;
}

BenchmarkReport benchmark(const DataView& data,
                          const std::vector<BenchmarkEntry>& entries,
                          const CvOptions& opt, double alpha, std::uint64_t seed) {
  if (entries.empty()) throw std::invalid_argument("benchmark: no learners");
  BenchmarkReport report;
  report.alpha = alpha;
  for (const auto& entry : entries) {
    report.learners.push_back(entry.kind);
    report.results.push_back(cross_validate(data, entry.kind, entry.hp, opt, seed));
  }
  report.baseline_index = 0;
  for (std::size_t i = 1; i < report.results.size(); ++i) {
    if (report.results[i].overall_mean.f1 >
        report.results[report.baseline_index].overall_mean.f1) {
      report.baseline_index = i;
    }
  }
  const auto baseline_scores = report.results[report.baseline_index].f1_scores();
  const double ratio = 1.0 / static_cast<double>(opt.folds - 1);
  for (std::size_t i = 0; i < report.results.size(); ++i) {
    if (i == report.baseline_index) {
      report.ttests.push_back(TTestResult{});  // t = 0 vs itself
      continue;
    }
    report.ttests.push_back(
        paired_ttest(baseline_scores, report.results[i].f1_scores(), alpha, ratio));
  }
  return report;
}

namespace {

void write_table(const BenchmarkReport& report, std::ostream& out, bool best) {
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %10s %10s %10s %10s\n", "Classifier",
                "Accuracy", "Precision", "Recall", "F-score");
  out << line;
  for (std::size_t i = 0; i < report.learners.size(); ++i) {
    const MetricsReport& m = best ? report.results[i].best_run
                                  : report.results[i].overall_mean;
    std::snprintf(line, sizeof line, "%-16s %10.4f %10.4f %10.4f %10.4f\n",
                  learner_name(report.learners[i]), m.accuracy, m.precision,
                  m.recall, m.f1);
    out << line;
  }
}

}  // namespace

void write_report_text(const BenchmarkReport& report, std::ostream& out) {
  out << "Best run per classifier\n";
  write_table(report, out, true);
  out << "\nAverage over runs\n";
  write_table(report, out, false);
  out << "\nPaired t-tests vs baseline ("
      << learner_name(report.learners[report.baseline_index])
      << ", alpha=" << report.alpha << ")\n";
  char line[160];
  for (std::size_t i = 0; i < report.learners.size(); ++i) {
    if (i == report.baseline_index) continue;
    const auto& tt = report.ttests[i];
    std::snprintf(line, sizeof line, "  vs %-16s t=%9.4f p=%.6f %s\n",
                  learner_name(report.learners[i]), tt.t, tt.p,
                  tt.significant ? "significant" : "not significant");
    out << line;
  }
}

void write_report_csv(const BenchmarkReport& report, std::ostream& out) {
  out << "learner,stat,accuracy,precision,recall,f1\n";
  char line[200];
  for (std::size_t i = 0; i < report.learners.size(); ++i) {
    for (const bool best : {true, false}) {
      const MetricsReport& m = best ? report.results[i].best_run
                                    : report.results[i].overall_mean;
      std::snprintf(line, sizeof line, "%s,%s,%.10g,%.10g,%.10g,%.10g\n",
                    learner_name(report.learners[i]), best ? "best" : "average",
                    m.accuracy, m.precision, m.recall, m.f1);
      out << line;
    }
  }
}

void write_ttest_csv(const BenchmarkReport& report, std::ostream& out) {
  out << "baseline,challenger,t,p,significant\n";
  const char* base = learner_name(report.learners[report.baseline_index]);
  char line[200];
  for (std::size_t i = 0; i < report.learners.size(); ++i) {
    if (i == report.baseline_index) continue;
    const auto& tt = report.ttests[i];
    std::snprintf(line, sizeof line, "%s,%s,%.10g,%.10g,%d\n", base,
                  learner_name(report.learners[i]), tt.t, tt.p,
                  tt.significant ? 1 : 0);
    out << line;
  }
}

}  // namespace absence
