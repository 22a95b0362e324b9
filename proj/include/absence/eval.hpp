#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "absence/learners.hpp"

namespace absence {

// Absent (label 1) is the positive class unless flipped in CvOptions.

struct ConfusionMatrix {
  std::int64_t tp = 0, tn = 0, fp = 0, fn = 0;

  std::int64_t total() const { return tp + tn + fp + fn; }
  ConfusionMatrix& operator+=(const ConfusionMatrix& o);
};

ConfusionMatrix confusion(const std::vector<int>& truth,
                          const std::vector<int>& pred, int positive_class = 1);

struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool degenerate = false;  // some metric hit a 0/0 and was reported as 0
};

MetricsReport metrics(const ConfusionMatrix& cm);

struct CvOptions {
  int folds = 10;
  int runs = 10;
  bool stratified = true;
  bool pool_folds = false;  // pool confusion counts per run instead of
                            // averaging per-fold metrics
  int positive_class = 1;
  int workers = 1;
};

struct CvResult {
  std::vector<std::vector<MetricsReport>> per_fold;  // [run][fold]
  std::vector<MetricsReport> per_run_mean;
  MetricsReport overall_mean;
  MetricsReport best_run;
  int best_run_index = 0;

  // Per-(run, fold) F1 vector in (run, fold) order, for paired t-tests.
  std::vector<double> f1_scores() const;
};

// Stratified shuffle split: fold id per row; per-class fold sizes differ
// by at most one row.
std::vector<int> stratified_folds(const std::vector<int>& labels, int k, Rng& rng);
std::vector<int> shuffled_folds(std::size_t n, int k, Rng& rng);

CvResult cross_validate(const DataView& data, LearnerKind kind,
                        const Hyperparams& hp, const CvOptions& opt,
                        std::uint64_t seed);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  bool significant = false;
  bool degenerate = false;  // zero variance with nonzero mean difference
};

// Corrected resampled paired t-test: the variance term is scaled by
// (1/n + test_train_ratio). Plain paired t-test with ratio 0.
TTestResult paired_ttest(const std::vector<double>& scores_a,
                         const std::vector<double>& scores_b, double alpha,
                         double test_train_ratio);

struct BenchmarkEntry {
  LearnerKind kind;
  Hyperparams hp;
};

struct BenchmarkReport {
  std::vector<LearnerKind> learners;
  std::vector<CvResult> results;       // parallel to learners
  std::size_t baseline_index = 0;      // best average F1
  std::vector<TTestResult> ttests;     // baseline vs each learner (self = identity)
  double alpha = 0.05;
};

BenchmarkReport benchmark(const DataView& data,
                          const std::vector<BenchmarkEntry>& entries,
                          const CvOptions& opt, double alpha, std::uint64_t seed);

// Aligned plain-text tables (best run + average).
void write_report_text(const BenchmarkReport& report, std::ostream& out);
// CSV `learner,stat,accuracy,precision,recall,f1` with stat in {best, average}.
void write_report_csv(const BenchmarkReport& report, std::ostream& out);
// CSV `baseline,challenger,t,p,significant`.
void write_ttest_csv(const BenchmarkReport& report, std::ostream& out);

}  // namespace absence
