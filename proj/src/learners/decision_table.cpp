#include "absence/decision_table.hpp"

#include <algorithm>
#include <queue>

namespace absence {
namespace {

std::vector<int> subset_from_mask(unsigned mask) {
  std::vector<int> subset;
  for (int f = 0; f < kNumFeatures; ++f) {
    if (mask & (1u << f)) subset.push_back(f);
  }
  return subset;
}

std::vector<int> make_key(const FeatureVec& x, const std::vector<int>& subset) {
  std::vector<int> key;
  key.reserve(subset.size());
  for (int f : subset) key.push_back(x[static_cast<std::size_t>(f)]);
  return key;
}

struct CellCounts {
  std::array<std::int64_t, 2> c{};
};

std::map<std::vector<int>, CellCounts> build_cells(const DataView& data,
                                                   const std::vector<int>& subset) {
  std::map<std::vector<int>, CellCounts> cells;
  for (std::size_t i = 0; i < data.size(); ++i) {
    cells[make_key(data.x[i], subset)].c[static_cast<std::size_t>(data.y[i])] += 1;
  }
  return cells;
}

int majority(std::int64_t c0, std::int64_t c1) { return c1 > c0 ? 1 : 0; }

}  // namespace

double table_loo_accuracy(const DataView& data, const std::vector<int>& subset) {
  const auto cells = build_cells(data, subset);
  std::array<std::int64_t, 2> global{};
  for (int y : data.y) global[static_cast<std::size_t>(y)] += 1;

  std::int64_t correct = 0;
  for (const auto& [key, cell] : cells) {
    for (int y = 0; y < 2; ++y) {
      const std::int64_t cy = cell.c[static_cast<std::size_t>(y)];
      if (cy == 0) continue;
      // Remove one row of class y and predict it from the rest.
      std::int64_t c0 = cell.c[0] - (y == 0);
      std::int64_t c1 = cell.c[1] - (y == 1);
      int pred;
      if (c0 + c1 == 0) {
        pred = majority(global[0] - (y == 0), global[1] - (y == 1));
      } else {
        pred = majority(c0, c1);
      }
      if (pred == y) correct += cy;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

int DecisionTableModel::predict(const FeatureVec& x) const {
  check_feature_ranges(x);
  const auto it = table.find(make_key(x, features));
  return it == table.end() ? fallback_class : it->second;
}

nlohmann::json DecisionTableModel::params_json() const {
  nlohmann::json j;
  j["features"] = features;
  j["fallback"] = fallback_class;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [key, cls] : table) {
    rows.push_back({{"key", key}, {"class", cls}});
  }
  j["rows"] = rows;
  return j;
}

std::unique_ptr<DecisionTableModel> decision_table_fit(const DataView& data,
                                                       const Hyperparams& hp) {
  const int stale_limit = hp.get_int("search_stale_limit", 5);

  // Best-first search over feature subsets, scored by leave-one-out
  // accuracy; expansion stops after stale_limit expansions without a
  // strict improvement.
  std::vector<double> score_cache(1u << kNumFeatures, -1.0);
  auto score = [&](unsigned mask) {
    if (score_cache[mask] < 0) {
      score_cache[mask] = table_loo_accuracy(data, subset_from_mask(mask));
    }
    return score_cache[mask];
  };

  struct Entry {
    double score;
    unsigned mask;
    bool operator<(const Entry& o) const {
      if (score != o.score) return score < o.score;
      return mask > o.mask;  // smaller mask first on ties
    }
  };
  std::priority_queue<Entry> open;
  std::vector<bool> seen(1u << kNumFeatures, false);

  unsigned best_mask = 0;
  double best_score = score(0);
  open.push({best_score, 0});
  seen[0] = true;
  int stale = 0;
  while (!open.empty() && stale < stale_limit) {
    const Entry cur = open.top();
    open.pop();
    bool improved = false;
    for (int f = 0; f < kNumFeatures; ++f) {
      const unsigned next = cur.mask | (1u << f);
      if (next == cur.mask || seen[next]) continue;
      seen[next] = true;
      const double s = score(next);
      open.push({s, next});
      if (s > best_score + 1e-12) {
        best_score = s;
        best_mask = next;
        improved = true;
      }
    }
    stale = improved ? 0 : stale + 1;
  }

  auto model = std::make_unique<DecisionTableModel>();
  model->features = subset_from_mask(best_mask);
  std::array<std::int64_t, 2> global{};
  for (int y : data.y) global[static_cast<std::size_t>(y)] += 1;
  model->fallback_class = majority(global[0], global[1]);
  for (const auto& [key, cell] : build_cells(data, model->features)) {
    model->table[key] = cell.c[0] + cell.c[1] > 0 ? majority(cell.c[0], cell.c[1])
                                                  : model->fallback_class;
  }
  model->hyperparams = hp;
  return model;
}

}  // namespace absence
