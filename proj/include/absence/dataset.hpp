#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "absence/calendar.hpp"
#include "absence/ingest.hpp"
#include "absence/rng.hpp"

namespace absence {

enum class OutingKind {
  kChristmas,
  kSpringBreak,
  kSummer,
  kAutumnWeekend,
  kWorkday,
  kSaturday,
};

const char* outing_kind_name(OutingKind kind);

struct OutingInterval {
  std::int64_t start = 0;  // inclusive
  std::int64_t end = 0;    // exclusive
  OutingKind kind = OutingKind::kWorkday;
};

struct FeatureRow {
  std::array<int, 4> appliances_on{};  // tv, kettle, oven, microwave
  int time_slot = 0;                   // [0, 1440/window_minutes)
  int weekday = 0;                     // 0 = Monday
  int day = 1;
  int month = 1;
};

struct LabeledRow {
  std::int64_t timestamp = 0;  // window start
  FeatureRow features;
  int label = 0;  // 1 = absent
};

struct LabeledDataset {
  std::vector<LabeledRow> rows;
  int window_minutes = 30;
};

// Binarized window grid shared by the four channels.
struct BinarizedGrid {
  std::vector<std::int64_t> window_starts;          // contiguous
  std::vector<std::array<bool, 4>> on;              // per window, per appliance
  int window_minutes = 30;

  bool any_on(std::size_t i) const {
    return on[i][0] || on[i][1] || on[i][2] || on[i][3];
  }
};

// Channels must share an identical window grid; appliance order is
// tv, kettle, oven, microwave. Throws std::invalid_argument on mismatch.
BinarizedGrid binarize_grid(const std::vector<ResampledSeries>& channels,
                            double threshold_watts);

struct AnnotationConfig {
  std::uint64_t seed = 0;
  double p_saturday_outing = 0.7;
  double saturday_start_lo_h = 9.0;   // local hours
  double saturday_start_hi_h = 18.0;
  double saturday_dur_lo_h = 2.0;
  double saturday_dur_hi_h = 6.0;
  int summer_start_day_lo = 1;  // August day window for the 2-week trip
  int summer_start_day_hi = 7;
  bool fixed_trips = true;
  bool workday_rule = true;
};

// One trip per kind per year: Christmas Dec 24-26 (through the 28th when
// the 26th falls on a weekend), a random 4-day spring break ending by
// May 31, two weeks starting in early August, and one autumn weekend.
std::vector<OutingInterval> plan_fixed_trips(int year, const AnnotationConfig& cfg,
                                             const Clock& clock, Rng& rng);

// Monday-Friday days outside fixed trips where every appliance is off in
// all windows intersecting 08:30-16:00 local time.
std::vector<OutingInterval> annotate_workdays(
    const BinarizedGrid& grid, const std::vector<OutingInterval>& fixed,
    const Clock& clock);

std::vector<OutingInterval> annotate_saturdays(
    const BinarizedGrid& grid, const std::vector<OutingInterval>& fixed,
    const AnnotationConfig& cfg, const Clock& clock, Rng& rng);

// Splits planned trips into sub-intervals that avoid windows with any
// appliance on, keeping labels consistent with the features.
std::vector<OutingInterval> trim_to_grid(const std::vector<OutingInterval>& trips,
                                         const BinarizedGrid& grid);

struct Annotation {
  std::vector<OutingInterval> planned_trips;     // one per kind per year
  std::vector<OutingInterval> effective;         // what labeling uses
  AnnotationConfig config;
};

Annotation annotate(const BinarizedGrid& grid, const AnnotationConfig& cfg,
                    const Clock& clock);

LabeledDataset build_dataset(const BinarizedGrid& grid,
                             const std::vector<OutingInterval>& intervals,
                             const Clock& clock);

// CSV: timestamp,tv,kettle,oven,microwave,time_slot,weekday,day,month,label
void write_dataset_csv(const LabeledDataset& ds, std::ostream& out);
LabeledDataset read_dataset_csv(std::istream& in);

void write_manifest(const Annotation& ann, const Clock& clock, std::ostream& out);

// Figure-style histogram: absent windows per weekday, CSV `weekday,count`.
std::array<std::int64_t, 7> outing_histogram(const LabeledDataset& ds);
void write_histogram_csv(const std::array<std::int64_t, 7>& hist, std::ostream& out);

}  // namespace absence
