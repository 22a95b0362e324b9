#include "absence/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace absence {
namespace {

constexpr std::int64_t kWorkdayStartS = 8 * 3600 + 1800;  // 08:30
constexpr std::int64_t kWorkdayEndS = 16 * 3600;          // 16:00

bool overlaps(std::int64_t a_start, std::int64_t a_end, const OutingInterval& iv) {
  return a_start < iv.end && iv.start < a_end;
}

bool inside_any(std::int64_t start, std::int64_t end,
                const std::vector<OutingInterval>& intervals) {
  for (const auto& iv : intervals) {
    if (overlaps(start, end, iv)) return true;
  }
  return false;
}

std::string format_local(std::int64_t ts, const Clock& clock) {
  const LocalTime lt = clock.decode(ts);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s %02d:%02d", format_date(lt.date).c_str(),
                lt.seconds_of_day / 3600, (lt.seconds_of_day % 3600) / 60);
  return buf;
}

}  // namespace

const char* outing_kind_name(OutingKind kind) {
  switch (kind) {
    case OutingKind::kChristmas: return "christmas";
    case OutingKind::kSpringBreak: return "spring_break";
    case OutingKind::kSummer: return "summer";
    case OutingKind::kAutumnWeekend: return "autumn_weekend";
    case OutingKind::kWorkday: return "workday";
    case OutingKind::kSaturday: return "saturday";
  }
  return "?";
}

BinarizedGrid binarize_grid(const std::vector<ResampledSeries>& channels,
                            double threshold_watts) {
  if (channels.size() != 4) {
    throw std::invalid_argument("binarize_grid: expected 4 appliance channels");
  }
  const auto& ref = channels.front();
  for (const auto& ch : channels) {
    if (ch.values.size() != ref.values.size() ||
        ch.window_minutes != ref.window_minutes ||
        (!ch.values.empty() &&
         (ch.values.front().window_start != ref.values.front().window_start ||
          ch.values.back().window_start != ref.values.back().window_start))) {
      throw std::invalid_argument("binarize_grid: channel window grids differ");
    }
  }
  BinarizedGrid grid;
  grid.window_minutes = ref.window_minutes;
  grid.window_starts.reserve(ref.values.size());
  grid.on.resize(ref.values.size());
  for (std::size_t i = 0; i < ref.values.size(); ++i) {
    grid.window_starts.push_back(ref.values[i].window_start);
    for (std::size_t c = 0; c < 4; ++c) {
      grid.on[i][c] = binarize(channels[c].values[i].mean_watts, threshold_watts);
    }
  }
  return grid;
}

std::vector<OutingInterval> plan_fixed_trips(int year, const AnnotationConfig& cfg,
                                             const Clock& clock, Rng& rng) {
  std::vector<OutingInterval> trips;

  // Christmas: Dec 24 through Dec 26, through the 28th when the 26th is a
  // weekend day.
  {
    OutingInterval iv;
    iv.kind = OutingKind::kChristmas;
    iv.start = clock.midnight(year, 12, 24);
    const int wd26 = weekday_from_days(days_from_civil({year, 12, 26}));
    iv.end = clock.midnight(year, 12, is_weekend(wd26) ? 29 : 27);
    trips.push_back(iv);
  }

  // 4-day spring break ending by May 31.
  {
    const std::int64_t d0 = days_from_civil({year, 3, 15});
    const std::int64_t d1 = days_from_civil({year, 5, 28});
    std::uniform_int_distribution<std::int64_t> day(d0, d1);
    const std::int64_t start_day = day(rng);
    OutingInterval iv;
    iv.kind = OutingKind::kSpringBreak;
    iv.start = start_day * kSecondsPerDay - clock.offset_seconds();
    iv.end = iv.start + 4 * kSecondsPerDay;
    trips.push_back(iv);
  }

  // Two weeks starting in early August.
  {
    std::uniform_int_distribution<int> day(cfg.summer_start_day_lo,
                                           cfg.summer_start_day_hi);
    OutingInterval iv;
    iv.kind = OutingKind::kSummer;
    iv.start = clock.midnight(year, 8, day(rng));
    iv.end = iv.start + 14 * kSecondsPerDay;
    trips.push_back(iv);
  }

  // One autumn weekend, Saturday 00:00 through Sunday 24:00.
  {
    std::vector<std::int64_t> saturdays;
    for (std::int64_t d = days_from_civil({year, 9, 1});
         d <= days_from_civil({year, 11, 30}); ++d) {
      if (weekday_from_days(d) == 5) saturdays.push_back(d);
    }
    std::uniform_int_distribution<std::size_t> pick(0, saturdays.size() - 1);
    OutingInterval iv;
    iv.kind = OutingKind::kAutumnWeekend;
    iv.start = saturdays[pick(rng)] * kSecondsPerDay - clock.offset_seconds();
    iv.end = iv.start + 2 * kSecondsPerDay;
    trips.push_back(iv);
  }

  return trips;
}

namespace {

// Day iteration over the grid's covered span. Returns local midnights of
// days whose [08:30, 16:00) frame (or whole day, for Saturdays) the grid
// fully covers.
struct DaySpan {
  std::int64_t first_midnight;
  int num_days;
};

DaySpan covered_days(const BinarizedGrid& grid, const Clock& clock) {
  const LocalTime first = clock.decode(grid.window_starts.front());
  std::int64_t first_mid = grid.window_starts.front() - first.seconds_of_day;
  const std::int64_t last = grid.window_starts.back();
  const int days =
      static_cast<int>((last - first_mid) / kSecondsPerDay) + 1;
  return DaySpan{first_mid, days};
}

// Index of the window containing ts, or -1 when outside the grid.
std::int64_t grid_index(const BinarizedGrid& grid, std::int64_t ts) {
  const std::int64_t w = static_cast<std::int64_t>(grid.window_minutes) * 60;
  const std::int64_t i = (ts - grid.window_starts.front()) / w;
  if (ts < grid.window_starts.front() ||
      i >= static_cast<std::int64_t>(grid.window_starts.size())) {
    return -1;
  }
  return i;
}

// All appliances off in every window intersecting [start, end); false when
// the grid does not fully cover the range.
bool range_all_off(const BinarizedGrid& grid, std::int64_t start, std::int64_t end) {
  const std::int64_t w = static_cast<std::int64_t>(grid.window_minutes) * 60;
  const std::int64_t lo = grid_index(grid, start);
  const std::int64_t hi = grid_index(grid, end - 1);
  if (lo < 0 || hi < 0) return false;
  for (std::int64_t i = lo; i <= hi; ++i) {
    if (grid.any_on(static_cast<std::size_t>(i))) return false;
  }
  (void)w;
  return true;
}

}  // namespace

std::vector<OutingInterval> annotate_workdays(
    const BinarizedGrid& grid, const std::vector<OutingInterval>& fixed,
    const Clock& clock) {
  std::vector<OutingInterval> out;
  const DaySpan span = covered_days(grid, clock);
  for (int d = 0; d < span.num_days; ++d) {
    const std::int64_t mid = span.first_midnight + static_cast<std::int64_t>(d) * kSecondsPerDay;
    if (clock.decode(mid).weekday >= 5) continue;
    if (inside_any(mid, mid + kSecondsPerDay, fixed)) continue;
    const std::int64_t start = mid + kWorkdayStartS;
    const std::int64_t end = mid + kWorkdayEndS;
    if (range_all_off(grid, start, end)) {
      out.push_back(OutingInterval{start, end, OutingKind::kWorkday});
    }
  }
  return out;
}

std::vector<OutingInterval> annotate_saturdays(
    const BinarizedGrid& grid, const std::vector<OutingInterval>& fixed,
    const AnnotationConfig& cfg, const Clock& clock, Rng& rng) {
  if (cfg.p_saturday_outing < 0.0 || cfg.p_saturday_outing > 1.0) {
    throw std::invalid_argument("annotate_saturdays: probability outside [0, 1]");
  }
  std::vector<OutingInterval> out;
  const std::int64_t w = static_cast<std::int64_t>(grid.window_minutes) * 60;
  const DaySpan span = covered_days(grid, clock);
  const std::uint64_t base = rng();
  for (int d = 0; d < span.num_days; ++d) {
    const std::int64_t mid = span.first_midnight + static_cast<std::int64_t>(d) * kSecondsPerDay;
    if (clock.decode(mid).weekday != 5) continue;
    if (inside_any(mid, mid + kSecondsPerDay, fixed)) continue;
    // Per-day stream so adding or removing a Saturday never shifts the
    // draws of any other day.
    Rng day_rng(derive_seed(base, "saturday-day", static_cast<std::uint64_t>(mid)));
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(day_rng) >= cfg.p_saturday_outing) continue;
    std::uniform_real_distribution<double> start_h(cfg.saturday_start_lo_h,
                                                   cfg.saturday_start_hi_h);
    std::uniform_real_distribution<double> dur_h(cfg.saturday_dur_lo_h,
                                                 cfg.saturday_dur_hi_h);
    std::int64_t start = mid + static_cast<std::int64_t>(start_h(day_rng) * 3600.0);
    std::int64_t end = start + static_cast<std::int64_t>(dur_h(day_rng) * 3600.0);
    end = std::min(end, mid + kSecondsPerDay);
    // Align to the window grid: the labeled windows are those whose start
    // lies inside the interval.
    start -= (start - grid.window_starts.front()) % w;
    // Keep the leading run of all-off windows.
    std::int64_t run_start = -1, run_end = -1;
    for (std::int64_t t = start; t < end; t += w) {
      const std::int64_t i = grid_index(grid, t);
      if (i < 0 || grid.any_on(static_cast<std::size_t>(i))) break;
      if (run_start < 0) run_start = t;
      run_end = t + w;
    }
    if (run_start >= 0) {
      out.push_back(OutingInterval{run_start, run_end, OutingKind::kSaturday});
    }
  }
  return out;
}

std::vector<OutingInterval> trim_to_grid(const std::vector<OutingInterval>& trips,
                                         const BinarizedGrid& grid) {
  std::vector<OutingInterval> out;
  const std::int64_t w = static_cast<std::int64_t>(grid.window_minutes) * 60;
  for (const auto& trip : trips) {
    std::int64_t run_start = -1, run_end = -1;
    std::int64_t t = trip.start;
    t += (w - (t - grid.window_starts.front()) % w) % w;  // first window start >= trip.start
    for (; t < trip.end; t += w) {
      const std::int64_t i = grid_index(grid, t);
      const bool off = i >= 0 && !grid.any_on(static_cast<std::size_t>(i));
      if (off) {
        if (run_start < 0) run_start = t;
        run_end = t + w;
      } else if (run_start >= 0) {
        out.push_back(OutingInterval{run_start, run_end, trip.kind});
        run_start = -1;
      }
    }
    if (run_start >= 0) {
      out.push_back(OutingInterval{run_start, run_end, trip.kind});
    }
  }
  return out;
}

Annotation annotate(const BinarizedGrid& grid, const AnnotationConfig& cfg,
                    const Clock& clock) {
  if (grid.window_starts.empty()) {
    throw std::invalid_argument("annotate: empty grid");
  }
  Annotation ann;
  ann.config = cfg;
  if (cfg.fixed_trips) {
    const int first_year = clock.decode(grid.window_starts.front()).date.year;
    const int last_year = clock.decode(grid.window_starts.back()).date.year;
    for (int year = first_year; year <= last_year; ++year) {
      Rng year_rng(derive_seed(cfg.seed, "trips", static_cast<std::uint64_t>(year)));
      auto trips = plan_fixed_trips(year, cfg, clock, year_rng);
      ann.planned_trips.insert(ann.planned_trips.end(), trips.begin(), trips.end());
    }
  }
  ann.effective = trim_to_grid(ann.planned_trips, grid);
  if (cfg.workday_rule) {
    auto workdays = annotate_workdays(grid, ann.planned_trips, clock);
    ann.effective.insert(ann.effective.end(), workdays.begin(), workdays.end());
  }
  Rng sat_rng(derive_seed(cfg.seed, "saturdays"));
  auto saturdays = annotate_saturdays(grid, ann.planned_trips, cfg, clock, sat_rng);
  ann.effective.insert(ann.effective.end(), saturdays.begin(), saturdays.end());
  std::sort(ann.effective.begin(), ann.effective.end(),
            [](const OutingInterval& a, const OutingInterval& b) {
              return a.start < b.start;
            });
  return ann;
}

LabeledDataset build_dataset(const BinarizedGrid& grid,
                             const std::vector<OutingInterval>& intervals,
                             const Clock& clock) {
  LabeledDataset ds;
  ds.window_minutes = grid.window_minutes;
  const int slot_seconds = grid.window_minutes * 60;
  std::vector<char> absent(grid.window_starts.size(), 0);
  for (const auto& iv : intervals) {
    for (std::int64_t t = iv.start; t < iv.end; t += slot_seconds) {
      const std::int64_t i = grid_index(grid, t);
      if (i >= 0 && grid.window_starts[static_cast<std::size_t>(i)] == t) {
        absent[static_cast<std::size_t>(i)] = 1;
      }
    }
  }
  ds.rows.reserve(grid.window_starts.size());
  for (std::size_t i = 0; i < grid.window_starts.size(); ++i) {
    LabeledRow row;
    row.timestamp = grid.window_starts[i];
    const LocalTime lt = clock.decode(row.timestamp);
    for (std::size_t c = 0; c < 4; ++c) {
      row.features.appliances_on[c] = grid.on[i][c] ? 1 : 0;
    }
    row.features.time_slot = lt.seconds_of_day / slot_seconds;
    row.features.weekday = lt.weekday;
    row.features.day = lt.date.day;
    row.features.month = lt.date.month;
    row.label = absent[i];
    ds.rows.push_back(row);
  }
  return ds;
}

void write_dataset_csv(const LabeledDataset& ds, std::ostream& out) {
  out << "timestamp,tv,kettle,oven,microwave,time_slot,weekday,day,month,label\n";
  for (const auto& r : ds.rows) {
    out << r.timestamp << ',' << r.features.appliances_on[0] << ','
        << r.features.appliances_on[1] << ',' << r.features.appliances_on[2] << ','
        << r.features.appliances_on[3] << ',' << r.features.time_slot << ','
        << r.features.weekday << ',' << r.features.day << ',' << r.features.month
        << ',' << r.label << '\n';
  }
}

LabeledDataset read_dataset_csv(std::istream& in) {
  LabeledDataset ds;
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::istringstream ls(line);
    LabeledRow r;
    char comma;
    if (!(ls >> r.timestamp >> comma >> r.features.appliances_on[0] >> comma >>
          r.features.appliances_on[1] >> comma >> r.features.appliances_on[2] >>
          comma >> r.features.appliances_on[3] >> comma >> r.features.time_slot >>
          comma >> r.features.weekday >> comma >> r.features.day >> comma >>
          r.features.month >> comma >> r.label)) {
      throw ParseError("dataset CSV line " + std::to_string(line_no) + ": bad row");
    }
    ds.rows.push_back(r);
  }
  if (ds.rows.size() >= 2) {
    ds.window_minutes =
        static_cast<int>((ds.rows[1].timestamp - ds.rows[0].timestamp) / 60);
  }
  return ds;
}

void write_manifest(const Annotation& ann, const Clock& clock, std::ostream& out) {
  out << "annotation_manifest v1\n";
  out << "seed " << ann.config.seed << '\n';
  out << "p_saturday_outing " << ann.config.p_saturday_outing << '\n';
  out << "saturday_start_hours " << ann.config.saturday_start_lo_h << ' '
      << ann.config.saturday_start_hi_h << '\n';
  out << "saturday_duration_hours " << ann.config.saturday_dur_lo_h << ' '
      << ann.config.saturday_dur_hi_h << '\n';
  out << "fixed_trips " << (ann.config.fixed_trips ? 1 : 0) << '\n';
  out << "workday_rule " << (ann.config.workday_rule ? 1 : 0) << '\n';
  out << "planned_trips " << ann.planned_trips.size() << '\n';
  for (const auto& iv : ann.planned_trips) {
    out << "  " << outing_kind_name(iv.kind) << ' ' << iv.start << ' ' << iv.end
        << "  # " << format_local(iv.start, clock) << " .. "
        << format_local(iv.end, clock) << '\n';
  }
  out << "effective_intervals " << ann.effective.size() << '\n';
  for (const auto& iv : ann.effective) {
    out << "  " << outing_kind_name(iv.kind) << ' ' << iv.start << ' ' << iv.end
        << "  # " << format_local(iv.start, clock) << " .. "
        << format_local(iv.end, clock) << '\n';
  }
}

std::array<std::int64_t, 7> outing_histogram(const LabeledDataset& ds) {
  std::array<std::int64_t, 7> hist{};
  for (const auto& r : ds.rows) {
    if (r.label == 1) hist[static_cast<std::size_t>(r.features.weekday)]++;
  }
  return hist;
}

void write_histogram_csv(const std::array<std::int64_t, 7>& hist, std::ostream& out) {
  out << "weekday,count\n";
  for (int d = 0; d < 7; ++d) {
    out << d << ',' << hist[static_cast<std::size_t>(d)] << '\n';
  }
}

}  // namespace absence
