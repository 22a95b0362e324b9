#include "absence/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "absence/rng.hpp"

namespace absence {
namespace {

bool parse_int64(const std::string& tok, std::int64_t& out) {
  if (tok.empty()) return false;
  std::size_t pos = 0;
  try {
    out = std::stoll(tok, &pos);
  } catch (const std::exception&) {
    return false;
  }
  return pos == tok.size();
}

bool parse_double(const std::string& tok, double& out) {
  if (tok.empty()) return false;
  std::size_t pos = 0;
  try {
    out = std::stod(tok, &pos);
  } catch (const std::exception&) {
    return false;
  }
  return pos == tok.size() && std::isfinite(out);
}

[[noreturn]] void fail_line(std::size_t line_no, const std::string& what) {
  throw ParseError("line " + std::to_string(line_no) + ": " + what);
}

std::string format_watts(double w) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", w);
  return buf;
}

}  // namespace

RawSeries parse_channel(std::istream& in, const std::string& appliance) {
  RawSeries series;
  series.appliance = appliance;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto space = line.find(' ');
    if (space == std::string::npos || line.find(' ', space + 1) != std::string::npos) {
      fail_line(line_no, "expected \"<timestamp> <watts>\"");
    }
    std::int64_t ts = 0;
    double watts = 0.0;
    if (!parse_int64(line.substr(0, space), ts)) {
      fail_line(line_no, "non-numeric timestamp");
    }
    if (!parse_double(line.substr(space + 1), watts)) {
      fail_line(line_no, "non-numeric wattage");
    }
    if (ts <= 0) fail_line(line_no, "timestamp must be positive");
    if (watts < 0) fail_line(line_no, "negative wattage");
    if (!series.samples.empty() && ts <= series.samples.back().timestamp) {
      fail_line(line_no, "non-monotonic timestamp");
    }
    series.samples.push_back(RawSample{ts, watts});
  }
  return series;
}

void serialize_channel(const RawSeries& series, std::ostream& out) {
  for (const auto& s : series.samples) {
    out << s.timestamp << ' ' << format_watts(s.watts) << '\n';
  }
}

std::map<int, std::string> parse_labels(std::istream& in) {
  std::map<int, std::string> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    int channel = 0;
    std::string name;
    if (!(ls >> channel >> name)) {
      fail_line(line_no, "expected \"<channel> <name>\"");
    }
    labels[channel] = name;
  }
  return labels;
}

ResampledSeries resample(const RawSeries& series, int window_minutes,
                         const Clock& clock) {
  if (series.samples.empty()) {
    throw std::invalid_argument("resample: empty series");
  }
  if (window_minutes <= 0 || 1440 % window_minutes != 0) {
    throw std::invalid_argument("resample: window must divide 1440 minutes");
  }
  const std::int64_t w = static_cast<std::int64_t>(window_minutes) * 60;
  const std::int64_t off = clock.offset_seconds();
  auto window_index = [&](std::int64_t ts) {
    std::int64_t local = ts + off;
    std::int64_t idx = local / w;
    if (local < 0 && local % w != 0) --idx;
    return idx;
  };
  const std::int64_t first = window_index(series.samples.front().timestamp);
  const std::int64_t last = window_index(series.samples.back().timestamp);
  const std::size_t n = static_cast<std::size_t>(last - first + 1);

  std::vector<double> sums(n, 0.0);
  std::vector<std::int64_t> counts(n, 0);
  for (const auto& s : series.samples) {
    const auto i = static_cast<std::size_t>(window_index(s.timestamp) - first);
    sums[i] += s.watts;
    counts[i] += 1;
  }

  ResampledSeries out;
  out.appliance = series.appliance;
  out.window_minutes = window_minutes;
  out.values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    ResampledWindow win;
    win.window_start = (first + static_cast<std::int64_t>(i)) * w - off;
    win.sample_count = counts[i];
    win.mean_watts = counts[i] > 0 ? sums[i] / static_cast<double>(counts[i]) : 0.0;
    out.values.push_back(win);
  }
  return out;
}

const std::vector<std::string> kSynthAppliances = {"television", "kettle", "oven",
                                                   "microwave"};

namespace {

struct ApplianceProfile {
  double active_lo, active_hi;  // burst wattage band
  int bursts_lo, bursts_hi;     // bursts per activity window
  int dur_lo_s, dur_hi_s;       // burst duration
};

ApplianceProfile profile_for(const std::string& appliance) {
  if (appliance == "kettle") return {2000, 2900, 1, 3, 120, 240};
  if (appliance == "oven") return {1500, 2500, 0, 1, 1200, 3600};
  if (appliance == "microwave") return {800, 1200, 1, 2, 120, 480};
  return {80, 200, 1, 1, 1800, 7200};  // television and synthetic names
}

struct Burst {
  int start_s, end_s;  // seconds of day
  double watts;
};

void add_bursts(std::vector<Burst>& bursts, Rng& rng, const ApplianceProfile& p,
                int window_lo_s, int window_hi_s) {
  std::uniform_int_distribution<int> n_dist(p.bursts_lo, p.bursts_hi);
  const int n = n_dist(rng);
  for (int i = 0; i < n; ++i) {
    std::uniform_int_distribution<int> dur(p.dur_lo_s, p.dur_hi_s);
    const int d = dur(rng);
    if (window_hi_s - d <= window_lo_s) continue;
    std::uniform_int_distribution<int> start(window_lo_s, window_hi_s - d);
    std::uniform_real_distribution<double> w(p.active_lo, p.active_hi);
    const int s = start(rng);
    bursts.push_back(Burst{s, s + d, w(rng)});
  }
}

}  // namespace

RawSeries synth_channel(const std::string& appliance, const SynthConfig& cfg,
                        const Clock& clock) {
  if (cfg.num_days < 1) {
    throw std::invalid_argument("synth_channel: num_days must be >= 1");
  }
  const ApplianceProfile prof = profile_for(appliance);
  Rng rng(derive_seed(cfg.seed, "synth/" + appliance));
  std::uniform_real_distribution<double> standby(0.6, 1.4);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  RawSeries series;
  series.appliance = appliance;
  series.samples.reserve(static_cast<std::size_t>(cfg.num_days) * 14400);

  const std::int64_t t0 = clock.midnight(cfg.start_date);
  for (int day = 0; day < cfg.num_days; ++day) {
    const std::int64_t day_start = t0 + static_cast<std::int64_t>(day) * kSecondsPerDay;
    const int wd = clock.decode(day_start).weekday;

    std::vector<Burst> bursts;
    // Morning ends before 08:30 so idle weekdays stay idle through the
    // workday annotation frame.
    add_bursts(bursts, rng, prof, 6 * 3600 + 1800, 8 * 3600 + 1500);
    add_bursts(bursts, rng, prof, 17 * 3600, 21 * 3600 + 1800);
    const double p_midday =
        wd < 5 ? cfg.p_weekday_midday_use
               : (wd == 5 ? cfg.p_saturday_midday_use : 0.5);
    if (coin(rng) < p_midday) {
      add_bursts(bursts, rng, prof, 11 * 3600, 15 * 3600);
    }
    std::sort(bursts.begin(), bursts.end(),
              [](const Burst& a, const Burst& b) { return a.start_s < b.start_s; });

    for (int s = 0; s < kSecondsPerDay; s += 6) {
      double watts = standby(rng);
      for (const auto& b : bursts) {
        if (s >= b.start_s && s < b.end_s) {
          watts = b.watts;
          break;
        }
      }
      series.samples.push_back(RawSample{day_start + s, watts});
    }
  }
  return series;
}

std::vector<RawSeries> synth_household(const SynthConfig& cfg, const Clock& clock) {
  std::vector<RawSeries> channels;
  channels.reserve(kSynthAppliances.size());
  for (const auto& name : kSynthAppliances) {
    channels.push_back(synth_channel(name, cfg, clock));
  }
  return channels;
}

void write_resampled_csv(const ResampledSeries& series, std::ostream& out) {
  out << "window_start,appliance,mean_watts,sample_count\n";
  for (const auto& w : series.values) {
    out << w.window_start << ',' << series.appliance << ','
        << format_watts(w.mean_watts) << ',' << w.sample_count << '\n';
  }
}

ResampledSeries read_resampled_csv(std::istream& in) {
  ResampledSeries series;
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (header) {
      if (line != "window_start,appliance,mean_watts,sample_count") {
        fail_line(line_no, "unexpected resampled CSV header");
      }
      header = false;
      continue;
    }
    std::istringstream ls(line);
    std::string ts_s, app, mean_s, count_s;
    if (!std::getline(ls, ts_s, ',') || !std::getline(ls, app, ',') ||
        !std::getline(ls, mean_s, ',') || !std::getline(ls, count_s)) {
      fail_line(line_no, "expected 4 CSV fields");
    }
    ResampledWindow w;
    std::int64_t count = 0;
    if (!parse_int64(ts_s, w.window_start) || !parse_double(mean_s, w.mean_watts) ||
        !parse_int64(count_s, count)) {
      fail_line(line_no, "non-numeric CSV field");
    }
    w.sample_count = count;
    series.appliance = app;
    series.values.push_back(w);
  }
  if (series.values.size() >= 2) {
    const auto step = series.values[1].window_start - series.values[0].window_start;
    series.window_minutes = static_cast<int>(step / 60);
  }
  return series;
}

}  // namespace absence
