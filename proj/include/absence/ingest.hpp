#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "absence/calendar.hpp"

namespace absence {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RawSample {
  std::int64_t timestamp = 0;  // seconds since epoch
  double watts = 0.0;
};

struct RawSeries {
  std::string appliance;
  std::vector<RawSample> samples;  // strictly increasing timestamps
};

struct ResampledWindow {
  std::int64_t window_start = 0;
  double mean_watts = 0.0;
  std::int64_t sample_count = 0;
};

struct ResampledSeries {
  std::string appliance;
  int window_minutes = 30;
  std::vector<ResampledWindow> values;  // contiguous, boundary-aligned
};

// UK-DALE channel format: one "<unix_seconds> <watts>" per line.
// Throws ParseError with a line number on malformed or non-monotonic input.
RawSeries parse_channel(std::istream& in, const std::string& appliance);
void serialize_channel(const RawSeries& series, std::ostream& out);

// labels.dat: "<channel> <name>" per line.
std::map<int, std::string> parse_labels(std::istream& in);

// Mean power per wall-clock-aligned window. Windows without samples get
// mean 0 / count 0 (indistinguishable from "off" downstream of the
// activity threshold). window_minutes must divide 1440.
ResampledSeries resample(const RawSeries& series, int window_minutes,
                         const Clock& clock);

inline bool binarize(double mean_watts, double threshold_watts = 10.0) {
  return mean_watts >= threshold_watts;  // true = on
}

// Synthetic household: four appliances at 6-second cadence. Standby sits in
// [0, 2] W, active bursts in [30, 3000] W. Weekday 08:30-16:00 stays idle on
// most days so the workday annotation rule fires.
struct SynthConfig {
  CivilDate start_date{2013, 1, 1};
  int num_days = 7;
  std::uint64_t seed = 0;
  double p_weekday_midday_use = 0.08;  // fraction of weekdays with midday activity
  double p_saturday_midday_use = 0.35;
};

extern const std::vector<std::string> kSynthAppliances;  // tv, kettle, oven, microwave

RawSeries synth_channel(const std::string& appliance, const SynthConfig& cfg,
                        const Clock& clock);
std::vector<RawSeries> synth_household(const SynthConfig& cfg, const Clock& clock);

// CSV with header `window_start,appliance,mean_watts,sample_count`.
void write_resampled_csv(const ResampledSeries& series, std::ostream& out);
ResampledSeries read_resampled_csv(std::istream& in);

}  // namespace absence
