#pragma once

#include <cstdint>
#include <string>

namespace absence {

// Proleptic Gregorian calendar helpers over Unix epoch seconds.
// All decoding goes through a fixed dataset-level UTC offset; the rules
// that consume these (annotation windows, weekday features) are wall-clock
// based, so the offset is part of the dataset configuration.

struct CivilDate {
  int year = 1970;
  int month = 1;  // 1-12
  int day = 1;    // 1-31
};

constexpr std::int64_t kSecondsPerDay = 86400;

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
std::int64_t days_from_civil(CivilDate d);
CivilDate civil_from_days(std::int64_t days);

// 0 = Monday .. 6 = Sunday.
int weekday_from_days(std::int64_t days);

inline bool is_weekend(int weekday_mon0) { return weekday_mon0 >= 5; }

// Wall-clock decoding of an epoch timestamp under a fixed offset.
struct LocalTime {
  CivilDate date;
  int weekday;          // 0 = Monday
  int seconds_of_day;   // [0, 86400)
};

class Clock {
 public:
  explicit Clock(int utc_offset_minutes = 0)
      : offset_seconds_(static_cast<std::int64_t>(utc_offset_minutes) * 60) {}

  LocalTime decode(std::int64_t epoch_seconds) const;

  // Epoch timestamp of local midnight of the given civil date.
  std::int64_t midnight(CivilDate d) const;
  std::int64_t midnight(int year, int month, int day) const {
    return midnight(CivilDate{year, month, day});
  }

  std::int64_t offset_seconds() const { return offset_seconds_; }

 private:
  std::int64_t offset_seconds_;
};

// "2013-04-01" -> CivilDate. Throws std::invalid_argument on bad input.
CivilDate parse_date(const std::string& iso);
std::string format_date(CivilDate d);

}  // namespace absence
