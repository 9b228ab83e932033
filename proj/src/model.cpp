#include "crowdlens/model.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>

namespace crowdlens {
namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

bool civil_to_epoch(int y, int mo, int d, int h, int mi, int s, TimePoint& out) {
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 60) return false;
  out = sys_days{ymd}.time_since_epoch().count() * 86400LL + h * 3600LL + mi * 60LL + s;
  return true;
}

}  // namespace

int TimeGrid::hour_of_day(GridIndex t) const {
  const TimePoint seconds_of_day = grid_time(t) - floor_div(grid_time(t), 86400) * 86400;
  return static_cast<int>(seconds_of_day / 3600);
}

std::pair<GridIndex, GridIndex> TimeGrid::index_range(TimePoint tau) const {
  std::int64_t first = ceil_div(tau - half_window - origin, step);
  std::int64_t last = floor_div(tau + half_window - origin, step);
  first = std::max<std::int64_t>(first, 0);
  last = std::min<std::int64_t>(last, static_cast<std::int64_t>(n_steps) - 1);
  return {static_cast<GridIndex>(first), static_cast<GridIndex>(std::max<std::int64_t>(last, first - 1))};
}

std::vector<GridIndex> grid_index_of(TimePoint tau, const TimeGrid& grid) {
  std::vector<GridIndex> out;
  const auto [first, last] = grid.index_range(tau);
  for (GridIndex t = first; t <= last; ++t) out.push_back(t);
  return out;
}

TimeGrid infer_grid(TimePoint min_time, TimePoint max_time, Seconds step, Seconds half_window) {
  if (step <= 0 || half_window <= 0) throw Error("grid step and half window must be positive");
  if (max_time < min_time) throw Error("empty time range");
  TimeGrid g;
  g.step = step;
  g.half_window = half_window;
  g.origin = ceil_div(min_time - half_window, step) * step;
  const TimePoint last = floor_div(max_time + half_window, step) * step;
  g.n_steps = static_cast<GridIndex>((last - g.origin) / step + 1);
  return g;
}

std::vector<std::string> validate_params(const Params& p) {
  std::vector<std::string> v;
  if (p.scale < 1) v.emplace_back("scale must be at least 1");
  if (p.commitment < 0) v.emplace_back("commitment must be non-negative");
  if (p.commitment > p.scale) v.emplace_back("commitment exceeds scale");
  if (p.lifetime < 2) v.emplace_back("lifetime below 2");
  if (p.min_locations < 2) v.emplace_back("min_locations below 2");
  if (!(p.commitment_probability >= 0.0 && p.commitment_probability <= 1.0))
    v.emplace_back("commitment probability outside [0,1]");
  if (!(p.similarity >= 0.0 && p.similarity <= 1.0)) v.emplace_back("similarity outside [0,1]");
  if (p.half_window <= 0) v.emplace_back("half window must be positive");
  return v;
}

bool Trajectory::is_valid() const {
  for (std::size_t i = 1; i < points.size(); ++i)
    if (points[i].first <= points[i - 1].first) return false;
  return true;
}

std::string format_iso8601(TimePoint t) {
  using namespace std::chrono;
  const auto days = floor_div(t, 86400);
  const auto rem = static_cast<int>(t - days * 86400);
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[48];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), rem / 3600, rem / 60 % 60,
                rem % 60);
  return buf;
}

bool parse_date_time(std::string_view date, std::string_view time, TimePoint& out) {
  if (date.size() != 10 || date[4] != '-' || date[7] != '-') return false;
  if (time.size() != 8 || time[2] != ':' || time[5] != ':') return false;
  int y, mo, d, h, mi, s;
  if (!parse_int(date.substr(0, 4), y) || !parse_int(date.substr(5, 2), mo) || !parse_int(date.substr(8, 2), d) ||
      !parse_int(time.substr(0, 2), h) || !parse_int(time.substr(3, 2), mi) || !parse_int(time.substr(6, 2), s))
    return false;
  return civil_to_epoch(y, mo, d, h, mi, s, out);
}

TimePoint parse_iso8601(std::string_view text) {
  TimePoint out = 0;
  if (text.size() != 20 || text[10] != 'T' || text[19] != 'Z' || !parse_date_time(text.substr(0, 10), text.substr(11, 8), out))
    throw Error("malformed timestamp '" + std::string(text) + "'");
  return out;
}

}  // namespace crowdlens
