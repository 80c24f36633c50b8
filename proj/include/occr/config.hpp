#pragma once

// Flat `key = value` configuration mirroring ScoreConfig. Lines starting
// with '#' are comments; unknown keys are rejected.

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>

#include "occr/domain.hpp"

namespace occr {

/// Scoring options plus the worker count used to run them.
struct RunConfig {
  ScoreConfig score;
  unsigned threads = 1;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty())
    throw Error(Errc::ConfigError, std::string(key) + ": cannot parse '" + std::string(text) + "'",
                std::string(key));
  return value;
}

inline Date parse_config_date(std::string_view key, std::string_view text) {
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  char s1 = 0;
  char s2 = 0;
  std::istringstream in{std::string(text)};
  in >> y >> s1 >> m >> s2 >> d;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!in || s1 != '-' || s2 != '-' || !ymd.ok() || in.peek() != std::char_traits<char>::eof())
    throw Error(Errc::ConfigError, std::string(key) + ": expected YYYY-MM-DD", std::string(key));
  return Date{ymd};
}

}  // namespace detail

inline constexpr std::array<std::string_view, 18> kConfigKeys{
    "weights",         "liquidation_proportion", "sigmoid_midpoint", "sigma_max",
    "sim_batch_size",  "sim_epsilon",            "sim_max_batches",  "sim_horizon_days",
    "sim_steps_per_day", "rng_seed",             "ltv_fixed",        "ltv_alpha",
    "ltv_cap",         "occr_avg",               "default_score",    "new_credit_window_days",
    "scoring_date",    "threads"};

/// Applies one setting. Optional keys accept "none" to clear them.
inline void apply_setting(RunConfig& rc, std::string_view key, std::string_view raw) {
  using detail::parse_number;
  const std::string_view value = detail::trim(raw);
  ScoreConfig& c = rc.score;
  auto optional_double = [&](std::optional<double>& slot) {
    if (value == "none")
      slot.reset();
    else
      slot = parse_number<double>(key, value);
  };

  if (key == "weights") {
    Weights w{};
    std::size_t k = 0;
    std::string_view rest = value;
    while (true) {
      const auto comma = rest.find(',');
      if (k == w.size())
        throw Error(Errc::ConfigError, "weights: expected 5 values", "weights");
      w[k++] = parse_number<double>(key, detail::trim(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (k != w.size()) throw Error(Errc::ConfigError, "weights: expected 5 values", "weights");
    c.weights = w;
  } else if (key == "liquidation_proportion") {
    c.liquidation_proportion = parse_number<double>(key, value);
  } else if (key == "sigmoid_midpoint") {
    optional_double(c.sigmoid_midpoint);
  } else if (key == "sigma_max") {
    optional_double(c.sigma_max);
  } else if (key == "sim_batch_size") {
    c.sim_batch_size = parse_number<std::size_t>(key, value);
  } else if (key == "sim_epsilon") {
    c.sim_epsilon = parse_number<double>(key, value);
  } else if (key == "sim_max_batches") {
    c.sim_max_batches = parse_number<std::size_t>(key, value);
  } else if (key == "sim_horizon_days") {
    c.sim_horizon_days = parse_number<int>(key, value);
  } else if (key == "sim_steps_per_day") {
    c.sim_steps_per_day = parse_number<int>(key, value);
  } else if (key == "rng_seed" || key == "seed") {
    c.rng_seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "ltv_fixed") {
    c.ltv_fixed = parse_number<double>(key, value);
  } else if (key == "ltv_alpha") {
    c.ltv_alpha = parse_number<double>(key, value);
  } else if (key == "ltv_cap") {
    c.ltv_cap = parse_number<double>(key, value);
  } else if (key == "occr_avg") {
    c.occr_avg = parse_number<double>(key, value);
  } else if (key == "default_score") {
    optional_double(c.default_score);
  } else if (key == "new_credit_window_days") {
    c.new_credit_window_days = parse_number<int>(key, value);
  } else if (key == "scoring_date") {
    if (value == "none")
      c.scoring_date.reset();
    else
      c.scoring_date = detail::parse_config_date(key, value);
  } else if (key == "threads") {
    rc.threads = parse_number<unsigned>(key, value);
  } else {
    throw Error(Errc::ConfigError, "unknown key '" + std::string(key) + "'", std::string(key));
  }
}

/// Applies a `key=value` assignment as given on the command line.
inline void apply_assignment(RunConfig& rc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw Error(Errc::ConfigError, "expected key=value, got '" + std::string(assignment) + "'");
  apply_setting(rc, detail::trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

inline void apply_config_text(RunConfig& rc, std::string_view text) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = detail::trim(line);
    if (line.empty() || line.front() == '#') continue;
    try {
      apply_assignment(rc, line);
    } catch (const Error& e) {
      throw Error(Errc::ConfigError, "line " + std::to_string(line_no) + ": " + e.detail(),
                  e.subject());
    }
  }
}

inline void apply_config_file(RunConfig& rc, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open config file " + path, path);
  std::ostringstream buf;
  buf << in.rdbuf();
  apply_config_text(rc, buf.str());
}

}  // namespace occr
