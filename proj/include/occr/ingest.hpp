#pragma once

// JSON wallet/asset readers and report/wallet writers.
//
// Wallet file:  {"schema_version":1,"wallets":[{wallet_id, holdings_usd,
//                transactions:[{timestamp, amount_usd, direction}],
//                loans:[{loan_id, opened_at, closed_at?, status, loan_usd,
//                        ltv_at_open, liquidation_threshold?,
//                        collaterals:[{asset, amount_usd}]}]}]}
// Asset file:   {"assets":[{asset, annualized_volatility, spot_price_usd, drift?}]}
// Report file:  {"schema_version":1,"wallets":[{...WalletScoreReport}]}

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "occr/domain.hpp"

namespace occr {

inline constexpr int kSchemaVersion = 1;

namespace detail {

using nlohmann::json;

inline bool read_digits(std::string_view s, std::size_t pos, std::size_t count, int& out) {
  if (pos + count > s.size()) return false;
  out = 0;
  for (std::size_t i = pos; i < pos + count; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    out = out * 10 + (s[i] - '0');
  }
  return true;
}

inline std::optional<Date> parse_ymd(std::string_view s) {
  int y = 0, m = 0, d = 0;
  if (s.size() < 10 || !read_digits(s, 0, 4, y) || s[4] != '-' || !read_digits(s, 5, 2, m) ||
      s[7] != '-' || !read_digits(s, 8, 2, d))
    return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

}  // namespace detail

/// Strict YYYY-MM-DD.
inline Date parse_date(std::string_view s) {
  if (s.size() != 10)
    throw Error(Errc::SchemaError, "expected YYYY-MM-DD, got '" + std::string(s) + "'");
  const auto d = detail::parse_ymd(s);
  if (!d) throw Error(Errc::SchemaError, "expected YYYY-MM-DD, got '" + std::string(s) + "'");
  return *d;
}

/// ISO-8601 instant: a date, optionally followed by THH:MM[:SS[.fff]] and
/// a zone of Z or +/-HH:MM. Fractional seconds are truncated; no zone
/// means UTC.
inline Instant parse_instant(std::string_view s) {
  auto fail = [&]() -> Instant {
    throw Error(Errc::SchemaError, "bad ISO-8601 timestamp '" + std::string(s) + "'");
  };
  const auto day = detail::parse_ymd(s);
  if (!day) return fail();
  Instant t{std::chrono::duration_cast<std::chrono::seconds>(day->time_since_epoch())};
  std::size_t pos = 10;
  if (pos == s.size()) return t;
  if (s[pos] != 'T' && s[pos] != 't' && s[pos] != ' ') return fail();
  int hh = 0, mm = 0, ss = 0;
  if (!detail::read_digits(s, pos + 1, 2, hh) || pos + 3 >= s.size() || s[pos + 3] != ':' ||
      !detail::read_digits(s, pos + 4, 2, mm))
    return fail();
  pos += 6;
  if (pos < s.size() && s[pos] == ':') {
    if (!detail::read_digits(s, pos + 1, 2, ss)) return fail();
    pos += 3;
    if (pos < s.size() && (s[pos] == '.' || s[pos] == ',')) {
      ++pos;
      const std::size_t start = pos;
      while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
      if (pos == start) return fail();
    }
  }
  if (hh > 23 || mm > 59 || ss > 60) return fail();
  t += std::chrono::hours(hh) + std::chrono::minutes(mm) + std::chrono::seconds(ss);
  if (pos == s.size()) return t;
  if (s[pos] == 'Z' || s[pos] == 'z') return pos + 1 == s.size() ? t : fail();
  if (s[pos] != '+' && s[pos] != '-') return fail();
  int oh = 0, om = 0;
  if (!detail::read_digits(s, pos + 1, 2, oh)) return fail();
  std::size_t next = pos + 3;
  if (next < s.size() && s[next] == ':') ++next;
  if (!detail::read_digits(s, next, 2, om) || next + 2 != s.size() || oh > 23 || om > 59)
    return fail();
  const auto offset = std::chrono::hours(oh) + std::chrono::minutes(om);
  return s[pos] == '+' ? t - offset : t + offset;
}

inline std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

inline std::string format_instant(Instant t) {
  const auto day = std::chrono::floor<std::chrono::days>(t);
  const std::chrono::hh_mm_ss hms{t - day};
  char buf[16];
  std::snprintf(buf, sizeof buf, "T%02d:%02d:%02dZ", static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()), static_cast<int>(hms.seconds().count()));
  return format_date(Date{day}) + buf;
}

inline std::string_view to_string(LoanStatus s) noexcept {
  switch (s) {
    case LoanStatus::Repaid: return "repaid";
    case LoanStatus::Liquidated: return "liquidated";
    case LoanStatus::Open: return "open";
  }
  return "open";
}

inline std::string_view to_string(Direction d) noexcept {
  return d == Direction::Credit ? "credit" : "debit";
}

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path, path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(Errc::IoError, "cannot read " + path, path);
  return buf.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot open " + path + " for writing", path);
  out << content;
  out.flush();
  if (!out) throw Error(Errc::IoError, "cannot write " + path, path);
}

inline json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(Errc::ParseError,
                "malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what(),
                std::to_string(e.byte));
  }
}

inline const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object())
    throw Error(Errc::SchemaError, where + " must be an object", where);
  const auto it = obj.find(key);
  if (it == obj.end())
    throw Error(Errc::SchemaError, where + " lacks \"" + key + "\"", where);
  return *it;
}

inline double number(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number())
    throw Error(Errc::SchemaError, where + "." + key + " must be a number", where);
  return v.get<double>();
}

inline std::string text(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_string())
    throw Error(Errc::SchemaError, where + "." + key + " must be a string", where);
  return v.get<std::string>();
}

inline const json& array(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_array())
    throw Error(Errc::SchemaError, where + "." + key + " must be an array", where);
  return v;
}

inline LoanStatus parse_status(const std::string& s, const std::string& where) {
  if (s == "repaid") return LoanStatus::Repaid;
  if (s == "liquidated") return LoanStatus::Liquidated;
  if (s == "open") return LoanStatus::Open;
  throw Error(Errc::SchemaError, where + ".status must be repaid, liquidated or open", where);
}

inline LoanPosition parse_loan(const json& j, const std::string& where) {
  LoanPosition l;
  l.loan_id = text(j, "loan_id", where);
  const std::string at = where + "/" + l.loan_id;
  l.opened_at = parse_date(text(j, "opened_at", at));
  if (const auto it = j.find("closed_at"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw Error(Errc::SchemaError, at + ".closed_at must be a string", at);
    l.closed_at = parse_date(it->get<std::string>());
  }
  l.status = parse_status(text(j, "status", at), at);
  l.loan_usd = number(j, "loan_usd", at);
  l.ltv_at_open = number(j, "ltv_at_open", at);
  if (const auto it = j.find("liquidation_threshold"); it != j.end() && !it->is_null()) {
    if (!it->is_number())
      throw Error(Errc::SchemaError, at + ".liquidation_threshold must be a number", at);
    l.liquidation_threshold = it->get<double>();
  } else {
    l.liquidation_threshold = std::min(l.ltv_at_open + 0.05, 1.0);
  }
  for (const json& c : array(j, "collaterals", at))
    l.collaterals.push_back({text(c, "asset", at), number(c, "amount_usd", at)});
  return l;
}

/// Raw wallet; recency weights are filled in later from the file window.
inline WalletHistory parse_wallet(const json& j, std::size_t index) {
  WalletHistory w;
  const std::string where = "wallets[" + std::to_string(index) + "]";
  w.wallet_id = text(j, "wallet_id", where);
  const std::string at = "wallet " + w.wallet_id;
  w.holdings_usd = number(j, "holdings_usd", at);
  if (j.contains("transactions")) {
    for (const json& t : array(j, "transactions", at)) {
      Transaction tx;
      tx.timestamp = parse_instant(text(t, "timestamp", at));
      tx.amount_usd = number(t, "amount_usd", at);
      const std::string dir = text(t, "direction", at);
      if (dir == "credit")
        tx.direction = Direction::Credit;
      else if (dir == "debit")
        tx.direction = Direction::Debit;
      else
        throw Error(Errc::SchemaError, at + " transaction direction must be credit or debit", at);
      w.transactions.push_back(tx);
    }
  }
  if (j.contains("loans"))
    for (const json& l : array(j, "loans", at)) w.loans.push_back(parse_loan(l, at));
  return w;
}

}  // namespace detail

/// Linear recency over the [oldest, newest] transaction window of the whole
/// batch; a single-instant window maps to 1.
inline void assign_recency(std::vector<WalletHistory>& wallets) {
  bool any = false;
  Instant lo{}, hi{};
  for (const WalletHistory& w : wallets)
    for (const Transaction& tx : w.transactions) {
      lo = any ? std::min(lo, tx.timestamp) : tx.timestamp;
      hi = any ? std::max(hi, tx.timestamp) : tx.timestamp;
      any = true;
    }
  const double span = static_cast<double>((hi - lo).count());
  for (WalletHistory& w : wallets)
    for (Transaction& tx : w.transactions)
      tx.recency_weight =
          span > 0.0 ? std::clamp(static_cast<double>((tx.timestamp - lo).count()) / span, 0.0, 1.0)
                     : 1.0;
}

/// Parses, derives recency and validates every wallet. All invalid wallets
/// are listed in one ValidationError whose subject is the first of them.
inline std::vector<WalletHistory> parse_wallets(std::string_view text) {
  const detail::json doc = detail::parse_json(text);
  if (!doc.is_object() || !doc.contains("schema_version"))
    throw Error(Errc::SchemaError, "wallet file needs an object with schema_version");
  const detail::json& version = doc["schema_version"];
  if (!version.is_number_integer() || version.get<long long>() != kSchemaVersion)
    throw Error(Errc::SchemaVersionMismatch,
                "unsupported schema_version " + version.dump() + ", expected 1");

  std::vector<WalletHistory> wallets;
  const detail::json& list = detail::array(doc, "wallets", "wallet file");
  wallets.reserve(list.size());
  for (std::size_t i = 0; i < list.size(); ++i) wallets.push_back(detail::parse_wallet(list[i], i));
  assign_recency(wallets);

  std::string problems;
  std::string first;
  for (WalletHistory& w : wallets) {
    try {
      w = validate_wallet(w);
    } catch (const Error& e) {
      if (first.empty()) first = w.wallet_id;
      problems += "\n  wallet " + w.wallet_id + ": " + e.what();
    }
  }
  if (!problems.empty()) throw Error(Errc::ValidationError, "invalid wallets:" + problems, first);
  return wallets;
}

inline std::vector<WalletHistory> load_wallets(const std::string& path) {
  return parse_wallets(detail::read_file(path));
}

inline AssetMap parse_asset_stats(std::string_view text) {
  const detail::json doc = detail::parse_json(text);
  AssetMap out;
  for (const detail::json& a : detail::array(doc, "assets", "asset file")) {
    AssetStats s;
    s.asset_id = detail::text(a, "asset", "asset entry");
    const std::string at = "asset " + s.asset_id;
    s.annualized_volatility = detail::number(a, "annualized_volatility", at);
    s.spot_price_usd = detail::number(a, "spot_price_usd", at);
    if (const auto it = a.find("drift"); it != a.end() && !it->is_null()) {
      if (!it->is_number()) throw Error(Errc::SchemaError, at + ".drift must be a number", at);
      s.drift = it->get<double>();
    }
    if (!(s.annualized_volatility >= 0.0))
      throw Error(Errc::InvalidField, at + " volatility must be >= 0", s.asset_id);
    if (!(s.spot_price_usd > 0.0))
      throw Error(Errc::InvalidField, at + " spot price must be > 0", s.asset_id);
    const std::string id = s.asset_id;
    if (!out.emplace(id, std::move(s)).second)
      throw Error(Errc::DuplicateAsset, "asset " + id + " listed twice", id);
  }
  return out;
}

inline AssetMap load_asset_stats(const std::string& path) {
  return parse_asset_stats(detail::read_file(path));
}

/// Rounds to 12 significant digits so reports are stable text.
inline double round12(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

inline std::string reports_json(std::vector<WalletScoreReport> reports) {
  std::stable_sort(reports.begin(), reports.end(),
                   [](const WalletScoreReport& a, const WalletScoreReport& b) {
                     return a.wallet_id < b.wallet_id;
                   });
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const WalletScoreReport& r : reports) {
    nlohmann::ordered_json j;
    j["wallet_id"] = r.wallet_id;
    j["s_h"] = round12(r.s_h);
    j["s_c"] = round12(r.s_c);
    j["s_cu"] = round12(r.s_cu);
    j["s_ct"] = round12(r.s_ct);
    j["s_nc"] = round12(r.s_nc);
    j["occr"] = round12(r.occr);
    j["occr_raw"] = round12(r.occr_raw);
    j["ltv_offer"] = round12(r.ltv_offer);
    j["sim_paths_used"] = r.sim_paths_used;
    j["sim_converged"] = r.sim_converged;
    list.push_back(std::move(j));
  }
  nlohmann::ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["wallets"] = std::move(list);
  return doc.dump(2) + "\n";
}

inline void write_reports(const std::vector<WalletScoreReport>& reports, const std::string& path) {
  detail::write_file(path, reports_json(reports));
}

/// Serialises wallets in the input schema. Recency weights are not stored;
/// they are re-derived from timestamps on load.
inline std::string wallets_json(const std::vector<WalletHistory>& wallets) {
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const WalletHistory& w : wallets) {
    nlohmann::ordered_json j;
    j["wallet_id"] = w.wallet_id;
    j["holdings_usd"] = w.holdings_usd;
    nlohmann::ordered_json txs = nlohmann::ordered_json::array();
    for (const Transaction& tx : w.transactions)
      txs.push_back({{"timestamp", format_instant(tx.timestamp)},
                     {"amount_usd", tx.amount_usd},
                     {"direction", to_string(tx.direction)}});
    j["transactions"] = std::move(txs);
    nlohmann::ordered_json loans = nlohmann::ordered_json::array();
    for (const LoanPosition& l : w.loans) {
      nlohmann::ordered_json lj;
      lj["loan_id"] = l.loan_id;
      lj["opened_at"] = format_date(l.opened_at);
      if (l.closed_at) lj["closed_at"] = format_date(*l.closed_at);
      lj["status"] = to_string(l.status);
      lj["loan_usd"] = l.loan_usd;
      lj["ltv_at_open"] = l.ltv_at_open;
      lj["liquidation_threshold"] = l.liquidation_threshold;
      nlohmann::ordered_json legs = nlohmann::ordered_json::array();
      for (const CollateralLeg& c : l.collaterals)
        legs.push_back({{"asset", c.asset_id}, {"amount_usd", c.amount_usd}});
      lj["collaterals"] = std::move(legs);
      loans.push_back(std::move(lj));
    }
    j["loans"] = std::move(loans);
    list.push_back(std::move(j));
  }
  nlohmann::ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["wallets"] = std::move(list);
  return doc.dump(2) + "\n";
}

inline void write_wallets(const std::vector<WalletHistory>& wallets, const std::string& path) {
  detail::write_file(path, wallets_json(wallets));
}

inline std::string assets_json(const AssetMap& assets) {
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& [id, s] : assets)
    list.push_back({{"asset", id},
                    {"annualized_volatility", s.annualized_volatility},
                    {"spot_price_usd", s.spot_price_usd},
                    {"drift", s.drift}});
  nlohmann::ordered_json doc;
  doc["assets"] = std::move(list);
  return doc.dump(2) + "\n";
}

}  // namespace occr
