#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "occr/error.hpp"

namespace occr {

using Date = std::chrono::sys_days;
using Instant = std::chrono::sys_seconds;

enum class LoanStatus { Repaid, Liquidated, Open };
enum class Direction { Credit, Debit };

struct CollateralLeg {
  std::string asset_id;
  double amount_usd = 0.0;

  friend bool operator==(const CollateralLeg&, const CollateralLeg&) = default;
};

struct LoanPosition {
  std::string loan_id;
  Date opened_at{};
  std::optional<Date> closed_at;
  LoanStatus status = LoanStatus::Open;
  double loan_usd = 0.0;
  double ltv_at_open = 0.0;
  /// Fraction of collateral value at which the position gets liquidated.
  double liquidation_threshold = 0.0;
  std::vector<CollateralLeg> collaterals;

  bool closed() const noexcept { return status != LoanStatus::Open; }

  double collateral_usd() const noexcept {
    return std::accumulate(collaterals.begin(), collaterals.end(), 0.0,
                           [](double acc, const CollateralLeg& leg) { return acc + leg.amount_usd; });
  }

  friend bool operator==(const LoanPosition&, const LoanPosition&) = default;
};

struct Transaction {
  Instant timestamp{};
  double amount_usd = 0.0;
  Direction direction = Direction::Credit;
  /// Recency weight in [0,1]; 1 is the most recent observation.
  double recency_weight = 1.0;

  double sign() const noexcept { return direction == Direction::Credit ? 1.0 : -1.0; }

  friend bool operator==(const Transaction&, const Transaction&) = default;
};

struct WalletHistory {
  std::string wallet_id;
  double holdings_usd = 0.0;
  std::vector<LoanPosition> loans;
  std::vector<Transaction> transactions;

  bool empty() const noexcept { return loans.empty() && transactions.empty(); }

  friend bool operator==(const WalletHistory&, const WalletHistory&) = default;
};

struct AssetStats {
  std::string asset_id;
  double annualized_volatility = 0.0;
  double spot_price_usd = 1.0;
  /// Annual drift of the simulated price; not an observed quantity.
  double drift = 0.0;
};

using AssetMap = std::map<std::string, AssetStats, std::less<>>;

/// Subscore order used by the weight vector: historical, current,
/// utilization headroom (1 - s_cu), transaction, new credit.
using Weights = std::array<double, 5>;
inline constexpr Weights kDefaultWeights{0.35, 0.25, 0.15, -0.15, 0.10};

struct ScoreConfig {
  Weights weights = kDefaultWeights;
  double liquidation_proportion = 1.0;
  /// Month index scoring 0.5 in the loan recency sigmoid; unset = midpoint
  /// of each wallet's loan span.
  std::optional<double> sigmoid_midpoint;
  /// Overrides the maximum volatility of the loaded asset universe.
  std::optional<double> sigma_max;
  std::size_t sim_batch_size = 2000;
  double sim_epsilon = 1e-4;
  std::size_t sim_max_batches = 500;
  int sim_horizon_days = 30;
  int sim_steps_per_day = 1;
  std::uint64_t rng_seed = 42;
  double ltv_fixed = 0.75;
  double ltv_alpha = 0.5;
  double ltv_cap = 0.90;
  double occr_avg = 0.5;
  /// Score for wallets without history; unset = batch mean (0.5 if none).
  std::optional<double> default_score;
  int new_credit_window_days = 30;
  /// End of the new-credit window; unset = the wallet's latest event date.
  std::optional<Date> scoring_date;
};

inline void validate_config(const ScoreConfig& cfg) {
  auto fail = [](const char* key, const char* what) {
    throw Error(Errc::ConfigError, std::string(key) + " " + what, key);
  };
  if (!(cfg.liquidation_proportion > 0.0 && cfg.liquidation_proportion <= 1.0))
    fail("liquidation_proportion", "must lie in (0,1]");
  if (cfg.sim_batch_size == 0) fail("sim_batch_size", "must be positive");
  if (!(cfg.sim_epsilon > 0.0)) fail("sim_epsilon", "must be positive");
  if (cfg.sim_max_batches == 0) fail("sim_max_batches", "must be positive");
  if (cfg.sim_horizon_days <= 0) fail("sim_horizon_days", "must be positive");
  if (cfg.sim_steps_per_day <= 0) fail("sim_steps_per_day", "must be positive");
  if (!(cfg.ltv_fixed > 0.0 && cfg.ltv_fixed < 1.0)) fail("ltv_fixed", "must lie in (0,1)");
  if (!(cfg.ltv_cap > 0.0 && cfg.ltv_cap <= 1.0)) fail("ltv_cap", "must lie in (0,1]");
  if (cfg.ltv_cap < cfg.ltv_fixed) fail("ltv_cap", "must be >= ltv_fixed");
  if (!(cfg.ltv_alpha >= 0.0)) fail("ltv_alpha", "must be nonnegative");
  if (cfg.default_score && !(*cfg.default_score >= 0.0 && *cfg.default_score <= 1.0))
    fail("default_score", "must lie in [0,1]");
  if (cfg.new_credit_window_days <= 0) fail("new_credit_window_days", "must be positive");
  if (cfg.sigma_max && !(*cfg.sigma_max > 0.0)) fail("sigma_max", "must be positive");
}

struct WalletScoreReport {
  std::string wallet_id;
  double s_h = 0.0;
  double s_c = 0.0;
  double s_cu = 0.0;
  double s_ct = 0.0;
  double s_nc = 0.0;
  double occr = 0.0;
  double occr_raw = 0.0;
  double ltv_offer = 0.0;
  std::size_t sim_paths_used = 0;
  bool sim_converged = false;
};

namespace detail {

inline std::string tx_ref(const WalletHistory& w, std::size_t i) {
  return w.wallet_id + "/tx[" + std::to_string(i) + "]";
}

// Floating-point slack for the borrow cap; amounts round-trip through text.
inline constexpr double kCapSlack = 1e-9;

}  // namespace detail

/// Checks every record invariant and returns the history with loans sorted
/// by open date and transactions by timestamp (stable, so repeated calls are
/// no-ops). Throws `Error` naming the offending record.
inline WalletHistory validate_wallet(WalletHistory raw) {
  const std::string& wid = raw.wallet_id;
  if (!(raw.holdings_usd >= 0.0))
    throw Error(Errc::NegativeAmount, "holdings_usd must be >= 0 in wallet " + wid, wid);

  for (const LoanPosition& loan : raw.loans) {
    const std::string& id = loan.loan_id;
    if (!(loan.loan_usd > 0.0))
      throw Error(Errc::NegativeAmount, "loan_usd must be > 0 in loan " + id, id);
    if (loan.collaterals.empty())
      throw Error(Errc::InvalidField, "loan " + id + " has no collateral", id);
    for (const CollateralLeg& leg : loan.collaterals)
      if (!(leg.amount_usd > 0.0))
        throw Error(Errc::NegativeAmount,
                    "collateral " + leg.asset_id + " amount must be > 0 in loan " + id, id);
    if (!(loan.ltv_at_open > 0.0 && loan.ltv_at_open <= 1.0))
      throw Error(Errc::InvalidField, "ltv_at_open outside (0,1] in loan " + id, id);
    if (!(loan.liquidation_threshold > 0.0 && loan.liquidation_threshold <= 1.0) ||
        loan.liquidation_threshold < loan.ltv_at_open)
      throw Error(Errc::InvalidField,
                  "liquidation_threshold must lie in [ltv_at_open, 1] in loan " + id, id);
    if (loan.closed()) {
      if (!loan.closed_at)
        throw Error(Errc::MissingCloseDate, "closed loan " + id + " has no closed_at", id);
      if (*loan.closed_at < loan.opened_at)
        throw Error(Errc::InvalidField, "loan " + id + " closes before it opens", id);
    } else if (loan.closed_at) {
      throw Error(Errc::InvalidField, "open loan " + id + " has a closed_at", id);
    }
    const double cap = loan.ltv_at_open * loan.collateral_usd();
    if (loan.loan_usd > cap * (1.0 + detail::kCapSlack))
      throw Error(Errc::BorrowCapViolated,
                  "loan " + id + " borrows " + std::to_string(loan.loan_usd) + " over cap " +
                      std::to_string(cap),
                  id);
  }

  for (std::size_t i = 0; i < raw.transactions.size(); ++i) {
    const Transaction& tx = raw.transactions[i];
    if (!(tx.amount_usd > 0.0))
      throw Error(Errc::NegativeAmount, "amount_usd must be > 0 in " + detail::tx_ref(raw, i),
                  detail::tx_ref(raw, i));
    if (!(tx.recency_weight >= 0.0 && tx.recency_weight <= 1.0))
      throw Error(Errc::InvalidField, "recency_weight outside [0,1] in " + detail::tx_ref(raw, i),
                  detail::tx_ref(raw, i));
  }

  std::stable_sort(raw.loans.begin(), raw.loans.end(),
                   [](const LoanPosition& a, const LoanPosition& b) { return a.opened_at < b.opened_at; });
  std::stable_sort(raw.transactions.begin(), raw.transactions.end(),
                   [](const Transaction& a, const Transaction& b) { return a.timestamp < b.timestamp; });
  return raw;
}

/// Maximum annualized volatility over an asset universe.
inline double max_volatility(const AssetMap& assets) noexcept {
  double m = 0.0;
  for (const auto& [id, s] : assets) m = std::max(m, s.annualized_volatility);
  return m;
}

}  // namespace occr
