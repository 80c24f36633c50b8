#pragma once

// Closed-form subscore estimators: historical, credit utilization, on-chain
// transaction and new credit. The simulated current-risk subscore lives in
// lar_sim.hpp.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "occr/domain.hpp"

namespace occr {

/// Loan recency weight: logistic in the month index, 0.5 at `midpoint`.
inline double recency_weight(double month, double midpoint) noexcept {
  return 1.0 / (1.0 + std::exp(-(month - midpoint)));
}

/// Amount-weighted mean of sigma_k / sigma_max over the collateral legs.
inline double collateral_risk_factor(std::span<const CollateralLeg> legs, const AssetMap& stats,
                                     double sigma_max) {
  if (!(sigma_max > 0.0)) throw Error(Errc::ZeroSigmaMax, "sigma_max must be positive");
  double weighted = 0.0;
  double total = 0.0;
  for (const CollateralLeg& leg : legs) {
    const auto it = stats.find(leg.asset_id);
    if (it == stats.end())
      throw Error(Errc::UnknownAsset, "no statistics for asset " + leg.asset_id, leg.asset_id);
    weighted += leg.amount_usd * (it->second.annualized_volatility / sigma_max);
    total += leg.amount_usd;
  }
  if (!(total > 0.0)) throw Error(Errc::InvalidArgument, "collateral legs sum to zero");
  return weighted / total;
}

/// One closed loan as seen by the historical estimator.
struct HistoricalLoan {
  bool liquidated = false;
  double loan_usd = 0.0;
  double risk_factor = 0.0;
  double liquidation_proportion = 1.0;
  double recency = 0.5;

  double weight() const noexcept {
    return loan_usd * (1.0 - risk_factor) * liquidation_proportion * recency;
  }
};

/// Weighted liquidation ratio sum(w X) / sum(w).
inline double historical_subscore(std::span<const HistoricalLoan> loans) {
  double num = 0.0;
  double den = 0.0;
  for (const HistoricalLoan& l : loans) {
    const double w = l.weight();
    den += w;
    if (l.liquidated) num += w;
  }
  if (!(den > 0.0)) throw Error(Errc::NoEligibleLoans, "no closed loan carries positive weight");
  return num / den;
}

/// Months since year 0; differences give calendar-month offsets.
inline int month_index(Date d) noexcept {
  const std::chrono::year_month_day ymd{d};
  return static_cast<int>(ymd.year()) * 12 + static_cast<int>(static_cast<unsigned>(ymd.month())) - 1;
}

/// Builds estimator inputs from the wallet's closed loans. Month offsets are
/// counted from the wallet's earliest loan month; the default midpoint is
/// half the span between its first and last loan months.
inline std::vector<HistoricalLoan> historical_inputs(const WalletHistory& wallet,
                                                     const AssetMap& stats, double sigma_max,
                                                     double liquidation_proportion,
                                                     std::optional<double> midpoint = {}) {
  std::vector<HistoricalLoan> out;
  if (wallet.loans.empty()) return out;
  int first = month_index(wallet.loans.front().opened_at);
  int last = first;
  for (const LoanPosition& l : wallet.loans) {
    first = std::min(first, month_index(l.opened_at));
    last = std::max(last, month_index(l.opened_at));
  }
  const double k = midpoint.value_or(0.5 * static_cast<double>(last - first));
  for (const LoanPosition& l : wallet.loans) {
    if (!l.closed()) continue;
    out.push_back(HistoricalLoan{
        .liquidated = l.status == LoanStatus::Liquidated,
        .loan_usd = l.loan_usd,
        .risk_factor = collateral_risk_factor(l.collaterals, stats, sigma_max),
        .liquidation_proportion = liquidation_proportion,
        .recency = recency_weight(static_cast<double>(month_index(l.opened_at) - first), k),
    });
  }
  return out;
}

/// Borrowed amount and borrowing capacity (collateral x LTV) at open.
struct UtilizationTerm {
  double loan_usd = 0.0;
  double capacity_usd = 0.0;
};

/// Loan-weighted mean unused headroom, sum((1 - L/cap) L) / sum(L).
inline double utilization_subscore(std::span<const UtilizationTerm> terms) {
  double num = 0.0;
  double den = 0.0;
  for (const UtilizationTerm& t : terms) {
    if (!(t.capacity_usd > 0.0))
      throw Error(Errc::InvalidArgument, "borrow capacity must be positive");
    num += (1.0 - t.loan_usd / t.capacity_usd) * t.loan_usd;
    den += t.loan_usd;
  }
  if (!(den > 0.0)) throw Error(Errc::NoEligibleLoans, "utilization needs at least one loan");
  return num / den;
}

inline double utilization_subscore(std::span<const LoanPosition> loans) {
  std::vector<UtilizationTerm> terms;
  terms.reserve(loans.size());
  for (const LoanPosition& l : loans)
    terms.push_back({l.loan_usd, l.collateral_usd() * l.ltv_at_open});
  return utilization_subscore(std::span<const UtilizationTerm>(terms));
}

/// Recency-weighted signed flow over gross flow, in [-1, 1].
inline double transaction_subscore(std::span<const Transaction> txns) {
  double num = 0.0;
  double den = 0.0;
  for (const Transaction& tx : txns) {
    num += tx.amount_usd * tx.sign() * tx.recency_weight;
    den += tx.amount_usd;
  }
  if (txns.empty() || !(den > 0.0)) throw Error(Errc::NoTransactions, "no transactions");
  return num / den;
}

/// Shortest gap from loan j to an adjacent loan; `times` ascending. The first
/// and last loans only have one neighbour and use that gap.
inline double min_loan_gap(std::span<const double> times, std::size_t j) {
  if (times.size() < 2) throw Error(Errc::SingleLoan, "gap undefined for fewer than two loans");
  if (j >= times.size()) throw Error(Errc::InvalidArgument, "loan index out of range");
  if (j == 0) return times[1] - times[0];
  if (j + 1 == times.size()) return times[j] - times[j - 1];
  return std::min(times[j] - times[j - 1], times[j + 1] - times[j]);
}

/// Calendar-date overload; the gap is in days.
inline double min_loan_gap(std::span<const Date> dates, std::size_t j) {
  std::vector<double> days(dates.size());
  std::transform(dates.begin(), dates.end(), days.begin(),
                 [](Date d) { return static_cast<double>(d.time_since_epoch().count()); });
  return min_loan_gap(std::span<const double>(days), j);
}

struct NewCreditLoan {
  double loan_usd = 0.0;
  double gap = 0.0;
};

/// Pairs loan amounts with their shortest neighbour gaps. Inputs are aligned
/// and `times` ascending.
inline std::vector<NewCreditLoan> with_gaps(std::span<const double> amounts,
                                            std::span<const double> times) {
  if (amounts.size() != times.size())
    throw Error(Errc::InvalidArgument, "amounts and times differ in length");
  std::vector<NewCreditLoan> out(amounts.size());
  for (std::size_t j = 0; j < amounts.size(); ++j) out[j] = {amounts[j], min_loan_gap(times, j)};
  return out;
}

/// Fraction of window loans that are both at least average in size and at
/// most average in spacing. Both comparisons are inclusive.
inline double newcredit_subscore(std::span<const NewCreditLoan> loans) {
  const std::size_t n = loans.size();
  if (n < 2) throw Error(Errc::InsufficientLoans, "new credit needs at least two loans");
  double sum_l = 0.0;
  double sum_g = 0.0;
  for (const NewCreditLoan& l : loans) {
    sum_l += l.loan_usd;
    sum_g += l.gap;
  }
  const double mu_l = sum_l / static_cast<double>(n);
  const double mu_g = sum_g / static_cast<double>(n);
  // Identical values must compare equal to their own mean.
  const double tol_l = 1e-12 * std::abs(mu_l);
  const double tol_g = 1e-12 * std::abs(mu_g);
  std::size_t hits = 0;
  for (const NewCreditLoan& l : loans)
    if (l.loan_usd >= mu_l - tol_l && l.gap <= mu_g + tol_g) ++hits;
  return static_cast<double>(hits) / static_cast<double>(n);
}

/// Loans opened in the `window_days` ending at `end` (inclusive), with gaps
/// in days measured among the window loans only.
inline std::vector<NewCreditLoan> newcredit_window(const WalletHistory& wallet, Date end,
                                                   int window_days) {
  const Date start = end - std::chrono::days(window_days);
  std::vector<double> amounts;
  std::vector<double> times;
  for (const LoanPosition& l : wallet.loans) {
    if (l.opened_at < start || l.opened_at > end) continue;
    amounts.push_back(l.loan_usd);
    times.push_back(static_cast<double>(l.opened_at.time_since_epoch().count()));
  }
  if (amounts.size() < 2) {
    // Gap undefined; the scorer rejects windows this small.
    std::vector<NewCreditLoan> out;
    for (double a : amounts) out.push_back({a, 0.0});
    return out;
  }
  return with_gaps(amounts, times);
}

}  // namespace occr
