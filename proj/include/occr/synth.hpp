#pragma once

// Synthetic wallet histories: Pareto transaction amounts with Bernoulli
// credit/debit signs and uniform recency, and loan books with Pareto
// collateral, uniform LTV and loans uniform under the borrow cap.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "occr/domain.hpp"
#include "occr/rng.hpp"

namespace occr::synth {

inline constexpr Date kDefaultWindowStart = std::chrono::sys_days{std::chrono::year{2024} / 1 / 1};

struct TxnGenParams {
  double p = 0.6;  // credit probability
  double alpha = 2.1;
  double x_min = 300.0;
  std::size_t n = 100;
  Date window_start = kDefaultWindowStart;
  int window_days = 365;
};

struct LoanGenParams {
  double alpha = 2.1;  // collateral Pareto shape
  double x_min = 300.0;
  double l_min = 0.5;
  double l_max = 0.9;
  std::size_t n = 10;
  double s_h = 0.1;  // liquidation rate of closed loans
  double open_prob = 0.0;
  Date window_start = kDefaultWindowStart;
  int window_days = 365;
  std::string collateral_asset = "ETH";
};

inline void check(const TxnGenParams& p) {
  if (!(p.p >= 0.0 && p.p <= 1.0) || !(p.alpha > 0.0) || !(p.x_min > 0.0) || p.window_days <= 0)
    throw Error(Errc::InvalidArgument, "invalid transaction generator parameters");
}

inline void check(const LoanGenParams& p) {
  if (!(p.alpha > 0.0) || !(p.x_min > 0.0) || !(p.l_min > 0.0) || !(p.l_min <= p.l_max) ||
      !(p.l_max < 1.0) || !(p.s_h >= 0.0 && p.s_h <= 1.0) ||
      !(p.open_prob >= 0.0 && p.open_prob <= 1.0) || p.window_days <= 0)
    throw Error(Errc::InvalidArgument, "invalid loan generator parameters");
}

/// Inverse-transform Pareto: x_min * u^(-1/alpha) for u in (0,1].
inline double pareto_from_uniform(double u, double alpha, double x_min) {
  return x_min * std::pow(u, -1.0 / alpha);
}

inline double sample_pareto(double alpha, double x_min, Stream& rng) {
  return pareto_from_uniform(rng.uniform_pos(), alpha, x_min);
}

/// Amount, direction and recency of one transaction, drawn in that order;
/// the timestamp is left to the caller.
inline Transaction draw_transaction(const TxnGenParams& params, Stream& rng) {
  Transaction tx;
  tx.amount_usd = sample_pareto(params.alpha, params.x_min, rng);
  tx.direction = rng.bernoulli(params.p) ? Direction::Credit : Direction::Debit;
  tx.recency_weight = rng.uniform();
  return tx;
}

/// Transactions with timestamps placed at their recency fraction of the
/// window, so a file-window recency mapping recovers the drawn weights.
inline std::vector<Transaction> generate_transactions(const TxnGenParams& params, Stream& rng) {
  check(params);
  const auto window = std::chrono::duration_cast<std::chrono::seconds>(
      std::chrono::days(params.window_days));
  const Instant start{std::chrono::duration_cast<std::chrono::seconds>(
      params.window_start.time_since_epoch())};
  std::vector<Transaction> out;
  out.reserve(params.n);
  for (std::size_t i = 0; i < params.n; ++i) {
    Transaction tx = draw_transaction(params, rng);
    tx.timestamp = start + std::chrono::seconds(static_cast<std::int64_t>(
                               std::llround(tx.recency_weight * static_cast<double>(window.count()))));
    out.push_back(tx);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Transaction& a, const Transaction& b) { return a.timestamp < b.timestamp; });
  return out;
}

/// The numeric part of one synthetic loan.
struct LoanDraw {
  double collateral = 0.0;
  double ltv = 0.0;
  double loan = 0.0;
  bool liquidated = false;

  double capacity() const noexcept { return ltv * collateral; }
};

inline LoanDraw draw_loan(const LoanGenParams& params, Stream& rng) {
  LoanDraw d;
  d.collateral = sample_pareto(params.alpha, params.x_min, rng);
  d.ltv = rng.uniform(params.l_min, params.l_max);
  d.loan = d.capacity() * rng.uniform_pos();
  d.liquidated = rng.bernoulli(params.s_h);
  return d;
}

inline std::string loan_label(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "L%06zu", i);
  return buf;
}

inline std::vector<LoanPosition> generate_loans(const LoanGenParams& params, Stream& rng) {
  check(params);
  std::vector<LoanPosition> out;
  out.reserve(params.n);
  for (std::size_t i = 0; i < params.n; ++i) {
    const LoanDraw d = draw_loan(params, rng);
    LoanPosition loan;
    loan.loan_id = loan_label(i);
    loan.opened_at = params.window_start +
                     std::chrono::days(static_cast<int>(rng.uniform() * params.window_days));
    const bool open = rng.bernoulli(params.open_prob);
    const int duration = 1 + static_cast<int>(rng.uniform() * 30.0);
    if (open) {
      loan.status = LoanStatus::Open;
    } else {
      loan.status = d.liquidated ? LoanStatus::Liquidated : LoanStatus::Repaid;
      loan.closed_at = loan.opened_at + std::chrono::days(duration);
    }
    loan.loan_usd = d.loan;
    loan.ltv_at_open = d.ltv;
    loan.liquidation_threshold = std::min(d.ltv + 0.05, 1.0);
    loan.collaterals.push_back({params.collateral_asset, d.collateral});
    out.push_back(std::move(loan));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const LoanPosition& a, const LoanPosition& b) { return a.opened_at < b.opened_at; });
  return out;
}

inline WalletHistory generate_wallet(std::string wallet_id, const TxnGenParams& txn,
                                     const LoanGenParams& loan, double holdings_usd, Stream& rng) {
  WalletHistory w;
  w.wallet_id = std::move(wallet_id);
  w.holdings_usd = holdings_usd;
  if (txn.n > 0) w.transactions = generate_transactions(txn, rng);
  if (loan.n > 0) w.loans = generate_loans(loan, rng);
  return w;
}

}  // namespace occr::synth
