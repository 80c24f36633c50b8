#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "occr/domain.hpp"
#include "occr/lar_sim.hpp"
#include "occr/oracle.hpp"
#include "occr/parallel.hpp"
#include "occr/subscores.hpp"

namespace occr {

struct SubscoreVector {
  double s_h = 0.0;
  double s_c = 0.0;
  double s_cu = 0.0;
  double s_ct = 0.0;
  double s_nc = 0.0;
};

struct OccrValue {
  double raw = 0.0;      // weighted sum, may leave [0,1]
  double clamped = 0.0;  // raw clamped to [0,1]
};

/// Weighted combination of (s_h, s_c, 1 - s_cu, s_ct, s_nc).
inline OccrValue occr_score(const SubscoreVector& v, const Weights& w = kDefaultWeights) noexcept {
  const double raw =
      w[0] * v.s_h + w[1] * v.s_c + w[2] * (1.0 - v.s_cu) + w[3] * v.s_ct + w[4] * v.s_nc;
  return {raw, std::clamp(raw, 0.0, 1.0)};
}

inline OccrValue occr_score(const SubscoreVector& v, const ScoreConfig& cfg) noexcept {
  return occr_score(v, cfg.weights);
}

using ComponentMoments = std::array<oracle::MomentPair, 5>;

/// Moments of 1 - s_cu from those of s_cu.
inline oracle::MomentPair headroom_moments(oracle::MomentPair utilization) noexcept {
  return {1.0 - utilization.mean, utilization.variance};
}

/// Mean and variance of the score for independent components. Component 3
/// must already describe 1 - s_cu (see headroom_moments).
inline oracle::MomentPair occr_moments(const ComponentMoments& c,
                                       const Weights& w = kDefaultWeights) {
  oracle::MomentPair out;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (!(c[k].variance >= 0.0))
      throw Error(Errc::InvalidArgument, "component variance must be nonnegative");
    out.mean += w[k] * c[k].mean;
    out.variance += w[k] * w[k] * c[k].variance;
  }
  return out;
}

inline double ltv_adjustment(double occr, const ScoreConfig& cfg) noexcept {
  return cfg.ltv_alpha * (occr - cfg.occr_avg);
}

/// LTV quote: below-average scores raise the base LTV up to the cap, other
/// scores get the base LTV.
inline double dynamic_ltv(double occr, const ScoreConfig& cfg) noexcept {
  const double f = ltv_adjustment(occr, cfg);
  return std::min(cfg.ltv_fixed - std::min(f, 0.0), cfg.ltv_cap);
}

/// Subscores of one wallet before the no-history policy is applied.
struct WalletEvidence {
  SubscoreVector v;
  std::optional<double> s_h;  // empty when no closed loan carries weight
  SimOutcome sim;
};

namespace detail {

inline Date latest_event(const WalletHistory& w) {
  Date last = Date::min();
  for (const LoanPosition& l : w.loans) {
    last = std::max(last, l.opened_at);
    if (l.closed_at) last = std::max(last, *l.closed_at);
  }
  for (const Transaction& tx : w.transactions)
    last = std::max(last, std::chrono::floor<std::chrono::days>(tx.timestamp));
  return last;
}

inline void require_assets(const WalletHistory& w, const AssetMap& assets) {
  for (const LoanPosition& l : w.loans)
    for (const CollateralLeg& leg : l.collaterals)
      if (assets.find(leg.asset_id) == assets.end())
        throw Error(Errc::UnknownAsset,
                    "wallet " + w.wallet_id + " loan " + l.loan_id + " uses unknown asset " +
                        leg.asset_id,
                    leg.asset_id);
}

}  // namespace detail

/// Computes every subscore the wallet has evidence for. Evidence-free
/// subscores are left at 0 (s_h is left empty for the caller's policy).
inline WalletEvidence collect_evidence(const WalletHistory& wallet, const AssetMap& assets,
                                       const ScoreConfig& cfg, unsigned threads = 1) {
  detail::require_assets(wallet, assets);
  WalletEvidence ev;
  if (wallet.empty()) return ev;

  const double sigma_max = cfg.sigma_max.value_or(max_volatility(assets));
  const auto hist = historical_inputs(wallet, assets, sigma_max, cfg.liquidation_proportion,
                                      cfg.sigmoid_midpoint);
  try {
    ev.s_h = historical_subscore(hist);
  } catch (const Error& e) {
    if (e.code() != Errc::NoEligibleLoans) throw;
  }

  try {
    ev.sim = current_subscore(wallet, assets, cfg, threads);
    ev.v.s_c = ev.sim.s_c;
  } catch (const Error& e) {
    if (e.code() != Errc::NoOpenPositions) throw;
  }

  if (!wallet.loans.empty()) ev.v.s_cu = utilization_subscore(std::span(wallet.loans));
  if (!wallet.transactions.empty()) ev.v.s_ct = transaction_subscore(wallet.transactions);

  const Date end = cfg.scoring_date.value_or(detail::latest_event(wallet));
  const auto window = newcredit_window(wallet, end, cfg.new_credit_window_days);
  if (window.size() >= 2) ev.v.s_nc = newcredit_subscore(window);
  return ev;
}

inline WalletScoreReport finalize_report(const WalletHistory& wallet, WalletEvidence ev,
                                         double default_score, const ScoreConfig& cfg) {
  WalletScoreReport r;
  r.wallet_id = wallet.wallet_id;
  if (wallet.empty()) {
    r.occr = r.occr_raw = default_score;
  } else {
    ev.v.s_h = ev.s_h.value_or(default_score);
    const OccrValue o = occr_score(ev.v, cfg);
    r.occr_raw = o.raw;
    r.occr = o.clamped;
  }
  r.s_h = ev.v.s_h;
  r.s_c = ev.v.s_c;
  r.s_cu = ev.v.s_cu;
  r.s_ct = ev.v.s_ct;
  r.s_nc = ev.v.s_nc;
  r.ltv_offer = dynamic_ltv(r.occr, cfg);
  r.sim_paths_used = ev.sim.paths_used;
  r.sim_converged = ev.sim.converged;
  return r;
}

/// Scores one validated wallet. Without a configured default_score, wallets
/// lacking history fall back to 0.5.
inline WalletScoreReport score_wallet(const WalletHistory& wallet, const AssetMap& assets,
                                      const ScoreConfig& cfg, unsigned threads = 1) {
  return finalize_report(wallet, collect_evidence(wallet, assets, cfg, threads),
                         cfg.default_score.value_or(0.5), cfg);
}

/// Scores a batch. The default score, unless configured, is the mean score
/// of the wallets with full historical evidence (0.5 if there are none);
/// it is then given to empty wallets and used as their missing s_h.
inline std::vector<WalletScoreReport> score_wallets(std::span<const WalletHistory> wallets,
                                                    const AssetMap& assets,
                                                    const ScoreConfig& cfg, unsigned threads = 1) {
  validate_config(cfg);
  std::string missing;
  std::string first_asset;
  for (const WalletHistory& w : wallets) {
    try {
      detail::require_assets(w, assets);
    } catch (const Error& e) {
      if (first_asset.empty()) first_asset = e.subject();
      missing += "\n  " + e.detail();
    }
  }
  if (!missing.empty()) throw Error(Errc::UnknownAsset, "unresolved collateral:" + missing, first_asset);

  // Wallets run in parallel; a lone wallet gives its workers to the simulation.
  std::vector<WalletEvidence> evidence(wallets.size());
  const unsigned inner = wallets.size() > 1 ? 1 : threads;
  parallel_for(wallets.size(), threads, [&](std::size_t i) {
    evidence[i] = collect_evidence(wallets[i], assets, cfg, inner);
  });

  double default_score = 0.5;
  if (cfg.default_score) {
    default_score = *cfg.default_score;
  } else {
    double sum = 0.0;
    std::size_t count = 0;
    for (const WalletEvidence& ev : evidence) {
      if (!ev.s_h) continue;
      SubscoreVector v = ev.v;
      v.s_h = *ev.s_h;
      sum += occr_score(v, cfg).clamped;
      ++count;
    }
    if (count > 0) default_score = sum / static_cast<double>(count);
  }

  std::vector<WalletScoreReport> out;
  out.reserve(wallets.size());
  for (std::size_t i = 0; i < wallets.size(); ++i)
    out.push_back(finalize_report(wallets[i], std::move(evidence[i]), default_score, cfg));
  return out;
}

}  // namespace occr
