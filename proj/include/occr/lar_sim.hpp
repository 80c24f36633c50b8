#pragma once

// Liquidation-at-Risk simulation for the current-risk subscore. Collateral
// prices follow independent geometric Brownian motions; a position is
// liquidated at the first step where its debt reaches the liquidation
// threshold times the collateral value. Paths run in fixed-size batches
// until the running LaR variance stabilises.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "occr/domain.hpp"
#include "occr/parallel.hpp"
#include "occr/rng.hpp"

namespace occr {

struct SimOutcome {
  double s_c = 0.0;
  std::size_t paths_used = 0;
  double lar_mean = 0.0;
  double lar_variance = 0.0;
  bool converged = false;
  std::size_t batches = 0;
};

/// GBM price series of length horizon_days * steps_per_day + 1 starting at
/// the spot price, with time measured in years of 365 days.
inline std::vector<double> simulate_price_path(const AssetStats& stats, int horizon_days,
                                               int steps_per_day, Stream& rng) {
  if (!(stats.spot_price_usd > 0.0) || !(stats.annualized_volatility >= 0.0))
    throw Error(Errc::InvalidArgument, "asset " + stats.asset_id + " needs spot > 0 and vol >= 0",
                stats.asset_id);
  if (horizon_days <= 0 || steps_per_day <= 0)
    throw Error(Errc::InvalidArgument, "horizon and step count must be positive");
  const std::size_t steps = static_cast<std::size_t>(horizon_days) * steps_per_day;
  const double dt = 1.0 / (365.0 * steps_per_day);
  const double sigma = stats.annualized_volatility;
  const double drift = (stats.drift - 0.5 * sigma * sigma) * dt;
  const double diffusion = sigma * std::sqrt(dt);

  std::vector<double> path(steps + 1);
  path[0] = stats.spot_price_usd;
  for (std::size_t s = 0; s < steps; ++s) path[s + 1] = path[s] * std::exp(drift + diffusion * rng.normal());
  return path;
}

using PricePaths = std::map<std::string, std::vector<double>, std::less<>>;

/// Liquidated collateral value (p times the collateral value) at the first
/// threshold crossing, or 0 if the position survives the horizon.
inline double position_lar(const LoanPosition& position, const PricePaths& paths,
                           double liquidation_proportion) {
  std::vector<const std::vector<double>*> legs;
  legs.reserve(position.collaterals.size());
  std::size_t len = 0;
  for (const CollateralLeg& leg : position.collaterals) {
    const auto it = paths.find(leg.asset_id);
    if (it == paths.end() || it->second.empty())
      throw Error(Errc::UnknownAsset, "no price path for asset " + leg.asset_id, leg.asset_id);
    legs.push_back(&it->second);
    len = legs.size() == 1 ? it->second.size() : std::min(len, it->second.size());
  }
  for (std::size_t t = 0; t < len; ++t) {
    double value = 0.0;
    for (std::size_t k = 0; k < legs.size(); ++k)
      value += position.collaterals[k].amount_usd * ((*legs[k])[t] / (*legs[k])[0]);
    if (position.loan_usd >= position.liquidation_threshold * value)
      return liquidation_proportion * value;
  }
  return 0.0;
}

struct BatchPlan {
  std::size_t batch_size = 2000;
  double epsilon = 1e-4;
  std::size_t max_batches = 500;
  unsigned threads = 1;
};

/// One simulated scenario: total LaR and the holdings it is compared with.
struct PathDraw {
  double lar_total = 0.0;
  double holdings = 0.0;
};

/// Runs `draw(path_index)` in batches and estimates P(LaR_total >= H).
/// Stops once successive running variances of LaR_total differ by at most
/// epsilon * max(previous variance, 1), or after max_batches. Path indices
/// are global, so results do not depend on the thread count.
template <class Draw>
SimOutcome run_batches(const BatchPlan& plan, Draw&& draw) {
  if (plan.batch_size == 0 || plan.max_batches == 0 || !(plan.epsilon > 0.0))
    throw Error(Errc::InvalidArgument, "batch size, batch limit and epsilon must be positive");

  SimOutcome out;
  std::vector<PathDraw> batch(plan.batch_size);
  std::size_t hits = 0;
  double mean = 0.0;
  double m2 = 0.0;
  double prev_var = 0.0;

  for (std::size_t b = 0; b < plan.max_batches; ++b) {
    const std::uint64_t base = static_cast<std::uint64_t>(b) * plan.batch_size;
    parallel_for(plan.batch_size, plan.threads, [&](std::size_t i) { batch[i] = draw(base + i); });

    for (const PathDraw& d : batch) {
      ++out.paths_used;
      if (d.lar_total >= d.holdings) ++hits;
      const double delta = d.lar_total - mean;
      mean += delta / static_cast<double>(out.paths_used);
      m2 += delta * (d.lar_total - mean);
    }
    out.batches = b + 1;
    const double var = out.paths_used > 1 ? m2 / static_cast<double>(out.paths_used - 1) : 0.0;
    if (b > 0 && std::abs(var - prev_var) <= plan.epsilon * std::max(prev_var, 1.0)) {
      out.converged = true;
      prev_var = var;
      break;
    }
    prev_var = var;
  }
  out.s_c = static_cast<double>(hits) / static_cast<double>(out.paths_used);
  out.lar_mean = mean;
  out.lar_variance = prev_var;
  return out;
}

/// Simulated probability that the wallet's open positions liquidate for at
/// least its current holdings. Throws NoOpenPositions when nothing is at risk.
inline SimOutcome current_subscore(const WalletHistory& wallet, const AssetMap& stats,
                                   const ScoreConfig& cfg, unsigned threads = 1) {
  std::vector<const LoanPosition*> open;
  std::map<std::string, const AssetStats*, std::less<>> assets;
  for (const LoanPosition& loan : wallet.loans) {
    if (loan.closed()) continue;
    open.push_back(&loan);
    for (const CollateralLeg& leg : loan.collaterals) {
      const auto it = stats.find(leg.asset_id);
      if (it == stats.end())
        throw Error(Errc::UnknownAsset,
                    "wallet " + wallet.wallet_id + " uses unknown asset " + leg.asset_id,
                    leg.asset_id);
      assets.emplace(leg.asset_id, &it->second);
    }
  }
  if (open.empty())
    throw Error(Errc::NoOpenPositions, "wallet " + wallet.wallet_id + " has no open positions",
                wallet.wallet_id);

  const std::uint64_t wallet_key = hash_id(wallet.wallet_id);
  const double p = cfg.liquidation_proportion;
  auto draw = [&](std::uint64_t path) {
    Stream rng = Stream::sub(cfg.rng_seed, {wallet_key, path});
    PricePaths paths;
    for (const auto& [id, s] : assets)
      paths.emplace(id, simulate_price_path(*s, cfg.sim_horizon_days, cfg.sim_steps_per_day, rng));
    PathDraw d{0.0, wallet.holdings_usd};
    for (const LoanPosition* loan : open) d.lar_total += position_lar(*loan, paths, p);
    return d;
  };
  return run_batches(BatchPlan{cfg.sim_batch_size, cfg.sim_epsilon, cfg.sim_max_batches, threads},
                     draw);
}

}  // namespace occr
