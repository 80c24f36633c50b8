#pragma once

// Closed-form moments of the subscore estimators under the synthetic
// generating models (Pareto amounts and collateral, uniform LTV, uniform
// recency, uniform loan dates). These are the analytic references for the
// Monte Carlo studies in harness.hpp.

#include <cmath>

#include "occr/error.hpp"

namespace occr::oracle {

struct MomentPair {
  double mean = 0.0;
  double variance = 0.0;
};

inline void require_shape_above_two(double alpha) {
  if (!(alpha > 2.0))
    throw Error(Errc::ShapeTooSmall, "second moments need a Pareto shape above 2");
}

inline double pareto_mean(double alpha, double scale) { return alpha * scale / (alpha - 1.0); }

inline double pareto_second_moment(double alpha, double scale) {
  return alpha * scale * scale / (alpha - 2.0);
}

/// P(X > x) for X ~ Pareto(alpha, scale).
inline double pareto_survival(double alpha, double scale, double x) {
  return x <= scale ? 1.0 : std::pow(scale / x, alpha);
}

struct LoanMoments {
  double mean = 0.0;    // E[L]
  double second = 0.0;  // E[L^2]
};

/// Loan size moments when L | (ltv, c) ~ U(0, ltv c), ltv ~ U(l_min, l_max),
/// c ~ Pareto(alpha, m).
inline LoanMoments loan_moments(double alpha, double m, double l_min, double l_max) {
  require_shape_above_two(alpha);
  return {
      (l_min + l_max) * alpha * m / (4.0 * (alpha - 1.0)),
      (l_min * l_min + l_min * l_max + l_max * l_max) * alpha * m * m / (9.0 * (alpha - 2.0)),
  };
}

struct WeightMoments {
  double mean = 0.0;    // mu_w
  double second = 0.0;  // mu_{w^2}
};

/// Moments of w = L (1-r) p t with r, t ~ U(0,1) independent of L.
inline WeightMoments weight_moments(double liquidation_proportion, LoanMoments loan) {
  const double p = liquidation_proportion;
  return {p * loan.mean / 4.0, p * p * loan.second / 9.0};
}

/// Delta-method variance of the historical ratio estimator.
inline double historical_var_oracle(double s_h, double n, double e_l, double e_l2) {
  if (!(s_h >= 0.0 && s_h <= 1.0)) throw Error(Errc::InvalidArgument, "s_h outside [0,1]");
  if (!(n >= 1.0) || !(e_l > 0.0)) throw Error(Errc::InvalidArgument, "need n >= 1, E[L] > 0");
  return 16.0 * s_h * (1.0 - s_h) * e_l2 / (9.0 * n * e_l * e_l);
}

/// Approximate expectation of the historical estimator from the expansion
/// of E[1/D]; note it does not carry the Cov(N, 1/D) term.
inline double historical_bias_oracle(double s_h, double n, double mu_w, double mu_w2) {
  if (!(mu_w > 0.0)) throw Error(Errc::InvalidArgument, "mu_w must be positive");
  return s_h * (1.0 + (mu_w2 - mu_w * mu_w) / (n * mu_w * mu_w));
}

/// P(LaR > H) for LaR ~ Pareto(alpha_l, xm_l), H ~ Pareto(alpha_h, xm_h),
/// xm_l <= xm_h.
inline double lar_exceedance_oracle(double alpha_l, double xm_l, double alpha_h, double xm_h) {
  if (!(alpha_l > 0.0 && alpha_h > 0.0 && xm_l > 0.0 && xm_h > 0.0))
    throw Error(Errc::InvalidArgument, "Pareto shapes and scales must be positive");
  if (xm_l > xm_h)
    throw Error(Errc::ScaleOrderViolated, "LaR scale must not exceed the holdings scale");
  return alpha_h / (alpha_l + alpha_h) * std::pow(xm_l / xm_h, alpha_l);
}

/// Per-loan probability of a bulk-borrowing event: P(L >= mu_L) times
/// P(min adjacent uniform spacing <= mu_dD).
inline double newcredit_prob_oracle(double x_m, double mu_l, double alpha, double mu_dd, double n) {
  if (!(mu_l >= x_m) || !(mu_dd >= 0.0 && mu_dd <= 0.5))
    throw Error(Errc::ThresholdOutOfRange, "need mu_L >= x_m and mu_dD in [0, 1/2]");
  return std::pow(x_m / mu_l, alpha) * (1.0 - std::pow(1.0 - 2.0 * mu_dd, n));
}

/// Mean and delta-method variance of the transaction subscore with credit
/// probability p, Pareto(alpha, x_min) amounts and recency of mean mu_t and
/// variance var_t (uniform on [0,1] by default).
inline MomentPair transaction_moments_oracle(double p, double alpha, double x_min, double n,
                                             double mu_t = 0.5, double var_t = 1.0 / 12.0) {
  require_shape_above_two(alpha);
  (void)x_min;  // scale-free
  const double mu_s = 2.0 * p - 1.0;
  const double tail = (alpha - 1.0) * (alpha - 1.0) / (alpha * (alpha - 2.0));
  return {mu_s * mu_t, tail * ((var_t + mu_t * mu_t) - mu_s * mu_s * mu_t * mu_t) / n};
}

/// Moments of Y = collateral x LTV under Pareto collateral and uniform LTV.
inline LoanMoments capacity_moments(double alpha, double m, double l_min, double l_max) {
  require_shape_above_two(alpha);
  return {
      pareto_mean(alpha, m) * (l_min + l_max) / 2.0,
      pareto_second_moment(alpha, m) * (l_min * l_min + l_min * l_max + l_max * l_max) / 3.0,
  };
}

/// Second-order mean and delta-method variance of the utilization subscore
/// for n i.i.d. loans with L | Y ~ U(0, Y). The variance is kept as the
/// unsimplified three-term expression.
inline MomentPair utilization_moments_oracle(double alpha, double m, double l_min, double l_max,
                                             double n) {
  const LoanMoments y = capacity_moments(alpha, m, l_min, l_max);
  const double e_y = y.mean;
  const double e_y2 = y.second;
  const double var_y = e_y2 - e_y * e_y;

  const double mean = 1.0 / 3.0 + e_y2 / (9.0 * n * e_y * e_y);

  const double mu_n = n * e_y / 6.0;
  const double mu_d = n * e_y / 2.0;
  const double var_n = n * (e_y2 / 180.0 + var_y / 36.0);
  const double var_d = n * (e_y2 / 3.0 - e_y * e_y / 4.0);
  const double cov_nd = n * var_y / 12.0;
  const double variance = var_n / (mu_d * mu_d) + mu_n * mu_n * var_d / std::pow(mu_d, 4) -
                          2.0 * mu_n * cov_nd / std::pow(mu_d, 3);
  return {mean, variance};
}

/// Binomial proportion over k simulated paths.
inline MomentPair current_moments_oracle(double s_c, double k) {
  if (!(s_c >= 0.0 && s_c <= 1.0) || !(k >= 1.0))
    throw Error(Errc::InvalidArgument, "need s_c in [0,1] and k >= 1");
  return {s_c, s_c * (1.0 - s_c) / k};
}

inline MomentPair newcredit_moments_oracle(double s_nc, double n) {
  if (!(s_nc >= 0.0 && s_nc <= 1.0) || !(n >= 1.0))
    throw Error(Errc::InvalidArgument, "need s_nc in [0,1] and n >= 1");
  return {s_nc, s_nc * (1.0 - s_nc) / n};
}

}  // namespace occr::oracle
