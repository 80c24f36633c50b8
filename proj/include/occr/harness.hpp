#pragma once

// Replication studies for the subscore estimators: each replication draws
// one synthetic wallet from its own substream, evaluates the estimator and
// compares the spread of the estimates with the analytic moments.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "occr/aggregate.hpp"
#include "occr/lar_sim.hpp"
#include "occr/oracle.hpp"
#include "occr/parallel.hpp"
#include "occr/rng.hpp"
#include "occr/subscores.hpp"
#include "occr/synth.hpp"

namespace occr::harness {

enum class Study { Transaction, Utilization, Historical, Current, NewCredit };

inline std::string_view to_string(Study s) noexcept {
  switch (s) {
    case Study::Transaction: return "transaction";
    case Study::Utilization: return "utilization";
    case Study::Historical: return "historical";
    case Study::Current: return "current";
    case Study::NewCredit: return "new_credit";
  }
  return "unknown";
}

/// LaR ~ Pareto(alpha_lar, xm_lar) against holdings H ~ Pareto(alpha_h, xm_h).
struct ExceedanceParams {
  double alpha_lar = 2.0;
  double xm_lar = 1.0;
  double alpha_h = 3.0;
  double xm_h = 1.0;
};

/// Loan amounts ~ Pareto(alpha, x_m) on uniform dates in [0,1].
struct NewCreditParams {
  double alpha = 3.0;
  double x_m = 1.0;
};

/// Which parameter block is read depends on `study`; per_rep_n overrides
/// the `n` of the generator parameters (paths per wallet for Current).
struct StudySpec {
  Study study = Study::Transaction;
  synth::TxnGenParams txn;
  synth::LoanGenParams loan;
  ExceedanceParams exceedance;
  NewCreditParams credit;
  double liquidation_proportion = 1.0;
  std::size_t replications = 5000;
  std::size_t per_rep_n = 60000;
  double confidence_z = 1.96;
  std::uint64_t seed = 42;
  unsigned threads = 1;
};

struct StudyResult {
  double mean_estimate = 0.0;
  double theoretical_mean = 0.0;
  double sse = 0.0;  // sample variance of the estimates
  double ase = 0.0;  // analytic variance at per_rep_n
  double coverage = 0.0;
};

/// Analytic mean and variance of the estimator under `spec`. Historical and
/// new-credit means are the true parameters the estimators target.
inline oracle::MomentPair study_moments(const StudySpec& spec) {
  const double n = static_cast<double>(spec.per_rep_n);
  switch (spec.study) {
    case Study::Transaction:
      return oracle::transaction_moments_oracle(spec.txn.p, spec.txn.alpha, spec.txn.x_min, n);
    case Study::Utilization:
      return oracle::utilization_moments_oracle(spec.loan.alpha, spec.loan.x_min, spec.loan.l_min,
                                                spec.loan.l_max, n);
    case Study::Historical: {
      const auto l = oracle::loan_moments(spec.loan.alpha, spec.loan.x_min, spec.loan.l_min,
                                          spec.loan.l_max);
      return {spec.loan.s_h, oracle::historical_var_oracle(spec.loan.s_h, n, l.mean, l.second)};
    }
    case Study::Current: {
      const auto& e = spec.exceedance;
      const double s = oracle::lar_exceedance_oracle(e.alpha_lar, e.xm_lar, e.alpha_h, e.xm_h);
      return oracle::current_moments_oracle(s, n);
    }
    case Study::NewCredit: {
      const auto& c = spec.credit;
      const double mu_l = oracle::pareto_mean(c.alpha, c.x_m);
      const double s = oracle::newcredit_prob_oracle(c.x_m, mu_l, c.alpha, 0.5 / (n + 1.0), n);
      return oracle::newcredit_moments_oracle(s, n);
    }
  }
  throw Error(Errc::InvalidArgument, "unknown study");
}

/// The estimate of replication r; depends only on (spec, r).
inline double replicate(const StudySpec& spec, std::size_t r) {
  Stream rng = Stream::sub(spec.seed, {static_cast<std::uint64_t>(spec.study), r});
  const std::size_t n = spec.per_rep_n;
  switch (spec.study) {
    case Study::Transaction: {
      std::vector<Transaction> txns(n);
      for (Transaction& tx : txns) tx = synth::draw_transaction(spec.txn, rng);
      return transaction_subscore(txns);
    }
    case Study::Utilization: {
      std::vector<UtilizationTerm> terms(n);
      for (UtilizationTerm& t : terms) {
        const synth::LoanDraw d = synth::draw_loan(spec.loan, rng);
        t = {d.loan, d.capacity()};
      }
      return utilization_subscore(std::span<const UtilizationTerm>(terms));
    }
    case Study::Historical: {
      std::vector<HistoricalLoan> loans(n);
      for (HistoricalLoan& h : loans) {
        const synth::LoanDraw d = synth::draw_loan(spec.loan, rng);
        h.liquidated = d.liquidated;
        h.loan_usd = d.loan;
        h.risk_factor = rng.uniform();
        h.liquidation_proportion = spec.liquidation_proportion;
        h.recency = rng.uniform();
      }
      return historical_subscore(loans);
    }
    case Study::Current: {
      const auto& e = spec.exceedance;
      std::vector<PathDraw> draws(n);
      for (PathDraw& d : draws) {
        d.lar_total = synth::sample_pareto(e.alpha_lar, e.xm_lar, rng);
        d.holdings = synth::sample_pareto(e.alpha_h, e.xm_h, rng);
      }
      const BatchPlan plan{n, 1.0, 1, 1};
      return run_batches(plan, [&](std::uint64_t i) { return draws[i]; }).s_c;
    }
    case Study::NewCredit: {
      std::vector<double> times(n);
      std::vector<double> amounts(n);
      for (std::size_t j = 0; j < n; ++j) {
        amounts[j] = synth::sample_pareto(spec.credit.alpha, spec.credit.x_m, rng);
        times[j] = rng.uniform();
      }
      std::sort(times.begin(), times.end());
      return newcredit_subscore(with_gaps(amounts, times));
    }
  }
  throw Error(Errc::InvalidArgument, "unknown study");
}

/// All replication estimates, in replication order.
inline std::vector<double> replicate_all(const StudySpec& spec) {
  if (spec.replications < 2) throw Error(Errc::InvalidArgument, "need at least 2 replications");
  if (spec.per_rep_n == 0) throw Error(Errc::InvalidArgument, "per_rep_n must be positive");
  std::vector<double> est(spec.replications);
  parallel_for(est.size(), spec.threads, [&](std::size_t r) { est[r] = replicate(spec, r); });
  return est;
}

struct SampleMoments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double skewness = 0.0;  // m3 / m2^1.5 with population central moments
};

inline SampleMoments sample_moments(std::span<const double> x) {
  SampleMoments m;
  const double n = static_cast<double>(x.size());
  if (x.empty()) return m;
  for (double v : x) m.mean += v;
  m.mean /= n;
  double m2 = 0.0;
  double m3 = 0.0;
  for (double v : x) {
    const double d = v - m.mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  if (x.size() > 1) m.variance = m2 / (n - 1.0);
  m2 /= n;
  m3 /= n;
  m.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  return m;
}

inline StudyResult summarize(std::span<const double> estimates, oracle::MomentPair theory,
                             double z) {
  const SampleMoments m = sample_moments(estimates);
  StudyResult out;
  out.mean_estimate = m.mean;
  out.theoretical_mean = theory.mean;
  out.sse = m.variance;
  out.ase = theory.variance;
  const double half = z * std::sqrt(theory.variance);
  std::size_t covered = 0;
  for (double e : estimates)
    if (std::abs(e - theory.mean) <= half) ++covered;
  out.coverage = static_cast<double>(covered) / static_cast<double>(estimates.size());
  return out;
}

inline StudyResult run_study(const StudySpec& spec) {
  const oracle::MomentPair theory = study_moments(spec);
  const std::vector<double> est = replicate_all(spec);
  return summarize(est, theory, spec.confidence_z);
}

enum class Table { Table1, Table2 };

/// Parameter rows of the reference tables at full size (5000 x 60000).
inline std::vector<StudySpec> table_rows(Table table, std::uint64_t seed = 42) {
  std::vector<StudySpec> rows;
  auto base = [&](Study s, std::size_t row) {
    StudySpec spec;
    spec.study = s;
    spec.seed = derive_seed(seed, {static_cast<std::uint64_t>(table), row});
    return spec;
  };
  if (table == Table::Table1) {
    const std::array<std::array<double, 3>, 5> params{{
        {0.60, 2.10, 300}, {0.35, 2.25, 300}, {0.80, 2.10, 320}, {0.68, 2.60, 110}, {0.42, 2.06, 108}}};
    for (std::size_t i = 0; i < params.size(); ++i) {
      StudySpec s = base(Study::Transaction, i);
      s.txn.p = params[i][0];
      s.txn.alpha = params[i][1];
      s.txn.x_min = params[i][2];
      rows.push_back(s);
    }
  } else {
    const std::array<std::array<double, 4>, 5> params{{{2.10, 300, 0.50, 0.90},
                                                        {2.30, 210, 0.64, 0.92},
                                                        {2.80, 50, 0.62, 0.84},
                                                        {2.45, 680, 0.46, 0.74},
                                                        {2.45, 680, 0.46, 0.94}}};
    for (std::size_t i = 0; i < params.size(); ++i) {
      StudySpec s = base(Study::Utilization, i);
      s.loan.alpha = params[i][0];
      s.loan.x_min = params[i][1];
      s.loan.l_min = params[i][2];
      s.loan.l_max = params[i][3];
      rows.push_back(s);
    }
  }
  return rows;
}

struct TableRow {
  StudySpec spec;
  StudyResult result;
  bool pass = false;
};

inline constexpr double kTable1MeanTol = 0.005;
inline constexpr double kTable1CoverageMin = 0.93;
inline constexpr double kTable2MeanTol = 0.001;

inline bool row_passes(Table table, const StudyResult& r) {
  const double err = std::abs(r.mean_estimate - r.theoretical_mean);
  if (table == Table::Table1)
    return err <= kTable1MeanTol && r.coverage >= kTable1CoverageMin && r.coverage <= 1.0;
  return err <= kTable2MeanTol;
}

/// Runs every row with (replications, per_rep_n) given explicitly.
inline std::vector<TableRow> run_table(Table table, std::size_t replications, std::size_t per_rep_n,
                                       std::uint64_t seed = 42, unsigned threads = 1) {
  std::vector<TableRow> out;
  for (StudySpec spec : table_rows(table, seed)) {
    spec.replications = replications;
    spec.per_rep_n = per_rep_n;
    spec.threads = threads;
    TableRow row{spec, run_study(spec), false};
    row.pass = row_passes(table, row.result);
    out.push_back(row);
  }
  return out;
}

/// Full-size tables shrunk by `scale`: 5000*scale replications of
/// 60000*scale draws, each at least 100.
inline std::vector<TableRow> reproduce_table(Table table, double scale, std::uint64_t seed = 42,
                                             unsigned threads = 1) {
  const double reps = std::round(5000.0 * scale);
  const double n = std::round(60000.0 * scale);
  if (!(scale <= 1.0) || !(reps >= 100.0) || !(n >= 100.0))
    throw Error(Errc::ScaleTooSmall, "scale must give at least 100 replications and lie in (0,1]");
  return run_table(table, static_cast<std::size_t>(reps), static_cast<std::size_t>(n), seed,
                   threads);
}

/// Least-squares slope of log(y) on log(x).
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw Error(Errc::InvalidArgument, "slope needs matching inputs of size >= 2");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw Error(Errc::InvalidArgument, "log-log fit needs positive values");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

struct ScalingResult {
  std::vector<double> sizes;
  std::vector<double> sse;
  double slope = 0.0;
};

/// Re-runs the study at each size and fits log(sse) against log(n).
inline ScalingResult variance_scaling_check(StudySpec spec, std::span<const std::size_t> sizes) {
  if (sizes.size() < 3) throw Error(Errc::InsufficientSizes, "need at least 3 sizes");
  const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
  if (*lo == 0 || static_cast<double>(*hi) < 10.0 * static_cast<double>(*lo))
    throw Error(Errc::InsufficientSizes, "sizes must span at least one decade");
  ScalingResult out;
  for (std::size_t n : sizes) {
    spec.per_rep_n = n;
    const std::vector<double> est = replicate_all(spec);
    out.sizes.push_back(static_cast<double>(n));
    out.sse.push_back(sample_moments(est).variance);
  }
  out.slope = loglog_slope(out.sizes, out.sse);
  return out;
}

/// Five independent component studies combined into the score. Component 2
/// is a utilization study; the score uses its headroom 1 - s_cu.
struct OccrStudySpec {
  std::array<StudySpec, 5> components;
  Weights weights = kDefaultWeights;
  std::size_t replications = 2000;
  unsigned threads = 1;
};

/// Parameters with moderate tails so the delta-method moments are accurate
/// at a few hundred draws per component.
inline OccrStudySpec default_occr_study(std::uint64_t seed = 42, std::size_t n = 400) {
  OccrStudySpec o;
  for (std::size_t k = 0; k < o.components.size(); ++k) {
    StudySpec& s = o.components[k];
    s.seed = derive_seed(seed, {0x0CC2, k});
    s.per_rep_n = n;
    s.loan.alpha = 5.0;
    s.loan.x_min = 100.0;
    s.loan.l_min = 0.5;
    s.loan.l_max = 0.9;
  }
  o.components[0].study = Study::Historical;
  o.components[0].loan.s_h = 0.3;
  o.components[1].study = Study::Current;
  o.components[1].per_rep_n = 2000;
  o.components[2].study = Study::Utilization;
  o.components[3].study = Study::Transaction;
  o.components[3].txn.p = 0.6;
  o.components[3].txn.alpha = 5.0;
  o.components[3].txn.x_min = 100.0;
  o.components[4].study = Study::NewCredit;
  o.components[4].credit = {3.0, 1.0};
  return o;
}

struct OccrStudyResult {
  oracle::MomentPair theory;
  SampleMoments empirical;
  std::vector<double> raw;  // occr_raw per replication
};

inline OccrStudyResult run_occr_study(const OccrStudySpec& spec) {
  ComponentMoments theory;
  for (std::size_t k = 0; k < 5; ++k) theory[k] = study_moments(spec.components[k]);
  theory[2] = headroom_moments(theory[2]);

  OccrStudyResult out;
  out.theory = occr_moments(theory, spec.weights);
  out.raw.resize(spec.replications);
  parallel_for(spec.replications, spec.threads, [&](std::size_t r) {
    SubscoreVector v;
    v.s_h = replicate(spec.components[0], r);
    v.s_c = replicate(spec.components[1], r);
    v.s_cu = replicate(spec.components[2], r);
    v.s_ct = replicate(spec.components[3], r);
    v.s_nc = replicate(spec.components[4], r);
    out.raw[r] = occr_score(v, spec.weights).raw;
  });
  out.empirical = sample_moments(out.raw);
  return out;
}

/// Oracle against independent brute-force simulation.
struct CrossCheck {
  std::string name;
  double estimate = 0.0;
  double expected = 0.0;
  double std_error = 0.0;
  bool pass = false;

  double z_score() const { return std_error > 0.0 ? (estimate - expected) / std_error : 0.0; }
};

inline CrossCheck make_check(std::string name, double estimate, double expected, double se,
                             double z_max = 5.0) {
  CrossCheck c{std::move(name), estimate, expected, se, false};
  c.pass = std::abs(estimate - expected) <= z_max * se;
  return c;
}

/// Mean with its standard error from per-draw values.
inline std::pair<double, double> mean_and_se(std::span<const double> x) {
  const SampleMoments m = sample_moments(x);
  return {m.mean, std::sqrt(m.variance / static_cast<double>(x.size()))};
}

/// Standard error of the unbiased sample variance, from the fourth moment.
inline double variance_se(std::span<const double> x) {
  const SampleMoments m = sample_moments(x);
  const double n = static_cast<double>(x.size());
  double m4 = 0.0;
  for (double v : x) m4 += std::pow(v - m.mean, 4);
  m4 /= n;
  const double s4 = m.variance * m.variance;
  return std::sqrt(std::max(0.0, (m4 - s4 * (n - 3.0) / (n - 1.0)) / n));
}

inline double exceedance_fraction(const ExceedanceParams& e, std::size_t draws, std::uint64_t seed) {
  Stream rng(seed);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < draws; ++i) {
    const double lar = synth::sample_pareto(e.alpha_lar, e.xm_lar, rng);
    const double h = synth::sample_pareto(e.alpha_h, e.xm_h, rng);
    if (lar > h) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(draws);
}

/// Fraction of trials in the spacing model: one loan of Pareto size whose
/// date is the first of n uniform dates, with 0 as its left neighbour; the
/// event is size >= mu_l and nearest-neighbour gap <= mu_dd.
inline double newcredit_event_fraction(double x_m, double mu_l, double alpha, double mu_dd,
                                       std::size_t n, std::size_t trials, std::uint64_t seed) {
  if (n < 2) throw Error(Errc::InvalidArgument, "spacing model needs n >= 2");
  Stream rng(seed);
  std::vector<double> times(n + 1);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    const double size = synth::sample_pareto(alpha, x_m, rng);
    times[0] = 0.0;
    for (std::size_t j = 1; j <= n; ++j) times[j] = rng.uniform();
    std::sort(times.begin() + 1, times.end());
    if (size >= mu_l && min_loan_gap(times, 1) <= mu_dd) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(trials);
}

inline double binomial_se(double p, std::size_t trials) {
  return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

/// Every oracle against a Monte Carlo estimate, at 5 standard errors.
inline std::vector<CrossCheck> oracle_crosschecks(std::uint64_t seed = 42, unsigned threads = 1,
                                                  std::size_t draws = 1000000) {
  std::vector<CrossCheck> out;
  auto sub = [&](std::uint64_t k) { return derive_seed(seed, {0x0AC1E, k}); };

  {
    Stream rng(sub(1));
    std::vector<double> x(draws);
    for (double& v : x) v = synth::sample_pareto(3.0, 1.0, rng);
    const auto [m, se] = mean_and_se(x);
    out.push_back(make_check("pareto_mean(3,1)", m, oracle::pareto_mean(3.0, 1.0), se));
    std::size_t above = 0;
    Stream rng2(sub(2));
    for (std::size_t i = 0; i < draws; ++i)
      if (synth::sample_pareto(2.0, 1.0, rng2) > 2.0) ++above;
    const double p = oracle::pareto_survival(2.0, 1.0, 2.0);
    out.push_back(make_check("pareto_survival(2,1,x=2)", static_cast<double>(above) / draws, p,
                             binomial_se(p, draws)));
  }
  {
    synth::LoanGenParams lp;
    lp.alpha = 5.0;
    lp.x_min = 1.0;
    Stream rng(sub(3));
    std::vector<double> l(draws), l2(draws);
    for (std::size_t i = 0; i < draws; ++i) {
      l[i] = synth::draw_loan(lp, rng).loan;
      l2[i] = l[i] * l[i];
    }
    const auto lm = oracle::loan_moments(5.0, 1.0, 0.5, 0.9);
    const auto [m1, se1] = mean_and_se(l);
    const auto [m2, se2] = mean_and_se(l2);
    out.push_back(make_check("loan_moments E[L]", m1, lm.mean, se1));
    out.push_back(make_check("loan_moments E[L^2]", m2, lm.second, se2));
  }
  {
    const ExceedanceParams e;
    const double p = oracle::lar_exceedance_oracle(e.alpha_lar, e.xm_lar, e.alpha_h, e.xm_h);
    out.push_back(make_check("lar_exceedance(2,1;3,1)", exceedance_fraction(e, draws, sub(4)), p,
                             binomial_se(p, draws)));
  }
  {
    const double p = oracle::newcredit_prob_oracle(1.0, 2.0, 2.0, 0.25, 2.0);
    out.push_back(make_check("newcredit_prob(1,2,2,0.25,2)",
                             newcredit_event_fraction(1.0, 2.0, 2.0, 0.25, 2, draws, sub(5)), p,
                             binomial_se(p, draws)));
  }

  // Estimator moments: the replication mean at 5 standard errors and the
  // replication variance at 5 standard errors of a sample variance.
  const OccrStudySpec o = default_occr_study(seed);
  for (StudySpec spec : o.components) {
    spec.replications = 2000;
    spec.threads = threads;
    const oracle::MomentPair theory = study_moments(spec);
    const std::vector<double> est = replicate_all(spec);
    const SampleMoments m = sample_moments(est);
    const std::string name(to_string(spec.study));
    out.push_back(make_check(name + " mean", m.mean, theory.mean,
                             std::sqrt(m.variance / static_cast<double>(est.size()))));
    out.push_back(make_check(name + " variance", m.variance, theory.variance, variance_se(est)));
  }
  return out;
}

}  // namespace occr::harness
