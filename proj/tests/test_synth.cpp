#include <catch_amalgamated.hpp>

#include <cmath>

#include "occr/domain.hpp"
#include "occr/oracle.hpp"
#include "occr/synth.hpp"

using namespace occr;
using namespace occr::synth;

TEST_CASE("pareto_from_uniform endpoint") {
  CHECK(pareto_from_uniform(1.0, 2.5, 300.0) == 300.0);
  CHECK(pareto_from_uniform(0.25, 2.0, 1.0) == 2.0);
}

TEST_CASE("Pareto sample moments at 5 standard errors") {
  const std::size_t n = 1000000;
  Stream rng(2024);
  double sum = 0.0;
  double sum2 = 0.0;
  std::size_t above = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = sample_pareto(3.0, 1.0, rng);
    sum += x;
    sum2 += x * x;
    if (sample_pareto(2.0, 1.0, rng) > 2.0) ++above;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean - oracle::pareto_mean(3.0, 1.0)) < 5.0 * std::sqrt(var / n));
  CHECK(std::abs(mean - 1.5) < 0.01);
  const double p = static_cast<double>(above) / n;
  CHECK(std::abs(p - 0.25) < 0.005);

  Stream rng5(5);
  double s = 0.0, s2 = 0.0, s4 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = sample_pareto(5.0, 2.0, rng5);
    s += x;
    s2 += x * x;
    s4 += x * x * x * x;
  }
  const double m2 = s2 / n;
  const double se2 = std::sqrt((s4 / n - m2 * m2) / n);
  CHECK(std::abs(m2 - oracle::pareto_second_moment(5.0, 2.0)) < 5.0 * se2);
}

TEST_CASE("generate_transactions") {
  TxnGenParams p;
  p.n = 500;
  p.p = 1.0;
  Stream rng(3);
  const auto tx = generate_transactions(p, rng);
  REQUIRE(tx.size() == 500);
  for (std::size_t i = 0; i < tx.size(); ++i) {
    CHECK(tx[i].direction == Direction::Credit);
    CHECK(tx[i].amount_usd >= p.x_min);
    CHECK(tx[i].recency_weight >= 0.0);
    CHECK(tx[i].recency_weight < 1.0);
    if (i) CHECK(tx[i - 1].timestamp <= tx[i].timestamp);
  }
  Stream again(3);
  CHECK(generate_transactions(p, again) == tx);
}

TEST_CASE("generate_loans respects the borrow cap and rates") {
  LoanGenParams p;
  p.n = 2000;
  p.s_h = 0.0;
  p.l_min = p.l_max = 0.7;
  Stream rng(4);
  const auto loans = generate_loans(p, rng);
  REQUIRE(loans.size() == 2000);
  for (const auto& l : loans) {
    CHECK(l.status == LoanStatus::Repaid);
    CHECK(l.ltv_at_open == 0.7);
    CHECK(l.loan_usd <= l.ltv_at_open * l.collateral_usd());
    CHECK(l.loan_usd > 0.0);
  }

  p.s_h = 1.0;
  p.open_prob = 0.5;
  Stream rng2(4);
  std::size_t open = 0;
  for (const auto& l : generate_loans(p, rng2)) {
    if (l.status == LoanStatus::Open) {
      ++open;
      CHECK_FALSE(l.closed_at);
    } else {
      CHECK(l.status == LoanStatus::Liquidated);
    }
  }
  CHECK(open > 850);
  CHECK(open < 1150);
}

TEST_CASE("generated wallets always validate") {
  Stream rng(12);
  for (int i = 0; i < 200; ++i) {
    TxnGenParams tp;
    tp.n = static_cast<std::size_t>(rng.uniform() * 30);
    tp.p = rng.uniform();
    tp.alpha = rng.uniform(1.1, 4.0);
    LoanGenParams lp;
    lp.n = static_cast<std::size_t>(rng.uniform() * 10);
    lp.l_min = rng.uniform(0.05, 0.5);
    lp.l_max = rng.uniform(lp.l_min, 0.99);
    lp.open_prob = rng.uniform();
    const WalletHistory w = generate_wallet("w", tp, lp, rng.uniform(0.0, 1e4), rng);
    CHECK(validate_wallet(w) == w);
  }
  Stream rng2(1);
  TxnGenParams none_t;
  none_t.n = 0;
  LoanGenParams none_l;
  none_l.n = 0;
  CHECK(generate_wallet("empty", none_t, none_l, 0.0, rng2).empty());
}

TEST_CASE("generator parameter checks") {
  Stream rng(1);
  TxnGenParams tp;
  tp.p = 1.5;
  CHECK_THROWS_AS(generate_transactions(tp, rng), Error);
  LoanGenParams lp;
  lp.l_max = 1.0;
  CHECK_THROWS_AS(generate_loans(lp, rng), Error);
  lp.l_max = 0.4;
  lp.l_min = 0.5;
  CHECK_THROWS_AS(generate_loans(lp, rng), Error);
}
