#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "occr/rng.hpp"
#include "occr/subscores.hpp"

using namespace occr;
using namespace std::chrono;
using Catch::Approx;

namespace {

AssetMap two_assets() {
  AssetMap m;
  m["LOW"] = {"LOW", 0.2, 1.0, 0.0};
  m["HIGH"] = {"HIGH", 0.6, 1.0, 0.0};
  return m;
}

// Naive reference: recomputes both means and tests each loan directly.
double newcredit_brute(const std::vector<double>& amounts, const std::vector<double>& times) {
  const std::size_t n = amounts.size();
  std::vector<double> gap(n);
  for (std::size_t j = 0; j < n; ++j) {
    double best = INFINITY;
    if (j > 0) best = std::min(best, times[j] - times[j - 1]);
    if (j + 1 < n) best = std::min(best, times[j + 1] - times[j]);
    gap[j] = best;
  }
  const double mu_l = std::accumulate(amounts.begin(), amounts.end(), 0.0) / n;
  const double mu_g = std::accumulate(gap.begin(), gap.end(), 0.0) / n;
  int hits = 0;
  for (std::size_t j = 0; j < n; ++j)
    if (amounts[j] >= mu_l && gap[j] <= mu_g) ++hits;
  return static_cast<double>(hits) / n;
}

}  // namespace

TEST_CASE("recency_weight") {
  CHECK(recency_weight(4.0, 4.0) == 0.5);
  CHECK(recency_weight(24.0, 4.0) > 1.0 - 1e-8);
  CHECK(recency_weight(4.0 - std::log(3.0), 4.0) == Approx(0.25).epsilon(1e-14));
  Stream rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double k = rng.uniform(0.0, 24.0);
    const double dt = rng.uniform(-10.0, 40.0);
    CHECK(std::abs(recency_weight(dt, k) + recency_weight(2 * k - dt, k) - 1.0) < 1e-12);
    CHECK(recency_weight(dt + 0.5, k) >= recency_weight(dt, k));
    if (std::abs(dt - k) < 10.0) CHECK(recency_weight(dt + 0.5, k) > recency_weight(dt, k));
  }
}

TEST_CASE("collateral_risk_factor") {
  AssetMap m;
  m["A"] = {"A", 0.2, 1.0, 0.0};
  m["B"] = {"B", 0.6, 1.0, 0.0};
  m["C"] = {"C", 1.0, 1.0, 0.0};
  const std::vector<CollateralLeg> one{{"C", 10.0}};
  CHECK(collateral_risk_factor(one, m, 1.0) == 1.0);
  const std::vector<CollateralLeg> half{{"C", 5.0}, {"X", 5.0}};
  m["X"] = {"X", 0.5, 1.0, 0.0};
  CHECK(collateral_risk_factor(half, m, 1.0) == Approx(0.75));
  const std::vector<CollateralLeg> weighted{{"A", 100.0}, {"B", 300.0}};
  CHECK(collateral_risk_factor(weighted, m, 1.0) == Approx(0.5));
  const std::vector<CollateralLeg> unknown{{"DOGE", 1.0}};
  CHECK_THROWS_AS(collateral_risk_factor(unknown, m, 1.0), Error);
  CHECK_THROWS_AS(collateral_risk_factor(one, m, 0.0), Error);
}

TEST_CASE("historical_subscore") {
  const std::vector<HistoricalLoan> mixed{{true, 1000.0, 0.5, 1.0, 0.5},
                                          {false, 2000.0, 0.0, 1.0, 0.25}};
  CHECK(historical_subscore(mixed) == Approx(1.0 / 3.0).epsilon(1e-14));

  std::vector<HistoricalLoan> repaid{{false, 10.0, 0.1, 1.0, 0.3}, {false, 5.0, 0.2, 1.0, 0.9}};
  CHECK(historical_subscore(repaid) == 0.0);
  for (auto& l : repaid) l.liquidated = true;
  CHECK(historical_subscore(repaid) == 1.0);

  const std::vector<HistoricalLoan> weightless{{true, 10.0, 1.0, 1.0, 0.5}};
  CHECK_THROWS_AS(historical_subscore(weightless), Error);
  CHECK_THROWS_AS(historical_subscore(std::vector<HistoricalLoan>{}), Error);
}

TEST_CASE("historical_subscore property: range and weight scaling") {
  Stream rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 20);
    std::vector<HistoricalLoan> loans(n);
    for (auto& l : loans)
      l = {rng.bernoulli(0.4), rng.uniform(1.0, 1e4), rng.uniform(0.0, 0.99), rng.uniform(0.1, 1.0),
           rng.uniform(0.01, 0.99)};
    const double s = historical_subscore(loans);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    const double c = rng.uniform(0.01, 100.0);
    auto scaled = loans;
    for (auto& l : scaled) l.loan_usd *= c;
    CHECK(std::abs(historical_subscore(scaled) - s) < 1e-12);
  }
}

TEST_CASE("historical_inputs uses closed loans and month offsets") {
  auto mk = [](std::string id, Date opened, LoanStatus st, std::string asset) {
    LoanPosition l;
    l.loan_id = std::move(id);
    l.opened_at = opened;
    l.status = st;
    if (st != LoanStatus::Open) l.closed_at = opened + days(5);
    l.loan_usd = 10.0;
    l.ltv_at_open = 0.5;
    l.liquidation_threshold = 0.6;
    l.collaterals = {{std::move(asset), 40.0}};
    return l;
  };
  WalletHistory w;
  w.wallet_id = "w";
  w.loans = {mk("a", sys_days{year{2024} / 1 / 15}, LoanStatus::Repaid, "LOW"),
             mk("b", sys_days{year{2024} / 3 / 2}, LoanStatus::Liquidated, "HIGH"),
             mk("c", sys_days{year{2024} / 5 / 30}, LoanStatus::Open, "LOW")};
  const auto in = historical_inputs(w, two_assets(), 0.8, 1.0);
  REQUIRE(in.size() == 2);
  CHECK(in[0].recency == Approx(recency_weight(0.0, 2.0)));
  CHECK(in[1].recency == 0.5);
  CHECK(in[0].risk_factor == Approx(0.25));
  CHECK(in[1].risk_factor == Approx(0.75));
  CHECK(in[1].liquidated);
  const auto fixed = historical_inputs(w, two_assets(), 0.8, 0.5, 0.0);
  CHECK(fixed[0].recency == 0.5);
  CHECK(fixed[0].liquidation_proportion == 0.5);
  CHECK(month_index(sys_days{year{2025} / 1 / 1}) - month_index(sys_days{year{2024} / 12 / 31}) == 1);
}

TEST_CASE("utilization_subscore") {
  CHECK(utilization_subscore(std::vector<UtilizationTerm>{{80.0, 80.0}}) == 0.0);
  CHECK(utilization_subscore(std::vector<UtilizationTerm>{{40.0, 80.0}}) == 0.5);
  const std::vector<UtilizationTerm> two{{50.0, 80.0}, {80.0, 80.0}};
  CHECK(utilization_subscore(two) == Approx(0.375 * 50.0 / 130.0).epsilon(1e-14));
  CHECK(utilization_subscore(two) == Approx(0.1442307692).epsilon(1e-9));
  CHECK_THROWS_AS(utilization_subscore(std::vector<UtilizationTerm>{}), Error);

  LoanPosition l;
  l.loan_usd = 50.0;
  l.ltv_at_open = 0.8;
  l.collaterals = {{"A", 60.0}, {"B", 40.0}};
  CHECK(utilization_subscore(std::vector<LoanPosition>{l}) == Approx(0.375));
}

TEST_CASE("utilization_subscore property: range and permutation invariance") {
  Stream rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 12);
    std::vector<UtilizationTerm> t(n);
    for (auto& x : t) {
      x.capacity_usd = rng.uniform(1.0, 1000.0);
      x.loan_usd = x.capacity_usd * rng.uniform_pos();
    }
    const double s = utilization_subscore(t);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    std::reverse(t.begin(), t.end());
    std::rotate(t.begin(), t.begin() + t.size() / 2, t.end());
    CHECK(std::abs(utilization_subscore(t) - s) < 1e-12);
  }
}

TEST_CASE("transaction_subscore") {
  const std::vector<Transaction> two{{{}, 100.0, Direction::Credit, 1.0},
                                     {{}, 50.0, Direction::Debit, 0.5}};
  CHECK(transaction_subscore(two) == Approx(0.5).epsilon(1e-14));
  CHECK_THROWS_AS(transaction_subscore(std::vector<Transaction>{}), Error);

  Stream rng(9);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 30);
    std::vector<Transaction> t(n);
    for (auto& x : t)
      x = {{}, rng.uniform(0.01, 1e5), rng.bernoulli(0.5) ? Direction::Credit : Direction::Debit,
           rng.uniform()};
    const double s = transaction_subscore(t);
    CHECK(s >= -1.0);
    CHECK(s <= 1.0);
    auto flipped = t;
    for (auto& x : flipped)
      x.direction = x.direction == Direction::Credit ? Direction::Debit : Direction::Credit;
    CHECK(transaction_subscore(flipped) == Approx(-s).margin(1e-15));
    auto credits = t;
    for (auto& x : credits) x = {{}, x.amount_usd, Direction::Credit, 1.0};
    CHECK(transaction_subscore(credits) == Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("min_loan_gap") {
  const Date d = sys_days{year{2024} / 3 / 1};
  const std::vector<Date> dates{d, d + days(1), d + days(9)};
  CHECK(min_loan_gap(dates, 1) == 1.0);
  CHECK(min_loan_gap(dates, 0) == 1.0);
  CHECK(min_loan_gap(dates, 2) == 8.0);
  CHECK_THROWS_AS(min_loan_gap(std::vector<Date>{d}, 0), Error);
  CHECK_THROWS_AS(min_loan_gap(dates, 3), Error);
}

TEST_CASE("newcredit_subscore") {
  const std::vector<double> amounts{10.0, 20.0, 30.0};
  const std::vector<double> days{1.0, 2.0, 10.0};
  CHECK(newcredit_subscore(with_gaps(amounts, days)) == Approx(1.0 / 3.0));

  const std::vector<double> same{7.0, 7.0, 7.0, 7.0};
  const std::vector<double> even{0.1, 0.2, 0.3, 0.4};
  CHECK(newcredit_subscore(with_gaps(same, even)) == 1.0);

  // Largest loan is isolated, the clustered ones are small.
  const std::vector<double> a2{1.0, 1.0, 10.0};
  const std::vector<double> t2{0.0, 1.0, 20.0};
  CHECK(newcredit_subscore(with_gaps(a2, t2)) == 0.0);

  CHECK_THROWS_AS(newcredit_subscore(std::vector<NewCreditLoan>{{1.0, 0.0}}), Error);
}

TEST_CASE("newcredit_subscore agrees with a brute-force re-evaluation") {
  Stream rng(21);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 5);
    std::vector<double> amounts(n), times(n);
    for (std::size_t j = 0; j < n; ++j) {
      amounts[j] = std::floor(rng.uniform(1.0, 6.0));
      times[j] = std::floor(rng.uniform(0.0, 30.0));
    }
    std::sort(times.begin(), times.end());
    const double s = newcredit_subscore(with_gaps(amounts, times));
    CHECK(s == newcredit_brute(amounts, times));
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);

    if (n < 6) {
      // Append a loan below the current mean amount, after the last date.
      const double mu = std::accumulate(amounts.begin(), amounts.end(), 0.0) / n;
      amounts.push_back(mu * 0.5);
      times.push_back(times.back() + std::floor(rng.uniform(0.0, 10.0)));
      CHECK(newcredit_subscore(with_gaps(amounts, times)) == newcredit_brute(amounts, times));
    }
  }
}

TEST_CASE("newcredit_window keeps loans inside the window") {
  WalletHistory w;
  const Date end = sys_days{year{2024} / 6 / 30};
  for (int k : {40, 20, 10, 0}) {
    LoanPosition l;
    l.loan_id = std::to_string(k);
    l.opened_at = end - days(k);
    l.loan_usd = 100.0 + k;
    w.loans.push_back(l);
  }
  std::sort(w.loans.begin(), w.loans.end(),
            [](const LoanPosition& a, const LoanPosition& b) { return a.opened_at < b.opened_at; });
  const auto in = newcredit_window(w, end, 30);
  REQUIRE(in.size() == 3);
  CHECK(in[0].loan_usd == 120.0);
  CHECK(in[0].gap == 10.0);
  CHECK(in[2].gap == 10.0);
  CHECK(newcredit_window(w, end, 5).size() == 1);
}
