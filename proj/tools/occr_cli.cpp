// occr: batch scoring, synthetic data, LaR simulation, validation studies
// and LTV quotes.
//
// Exit codes: 0 success, 1 invalid input or failed validation, 2 I/O
// error, 64 usage error.

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "occr/occr.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitIo = 2;
constexpr int kExitUsage = 64;

int exit_code(occr::Errc code) {
  switch (code) {
    case occr::Errc::IoError: return kExitIo;
    case occr::Errc::ConfigError:
    case occr::Errc::ScaleTooSmall:
    case occr::Errc::InsufficientSizes: return kExitUsage;
    default: return kExitInvalid;
  }
}

// Writes to `path`, or stdout for "-".
void emit(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content << std::flush;
    return;
  }
  occr::detail::write_file(path, content);
}

/// One flag per config key, applied after the config file.
struct ConfigFlags {
  std::string config_path;
  std::vector<std::string> assignments;
  std::map<std::string, std::string, std::less<>> values;
  std::vector<std::pair<std::string, CLI::Option*>> options;

  void attach(CLI::App* app, std::initializer_list<std::string_view> keys = {}) {
    app->add_option("--config", config_path, "flat key=value config file");
    app->add_option("--set", assignments, "override a config key (key=value), repeatable");
    const auto& list = keys.size() ? std::vector<std::string_view>(keys)
                                   : std::vector<std::string_view>(occr::kConfigKeys.begin(),
                                                                   occr::kConfigKeys.end());
    for (std::string_view key : list) {
      std::string name = "--" + std::string(key);
      if (key == "rng_seed") name = "--seed," + name;
      if (key == "occr_avg") name += ",--avg";
      if (key == "ltv_alpha") name += ",--alpha";
      if (key == "ltv_fixed") name += ",--fixed";
      if (key == "ltv_cap") name += ",--cap";
      auto* opt = app->add_option(name, values[std::string(key)], "config key " + std::string(key));
      options.emplace_back(std::string(key), opt);
    }
  }

  /// defaults < config file < --set < dedicated flags.
  occr::RunConfig resolve() const {
    occr::RunConfig rc;
    if (!config_path.empty()) occr::apply_config_file(rc, config_path);
    for (const std::string& a : assignments) occr::apply_assignment(rc, a);
    for (const auto& [key, opt] : options)
      if (opt->count() > 0) occr::apply_setting(rc, key, values.at(key));
    occr::validate_config(rc.score);
    return rc;
  }
};

double r12(double x) { return occr::round12(x); }

int cmd_score(const std::string& wallets_path, const std::string& assets_path,
              const std::string& out_path, const ConfigFlags& flags) {
  const occr::RunConfig rc = flags.resolve();
  const auto wallets = occr::load_wallets(wallets_path);
  const auto assets = occr::load_asset_stats(assets_path);
  const auto reports = occr::score_wallets(wallets, assets, rc.score, rc.threads);
  emit(out_path, occr::reports_json(reports));
  return kExitOk;
}

struct SynthOptions {
  std::size_t wallets = 10;
  std::uint64_t seed = 42;
  std::string out = "-";
  std::string assets_out;
  unsigned threads = 1;
  occr::synth::TxnGenParams txn;
  occr::synth::LoanGenParams loan;
  std::string start = "2024-01-01";
  double holdings_alpha = 2.5;
  double holdings_min = 1000.0;
  double asset_vol = 0.8;
  double asset_spot = 2000.0;
};

int cmd_synth(SynthOptions o) {
  const occr::Date start = occr::parse_date(o.start);
  o.txn.window_start = o.loan.window_start = start;
  o.loan.window_days = o.txn.window_days;
  occr::synth::check(o.txn);
  occr::synth::check(o.loan);

  std::vector<occr::WalletHistory> wallets(o.wallets);
  occr::parallel_for(o.wallets, o.threads, [&](std::size_t i) {
    occr::Stream rng = occr::Stream::sub(o.seed, {i});
    const double holdings = occr::synth::sample_pareto(o.holdings_alpha, o.holdings_min, rng);
    char id[32];
    std::snprintf(id, sizeof id, "W%06zu", i);
    wallets[i] = occr::synth::generate_wallet(id, o.txn, o.loan, holdings, rng);
  });
  emit(o.out, occr::wallets_json(wallets));
  if (!o.assets_out.empty()) {
    occr::AssetMap assets;
    assets[o.loan.collateral_asset] = {o.loan.collateral_asset, o.asset_vol, o.asset_spot, 0.0};
    emit(o.assets_out, occr::assets_json(assets));
  }
  return kExitOk;
}

int cmd_lar(const std::string& wallets_path, const std::string& assets_path,
            const std::string& wallet_id, const ConfigFlags& flags) {
  const occr::RunConfig rc = flags.resolve();
  const auto wallets = occr::load_wallets(wallets_path);
  const auto assets = occr::load_asset_stats(assets_path);
  const auto it = std::find_if(wallets.begin(), wallets.end(),
                               [&](const occr::WalletHistory& w) { return w.wallet_id == wallet_id; });
  if (it == wallets.end())
    throw occr::Error(occr::Errc::ValidationError, "wallet " + wallet_id + " not in " + wallets_path,
                      wallet_id);
  occr::SimOutcome sim;
  try {
    sim = occr::current_subscore(*it, assets, rc.score, rc.threads);
  } catch (const occr::Error& e) {
    if (e.code() != occr::Errc::NoOpenPositions) throw;
  }
  nlohmann::ordered_json j;
  j["wallet_id"] = wallet_id;
  j["s_c"] = r12(sim.s_c);
  j["paths_used"] = sim.paths_used;
  j["batches"] = sim.batches;
  j["converged"] = sim.converged;
  j["lar_mean"] = r12(sim.lar_mean);
  j["lar_variance"] = r12(sim.lar_variance);
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

nlohmann::ordered_json row_json(const occr::harness::TableRow& row, std::size_t index) {
  nlohmann::ordered_json j;
  j["row"] = index + 1;
  if (row.spec.study == occr::harness::Study::Transaction) {
    j["params"] = {{"p", row.spec.txn.p}, {"alpha", row.spec.txn.alpha}, {"x_min", row.spec.txn.x_min}};
  } else {
    j["params"] = {{"alpha", row.spec.loan.alpha},
                   {"x_min", row.spec.loan.x_min},
                   {"l_min", row.spec.loan.l_min},
                   {"l_max", row.spec.loan.l_max}};
  }
  j["replications"] = row.spec.replications;
  j["per_rep_n"] = row.spec.per_rep_n;
  j["mean_estimate"] = r12(row.result.mean_estimate);
  j["theoretical_mean"] = r12(row.result.theoretical_mean);
  j["ase"] = r12(row.result.ase);
  j["sse"] = r12(row.result.sse);
  j["coverage"] = r12(row.result.coverage);
  j["pass"] = row.pass;
  return j;
}

int cmd_validate(const std::string& which, double scale, std::uint64_t seed, unsigned threads,
                 const std::string& out_path) {
  if (!(scale > 0.0 && scale <= 1.0)) {
    std::cerr << "occr validate: --scale must lie in (0,1]\n";
    return kExitUsage;
  }
  nlohmann::ordered_json doc;
  doc["check"] = which;
  doc["scale"] = scale;
  doc["seed"] = seed;
  bool all_pass = true;

  if (which == "oracles") {
    const auto draws = static_cast<std::size_t>(std::max(1e4, std::round(1e6 * scale)));
    const auto checks = occr::harness::oracle_crosschecks(seed, threads, draws);
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    std::printf("%-32s %14s %14s %12s %8s  %s\n", "check", "estimate", "expected", "std_error", "z",
                "result");
    for (const auto& c : checks) {
      std::printf("%-32s %14.8g %14.8g %12.4g %8.3f  %s\n", c.name.c_str(), c.estimate, c.expected,
                  c.std_error, c.z_score(), c.pass ? "PASS" : "FAIL");
      all_pass = all_pass && c.pass;
      list.push_back({{"name", c.name},
                      {"estimate", r12(c.estimate)},
                      {"expected", r12(c.expected)},
                      {"std_error", r12(c.std_error)},
                      {"pass", c.pass}});
    }
    doc["checks"] = std::move(list);
  } else {
    const auto table = which == "table1" ? occr::harness::Table::Table1 : occr::harness::Table::Table2;
    const auto rows = occr::harness::reproduce_table(table, scale, seed, threads);
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    std::printf("%-4s %-28s %12s %12s %12s %12s %8s  %s\n", "row", "params", "estimate",
                "theory", "ASE", "SSE", "CP", "result");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      char params[64];
      if (table == occr::harness::Table::Table1)
        std::snprintf(params, sizeof params, "(%.2f, %.2f, %g)", r.spec.txn.p, r.spec.txn.alpha,
                      r.spec.txn.x_min);
      else
        std::snprintf(params, sizeof params, "(%.2f, %g, %.2f, %.2f)", r.spec.loan.alpha,
                      r.spec.loan.x_min, r.spec.loan.l_min, r.spec.loan.l_max);
      std::printf("%-4zu %-28s %12.6f %12.6f %12.3e %12.3e %8.3f  %s\n", i + 1, params,
                  r.result.mean_estimate, r.result.theoretical_mean, r.result.ase, r.result.sse,
                  r.result.coverage, r.pass ? "PASS" : "FAIL");
      all_pass = all_pass && r.pass;
      list.push_back(row_json(r, i));
    }
    doc["rows"] = std::move(list);
  }
  doc["pass"] = all_pass;
  if (!out_path.empty()) emit(out_path, doc.dump(2) + "\n");
  return all_pass ? kExitOk : kExitInvalid;
}

int cmd_ltv(double occr_value, const ConfigFlags& flags) {
  const occr::RunConfig rc = flags.resolve();
  nlohmann::ordered_json j;
  j["occr"] = r12(occr_value);
  j["occr_avg"] = r12(rc.score.occr_avg);
  j["f"] = r12(occr::ltv_adjustment(occr_value, rc.score));
  j["ltv"] = r12(occr::dynamic_ltv(occr_value, rc.score));
  std::cout << j.dump() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"On-chain credit risk scoring"};
  app.require_subcommand(1);
  app.fallthrough(false);

  std::function<int()> action;

  auto* score = app.add_subcommand("score", "score a wallet file");
  std::string wallets_path, assets_path, out_path = "-";
  ConfigFlags score_flags;
  score->add_option("--wallets", wallets_path, "wallet JSON file")->required();
  score->add_option("--assets", assets_path, "asset statistics JSON file")->required();
  score->add_option("--out", out_path, "report file, - for stdout");
  score_flags.attach(score);
  score->callback([&] {
    action = [&] { return cmd_score(wallets_path, assets_path, out_path, score_flags); };
  });

  auto* synth = app.add_subcommand("synth", "generate synthetic wallets");
  SynthOptions so;
  so.loan.open_prob = 0.2;
  synth->add_option("--wallets", so.wallets, "number of wallets")->capture_default_str();
  synth->add_option("--seed", so.seed, "RNG seed")->capture_default_str();
  synth->add_option("--out", so.out, "wallet file, - for stdout")->capture_default_str();
  synth->add_option("--assets-out", so.assets_out, "also write a matching asset file");
  synth->add_option("--threads", so.threads, "worker threads (0 = all cores)")->capture_default_str();
  synth->add_option("--txns", so.txn.n, "transactions per wallet")->capture_default_str();
  synth->add_option("--txn-p", so.txn.p, "credit probability")->capture_default_str();
  synth->add_option("--txn-alpha", so.txn.alpha, "transaction Pareto shape")->capture_default_str();
  synth->add_option("--txn-xmin", so.txn.x_min, "transaction Pareto scale")->capture_default_str();
  synth->add_option("--loans", so.loan.n, "loans per wallet")->capture_default_str();
  synth->add_option("--loan-alpha", so.loan.alpha, "collateral Pareto shape")->capture_default_str();
  synth->add_option("--loan-xmin", so.loan.x_min, "collateral Pareto scale")->capture_default_str();
  synth->add_option("--ltv-min", so.loan.l_min, "lower LTV bound")->capture_default_str();
  synth->add_option("--ltv-max", so.loan.l_max, "upper LTV bound")->capture_default_str();
  synth->add_option("--liq-rate", so.loan.s_h, "liquidation rate of closed loans")->capture_default_str();
  synth->add_option("--open-prob", so.loan.open_prob, "probability a loan is still open")
      ->capture_default_str();
  synth->add_option("--asset", so.loan.collateral_asset, "collateral asset id")->capture_default_str();
  synth->add_option("--asset-vol", so.asset_vol, "volatility written to --assets-out")
      ->capture_default_str();
  synth->add_option("--asset-spot", so.asset_spot, "spot price written to --assets-out")
      ->capture_default_str();
  synth->add_option("--start", so.start, "window start, YYYY-MM-DD")->capture_default_str();
  synth->add_option("--window-days", so.txn.window_days, "window length in days")->capture_default_str();
  synth->add_option("--holdings-alpha", so.holdings_alpha, "holdings Pareto shape")->capture_default_str();
  synth->add_option("--holdings-min", so.holdings_min, "holdings Pareto scale")->capture_default_str();
  synth->callback([&] { action = [&] { return cmd_synth(so); }; });

  auto* lar = app.add_subcommand("lar", "simulate the current-risk subscore of one wallet");
  std::string lar_wallets, lar_assets, lar_id;
  ConfigFlags lar_flags;
  lar->add_option("--wallets", lar_wallets, "wallet JSON file")->required();
  lar->add_option("--assets", lar_assets, "asset statistics JSON file")->required();
  lar->add_option("--wallet-id", lar_id, "wallet to simulate")->required();
  lar_flags.attach(lar);
  lar->callback([&] { action = [&] { return cmd_lar(lar_wallets, lar_assets, lar_id, lar_flags); }; });

  auto* validate = app.add_subcommand("validate", "replication studies and oracle cross-checks");
  std::string which;
  double scale = 0.2;
  std::uint64_t vseed = 42;
  unsigned vthreads = 1;
  std::string vout;
  validate->add_option("check", which, "table1, table2 or oracles")
      ->required()
      ->check(CLI::IsMember({"table1", "table2", "oracles"}));
  validate->add_option("--scale", scale, "fraction of 5000 replications x 60000 draws")
      ->capture_default_str();
  validate->add_option("--seed", vseed, "RNG seed")->capture_default_str();
  validate->add_option("--threads", vthreads, "worker threads (0 = all cores)")->capture_default_str();
  validate->add_option("--out", vout, "JSON results file, - for stdout");
  validate->callback([&] { action = [&] { return cmd_validate(which, scale, vseed, vthreads, vout); }; });

  auto* ltv = app.add_subcommand("ltv", "LTV quote for a score");
  double occr_value = 0.0;
  ConfigFlags ltv_flags;
  ltv->add_option("--occr", occr_value, "score in [0,1]")->required()->check(CLI::Range(0.0, 1.0));
  ltv_flags.attach(ltv, {"occr_avg", "ltv_alpha", "ltv_fixed", "ltv_cap"});
  ltv->callback([&] { action = [&] { return cmd_ltv(occr_value, ltv_flags); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    return action();
  } catch (const occr::Error& e) {
    std::cerr << "occr: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "occr: " << e.what() << "\n";
    return kExitInvalid;
  }
}
