// Copyright 2026 The nhsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Acceptance suite: one criterion per function, one pass/fail line each.
// argv[1] is the path to the nhsim CLI binary (used by the determinism
// criterion). Exits nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "nhost/agents.hpp"
#include "nhost/contracts.hpp"
#include "nhost/coverage.hpp"
#include "nhost/ledger.hpp"
#include "nhost/rng.hpp"
#include "scenario_gen.hpp"

using namespace nhost;
namespace fs = std::filesystem;

namespace {

std::string g_cli_bin;
int g_failures = 0;

struct Check {
  bool ok = true;
  std::string why;
  void require(bool cond, const std::string& msg) {
    if (!cond && ok) {
      ok = false;
      why = msg;
    }
  }
};

void run_criterion(int number, const std::string& title, double budget_s,
                   const std::function<void(Check&)>& body) {
  Check c;
  auto start = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.require(false, std::string("exception: ") + e.what());
  }
  double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  if (budget_s > 0 && elapsed > budget_s)
    c.require(false, "exceeded time budget of " + std::to_string(budget_s) +
                         " s");
  std::printf("[%s] criterion %2d: %s (%.2f s)%s%s\n",
              c.ok ? "PASS" : "FAIL", number, title.c_str(), elapsed,
              c.ok ? "" : " -- ", c.ok ? "" : c.why.c_str());
  std::fflush(stdout);
  if (!c.ok) ++g_failures;
}

// --- shared fixtures ------------------------------------------------------

struct ContractRig {
  Ledger ledger;
  AccountId mno, scp, stranger;
  ContractId master, cell;
  Ecgi ecgi{"mno1", 101};

  explicit ContractRig(Currency mno_funds = 1'000'000,
                       Currency flat_fee = 0)
      : ledger(LedgerConfig{flat_fee}) {
    mno = ledger.create_account(mno_funds);
    scp = ledger.create_account(0);
    stranger = ledger.create_account(10'000);
    master = ledger.install_contract(std::make_unique<MasterContract>(mno));
    auto out = ledger.call_now(mno, master, "register_provider",
                               Json{{"scp_account", scp.value},
                                    {"ecgi", ecgi.to_json()},
                                    {"price_per_kb", 2},
                                    {"spectrum_tag", "GAA"}});
    cell = ContractId{out.ret["cell_contract"].get<std::uint64_t>()};
  }

  CellContract* cell_state() { return ledger.contract_as<CellContract>(cell); }
};

// Independent brute-force billing oracle: ceil-to-KB in a subtraction loop,
// then multiply by price and clamp to the remaining escrow.
std::uint64_t kb_ceil_loop(std::uint64_t bytes) {
  std::uint64_t kb = 0;
  while (bytes > 0) {
    bytes -= bytes < 1024 ? bytes : 1024;
    ++kb;
  }
  return kb;
}

SimScenario one_cell_scenario(std::uint64_t rate, Tick attach, Tick detach,
                              Tick duration) {
  SimScenario s;
  s.seed = 1;
  s.duration_ticks = duration;
  s.block_interval = 10;
  s.mnos = {{"mno1", 1'000'000}};
  ScenarioCell cell;
  cell.ecgi = Ecgi{"mno1", 101};
  cell.host_mno = "mno1";
  cell.price_per_kb = 2;
  cell.deposit = 500'000;
  cell.attachment_rate_per_tick = 5;
  s.scps = {{"scp1", {cell}}};
  ScenarioUe ue;
  ue.id = "ue1";
  ue.home_mno = "mno1";
  ue.traffic_rate_bytes_per_tick = rate;
  ue.schedule = {{attach, ScheduleEntry::Kind::AttachCell, cell.ecgi},
                 {detach, ScheduleEntry::Kind::Detach, {}}};
  s.ues = {ue};
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  std::string cmd = g_cli_bin + " " + args + " >/dev/null 2>&1";
  return WEXITSTATUS(std::system(cmd.c_str()));
}

// --- criteria -------------------------------------------------------------

void c1_ledger_conservation(Check& c) {
  DetRng rng(1001);
  for (int seq = 0; seq < 1000; ++seq) {
    ContractRig rig(100'000 + rng.next_below(900'000),
                    /*flat_fee=*/rng.next_below(3));
    std::vector<AccountId> accounts{rig.mno, rig.scp, rig.stranger};
    rig.ledger.call_now(rig.mno, rig.cell, "authorize_oracle",
                        Json{{"credential", "tok"}});
    int txs = 4 + static_cast<int>(rng.next_below(8));
    for (int i = 0; i < txs; ++i) {
      AccountId from = accounts[rng.next_below(accounts.size())];
      switch (rng.next_below(4)) {
        case 0:  // plain transfer, sometimes an overdraft
          rig.ledger.submit_transaction(rig.ledger.make_transfer(
              from, accounts[rng.next_below(accounts.size())],
              rng.next_below(200'000)));
          break;
        case 1:
          rig.ledger.submit_transaction(rig.ledger.make_call(
              from, rig.cell, "deposit", Json::object(),
              rng.next_below(50'000)));
          break;
        case 2:
          rig.ledger.submit_transaction(rig.ledger.make_call(
              from, rig.cell, "report_traffic",
              Json{{"credential", "tok"},
                   {"ecgi", rig.ecgi.to_json()},
                   {"ue", "ue1"},
                   {"start", i},
                   {"end", i + 1},
                   {"bytes", rng.next_below(100'000)}}));
          break;
        default:
          rig.ledger.submit_transaction(rig.ledger.make_call(
              from, rig.cell, "withdraw", Json::object()));
          break;
      }
      if (rng.next_below(3) == 0) {
        rig.ledger.seal_block(i);
        c.require(rig.ledger.supply_invariant_holds(),
                  "supply invariant broke mid-sequence " +
                      std::to_string(seq));
      }
    }
    rig.ledger.seal_block(99);
    c.require(rig.ledger.supply_invariant_holds(),
              "supply invariant broke after final block of sequence " +
                  std::to_string(seq));
    if (!c.ok) return;
  }
}

void c2_access_control(Check& c) {
  ContractRig rig;
  rig.ledger.call_now(rig.mno, rig.cell, "deposit", Json::object(), 10'000);
  rig.ledger.call_now(rig.mno, rig.cell, "authorize_oracle",
                      Json{{"credential", "tok"}});

  struct Attempt {
    const char* method;
    Json args;
    std::vector<AccountId> unauthorized;
  };
  std::vector<Attempt> attempts = {
      {"deposit", Json::object(), {rig.scp, rig.stranger}},
      {"authorize_oracle", Json{{"credential", "x"}},
       {rig.scp, rig.stranger}},
      {"report_traffic",
       Json{{"credential", "nope"}, {"ecgi", rig.ecgi.to_json()},
            {"ue", "u"}, {"start", 0}, {"end", 1}, {"bytes", 1}},
       {rig.mno, rig.scp, rig.stranger}},
      {"bill_attachment",
       Json{{"credential", "nope"}, {"duration", 1}, {"rate", 1}},
       {rig.mno, rig.scp, rig.stranger}},
      {"withdraw", Json::object(), {rig.mno, rig.stranger}},
      {"record_infraction", Json{{"penalty", 1}}, {rig.scp, rig.stranger}},
      {"terminate", Json::object(), {rig.scp, rig.stranger}},
      {"recover_funds", Json::object(), {rig.scp, rig.stranger}},
  };
  for (const auto& a : attempts) {
    for (AccountId caller : a.unauthorized) {
      Json before = rig.cell_state()->snapshot();
      auto out = rig.ledger.call_now(caller, rig.cell, a.method, a.args);
      c.require(out.error == ContractError::AccessDenied,
                std::string(a.method) + ": expected AccessDenied");
      c.require(rig.cell_state()->snapshot() == before,
                std::string(a.method) + ": state changed on denied call");
    }
  }
  // Master contract registration is owner-gated too.
  Json before = rig.ledger.contract(rig.master)->snapshot();
  auto out = rig.ledger.call_now(rig.stranger, rig.master,
                                 "register_provider",
                                 Json{{"scp_account", rig.scp.value},
                                      {"ecgi", Ecgi{"mno1", 999}.to_json()},
                                      {"price_per_kb", 1},
                                      {"spectrum_tag", ""}});
  c.require(out.error == ContractError::AccessDenied,
            "register_provider: expected AccessDenied for stranger");
  c.require(rig.ledger.contract(rig.master)->snapshot() == before,
            "register_provider: master state changed on denied call");
}

void c3_billing_oracle(Check& c) {
  DetRng rng(3003);
  for (int seq = 0; seq < 500; ++seq) {
    ContractRig rig(10'000'000);
    Currency escrow = rng.next_below(200'000);
    rig.ledger.call_now(rig.mno, rig.cell, "deposit", Json::object(), escrow);
    rig.ledger.call_now(rig.mno, rig.cell, "authorize_oracle",
                        Json{{"credential", "tok"}});
    Currency expected = 0;
    Currency remaining = escrow;
    int reports = 1 + static_cast<int>(rng.next_below(12));
    for (int i = 0; i < reports; ++i) {
      std::uint64_t bytes = rng.next_below(3'000'000);
      rig.ledger.call_now(rig.mno, rig.cell, "report_traffic",
                          Json{{"credential", "tok"},
                               {"ecgi", rig.ecgi.to_json()},
                               {"ue", "ue1"},
                               {"start", i},
                               {"end", i + 1},
                               {"bytes", bytes}});
      Currency want = kb_ceil_loop(bytes) * 2;  // price_per_kb = 2
      Currency credit = want < remaining ? want : remaining;
      expected += credit;
      remaining -= credit;
    }
    c.require(rig.cell_state()->total_credited() == expected,
              "credited total diverged from the brute-force oracle in "
              "sequence " + std::to_string(seq));
    if (!c.ok) return;
  }
}

void c4_end_to_end_conservation(Check& c) {
  DetRng rng(4004);
  for (int trial = 0; trial < 12; ++trial) {
    SimScenario s = testgen::random_scenario(rng, 5, 20, 200);
    Simulator sim(s);
    sim.run();
    c.require(sim.ledger().supply_invariant_holds(),
              "ledger supply invariant failed in trial " +
                  std::to_string(trial));
    Currency balances = 0;
    for (const auto& m : s.mnos)
      balances += sim.ledger().balance(sim.mno_account(m.id));
    for (const auto& p : s.scps)
      balances += sim.ledger().balance(sim.scp_account(p.id));
    c.require(sim.total_endowment() ==
                  balances + sim.ledger().total_contract_balance() +
                      sim.ledger().fee_sink(),
              "endowment != balances + escrows + fee sink in trial " +
                  std::to_string(trial));
    if (!c.ok) return;
  }
}

void c5_topology(Check& c) {
  SimScenario s;
  s.seed = 5;
  s.duration_ticks = 10;
  s.mnos = {{"mnoA", 500'000}, {"mnoB", 500'000}};
  auto mk = [](const std::string& mno, std::uint32_t id) {
    ScenarioCell cell;
    cell.ecgi = Ecgi{mno, id};
    cell.host_mno = mno;
    cell.price_per_kb = 1;
    cell.deposit = 1'000;
    return cell;
  };
  s.scps = {{"scpBlue", {mk("mnoA", 1), mk("mnoB", 2)}},
            {"scpRed", {mk("mnoA", 3), mk("mnoB", 4)}}};
  Simulator sim(s);
  sim.setup();

  int masters = 0, cells = 0;
  for (ContractId id : sim.ledger().contract_ids()) {
    const auto* k = sim.ledger().contract(id);
    if (k->kind() == "master") ++masters;
    if (k->kind() == "cell") ++cells;
  }
  c.require(masters == 2, "expected exactly 2 master contracts, got " +
                              std::to_string(masters));
  c.require(cells == 4, "expected exactly 4 cell contracts, got " +
                            std::to_string(cells));

  auto check_pair = [&](const Ecgi& e, const std::string& mno,
                        const std::string& scp) {
    auto cid = sim.cell_contract(e);
    if (!cid) {
      c.require(false, "missing cell contract for " + e.str());
      return;
    }
    const auto* cell = sim.ledger().contract_as<const CellContract>(*cid);
    c.require(cell->params().mno == sim.mno_account(mno),
              e.str() + ": wrong MNO association");
    c.require(cell->params().scp == sim.scp_account(scp),
              e.str() + ": wrong SCP association");
  };
  check_pair(Ecgi{"mnoA", 1}, "mnoA", "scpBlue");
  check_pair(Ecgi{"mnoB", 2}, "mnoB", "scpBlue");
  check_pair(Ecgi{"mnoA", 3}, "mnoA", "scpRed");
  check_pair(Ecgi{"mnoB", 4}, "mnoB", "scpRed");
}

void c6_coverage_monotonicity(Check& c) {
  DetRng rng(6006);
  ChannelModel m = ChannelModel::defaults();
  for (int trial = 0; trial < 50; ++trial) {
    std::uint64_t seed = rng.next_u64();
    Deployment base = generate_synthetic_deployment(
        1 + rng.next_below(4), rng.next_below(8), 0.5, 500.0, 500.0, seed);
    Deployment aug = base;
    Deployment extra = generate_synthetic_deployment(
        0, 1 + rng.next_below(10), 1.0, 500.0, 500.0, seed ^ 0x5eed);
    for (auto& s : extra.sites) {
      s.id = "aug-" + s.id;
      aug.sites.push_back(s);
    }
    RssGrid g0 = rss_map(base, m, 25.0, seed);
    RssGrid g1 = rss_map(aug, m, 25.0, seed);
    for (std::size_t i = 0; i < g0.rss_dbm.size(); ++i)
      if (g1.rss_dbm[i] < g0.rss_dbm[i]) {
        c.require(false, "augmented grid dipped below baseline in trial " +
                             std::to_string(trial));
        return;
      }
  }
}

void c7_pathloss_spot_check(Check& c) {
  ChannelModel quiet = ChannelModel::defaults();
  quiet.macro.shadow_sigma_db = 0.0;
  quiet.small.shadow_sigma_db = 0.0;

  Site macro{"m", 0, 0, Tier::Macro, 46.0, "macro"};
  double rss_100m = site_rss_dbm(macro, quiet, 100.0, 0.0, 1);
  c.require(std::abs(rss_100m - (-44.5)) <= 0.01,
            "macro RSS at 100 m is " + std::to_string(rss_100m) +
                " dBm, expected -44.5 +/- 0.01");

  Site small{"s", 0, 0, Tier::Small, 24.0, "chain"};
  double peak = site_rss_dbm(small, quiet, 0.0, 0.0, 1);
  c.require(std::abs(peak - (-42.0)) <= 0.1,
            "calibrated small-cell peak RSS is " + std::to_string(peak) +
                " dBm, expected -42.0 +/- 0.1");
}

void c8_scenario_ordering(Check& c) {
  ChannelModel m = ChannelModel::defaults();
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Deployment all =
        generate_synthetic_deployment(5, 40, 0.3, 1000.0, 1000.0, seed);
    Deployment baseline, chain;
    baseline.width_m = chain.width_m = 1000.0;
    baseline.height_m = chain.height_m = 1000.0;
    for (const auto& s : all.sites) {
      if (s.tier == Tier::Macro) {
        baseline.sites.push_back(s);
        chain.sites.push_back(s);
      } else if (s.tag == "chain") {
        chain.sites.push_back(s);
      }
    }
    RssGrid g_base = rss_map(baseline, m, 5.0, seed);
    RssGrid g_chain = rss_map(chain, m, 5.0, seed);
    RssGrid g_all = rss_map(all, m, 5.0, seed);
    ScenarioComparison vs_chain = compare_scenarios(g_base, g_chain);
    ScenarioComparison vs_all = compare_scenarios(g_base, g_all);

    c.require(vs_chain.mean_gain_db > 0.0,
              "chain-augmented mean gain not positive for seed " +
                  std::to_string(seed));
    c.require(vs_all.mean_gain_db > vs_chain.mean_gain_db,
              "all-augmented mean gain did not exceed chain-augmented for "
              "seed " + std::to_string(seed));
    c.require(vs_chain.improved_points > 0 &&
                  static_cast<double>(vs_all.improved_points) /
                          static_cast<double>(vs_chain.improved_points) >
                      1.0,
              "improved-point ratio (all/chain) not > 1 for seed " +
                  std::to_string(seed));
    if (!c.ok) return;
  }
}

void c9_cli_determinism(Check& c) {
  fs::path dir = fs::temp_directory_path() / "nhsim_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);

  std::ofstream(dir / "scenario.json") << R"({
    "version": 1, "seed": 9, "duration_ticks": 60, "block_interval": 10,
    "billing_mode": "per_byte",
    "mnos": [{"id": "mno1", "endowment": 1000000}],
    "scps": [{"id": "scp1", "cells": [
      {"ecgi": {"plmn": "mno1", "cell_id": 101},
       "host_mno": "mno1", "price_per_kb": 2, "deposit": 50000}]}],
    "ues": [{"id": "ue1", "home_mno": "mno1",
             "traffic_rate_bytes_per_tick": 4096, "traffic_jitter": 0.2,
             "schedule": [{"tick": 0,
                           "attach": {"plmn": "mno1", "cell_id": 101}},
                          {"tick": 50, "detach": true}]}]
  })";

  std::string scen = (dir / "scenario.json").string();
  c.require(run_cli("sim run " + scen + " --out-dir " +
                    (dir / "sim_a").string()) == 0,
            "first sim run failed");
  c.require(run_cli("sim run " + scen + " --out-dir " +
                    (dir / "sim_b").string()) == 0,
            "second sim run failed");
  for (const char* name : {"trace.jsonl", "accounting.csv"}) {
    std::string a = slurp(dir / "sim_a" / name);
    c.require(!a.empty() && a == slurp(dir / "sim_b" / name),
              std::string(name) + " differs between identical sim runs");
  }

  std::string cov = "coverage compare --seed 9 --resolution-m 25 --macros 3 "
                    "--smalls 16 --chain-fraction 0.5 --width-m 500 "
                    "--height-m 500 --out-dir ";
  c.require(run_cli(cov + (dir / "cov_a").string()) == 0,
            "first coverage compare failed");
  c.require(run_cli(cov + (dir / "cov_b").string()) == 0,
            "second coverage compare failed");
  for (const char* name :
       {"grid_baseline.csv", "grid_chain.csv", "grid_all.csv",
        "cdf_baseline.csv", "cdf_chain.csv", "cdf_all.csv", "stats.csv"}) {
    std::string a = slurp(dir / "cov_a" / name);
    std::uint64_t da = fnv1a(a);
    std::uint64_t db = fnv1a(slurp(dir / "cov_b" / name));
    c.require(!a.empty() && da == db,
              std::string(name) +
                  " digest differs between identical coverage runs");
  }
}

void c10_reconciliation(Check& c) {
  Ecgi ecgi{"mno1", 101};
  {
    SimScenario s = one_cell_scenario(10'000, 0, 50, 60);
    Simulator sim(s);
    sim.run();
    auto r = scp_verify(sim.measured_sessions(ecgi),
                        sim.submitted_reports(ecgi), 1'024);
    c.require(!r.sessions.empty() && r.all_match(),
              "truthful trace did not reconcile clean");
  }
  int flagged = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    SimScenario s = one_cell_scenario(10'000, 0, 50, 60);
    s.seed = 1000 + trial;
    s.ues[0].traffic_jitter = 0.2;
    s.ues[0].report_scale = 1.05;
    Simulator sim(s);
    sim.run();
    auto r = scp_verify(sim.measured_sessions(ecgi),
                        sim.submitted_reports(ecgi), 1'024);
    bool caught = false;
    for (const auto& v : r.sessions)
      caught = caught || v.verdict == Verdict::MismatchBeyondTolerance;
    if (caught) ++flagged;
  }
  c.require(flagged == 100, "dishonest oracle flagged in only " +
                                std::to_string(flagged) + "/100 trials");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path-to-nhsim-binary>\n";
    return 2;
  }
  g_cli_bin = argv[1];

  run_criterion(1, "ledger conservation over 1000 random tx sequences", 5.0,
                c1_ledger_conservation);
  run_criterion(2, "access-control matrix leaves state bit-identical", 1.0,
                c2_access_control);
  run_criterion(3, "billing equals brute-force oracle on 500 sequences", 0,
                c3_billing_oracle);
  run_criterion(4, "end-to-end conservation on random scenarios", 30.0,
                c4_end_to_end_conservation);
  run_criterion(5, "two-MNO/two-SCP topology: 2 masters, 4 cells", 0,
                c5_topology);
  run_criterion(6, "coverage monotonicity on 50 random deployments", 0,
                c6_coverage_monotonicity);
  run_criterion(7, "pathloss spot checks (-44.5 dBm, calibrated -42 dBm)", 0,
                c7_pathloss_spot_check);
  run_criterion(8, "scenario ordering: all > chain > baseline, 10 seeds",
                60.0, c8_scenario_ordering);
  run_criterion(9, "CLI determinism: byte-identical reruns", 0,
                c9_cli_determinism);
  run_criterion(10, "reconciliation catches a 5% inflating oracle", 0,
                c10_reconciliation);

  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
