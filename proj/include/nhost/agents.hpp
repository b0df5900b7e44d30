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

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nhost/contracts.hpp"
#include "nhost/ledger.hpp"

namespace nhost {

enum class BillingMode { PerByte, PerAttachmentTime };
const char* to_string(BillingMode m);

struct ScenarioMno {
  std::string id;
  Currency endowment = 0;
};

struct ScenarioCell {
  Ecgi ecgi;
  std::string host_mno;
  Currency price_per_kb = 0;
  Currency deposit = 0;
  Currency attachment_rate_per_tick = 0;
  std::uint32_t termination_threshold = 3;
  std::string spectrum_tag;
};

struct ScenarioScp {
  std::string id;
  std::vector<ScenarioCell> cells;
};

struct ScheduleEntry {
  enum class Kind { AttachCell, AttachMacro, Detach };
  Tick tick = 0;
  Kind kind = Kind::AttachMacro;
  Ecgi ecgi;  // valid for AttachCell only
};

struct ScenarioUe {
  std::string id;
  std::string home_mno;
  std::uint64_t traffic_rate_bytes_per_tick = 0;
  double traffic_jitter = 0.0;  // fraction of rate, per-tick uniform
  double report_scale = 1.0;    // !=1.0 models a dishonest oracle
  std::vector<ScheduleEntry> schedule;
};

struct SimScenario {
  std::uint64_t seed = 0;
  Tick duration_ticks = 0;
  Tick block_interval = 10;
  Currency tx_fee = 0;
  BillingMode billing_mode = BillingMode::PerByte;
  std::uint64_t reconciliation_tolerance_bytes = 1024;
  std::vector<ScenarioMno> mnos;
  std::vector<ScenarioScp> scps;
  std::vector<ScenarioUe> ues;

  // Empty when the scenario is well-formed; otherwise one message per
  // problem found.
  std::vector<std::string> validate() const;
};

// Scenario file I/O (versioned JSON schema, see README).
SimScenario scenario_from_json(const Json& j);  // throws std::invalid_argument
Json scenario_to_json(const SimScenario& s);
SimScenario load_scenario(const std::filesystem::path& path);

struct UESession {
  std::string ue;
  Ecgi ecgi;
  Tick start_tick = 0;
  Tick end_tick = 0;
  std::uint64_t bytes = 0;
};

enum class Verdict { Match, MismatchBeyondTolerance, MissingReport };
const char* to_string(Verdict v);

struct SessionVerdict {
  std::string ue;
  Tick start_tick = 0;
  Verdict verdict = Verdict::Match;
  std::uint64_t measured_bytes = 0;
  std::uint64_t reported_bytes = 0;
};

struct ReconciliationResult {
  std::vector<SessionVerdict> sessions;
  std::uint64_t aggregate_discrepancy_bytes = 0;

  bool all_match() const {
    for (const auto& s : sessions)
      if (s.verdict != Verdict::Match) return false;
    return true;
  }
};

// Compares the SCP's own measurements against the oracle's on-chain
// reports, keyed by (ue, start_tick).
ReconciliationResult scp_verify(const std::vector<UESession>& measured,
                                const std::vector<TrafficReport>& reported,
                                std::uint64_t tolerance_bytes);

struct TraceAction {
  Tick tick = 0;
  std::string actor;
  std::string action;
  Json payload;
  Json to_json() const;
};

struct ContractAccounting {
  std::string mno;
  std::string scp;
  Ecgi ecgi;
  ContractId contract;
  Currency deposits = 0;
  Currency credited = 0;
  Currency withdrawn = 0;
  Currency penalties = 0;
  Currency refunds = 0;
  Currency escrow = 0;
  Currency accrued = 0;
};

struct SimTrace {
  std::vector<TraceAction> actions;
  Json final_snapshot;
  std::vector<ContractAccounting> summary;
  std::uint64_t digest() const;
};

// Drives the contracts through the ledger, tick by tick. Single-threaded;
// same-tick schedule entries resolve by UE id ascending (MNO and SCP
// actions are confined to setup and teardown and so never tie with them).
class Simulator {
 public:
  explicit Simulator(SimScenario s);  // throws if validate() is non-empty

  // Deploys masters, registers providers, funds escrows, authorizes the
  // per-UE oracle credentials, seals the setup block.
  void setup();

  // Manual driving, also used by run().
  void attach(const std::string& ue, const Ecgi& cell, Tick t);
  void attach_macro(const std::string& ue, Tick t);
  std::optional<TrafficReport> detach(const std::string& ue, Tick t);
  bool attached(const std::string& ue) const;
  void accrue_traffic(Tick t);
  void finish(Tick t);  // closes sessions, SCP withdrawals, final seal

  SimTrace run();

  const Ledger& ledger() const { return ledger_; }
  Ledger& ledger() { return ledger_; }
  AccountId mno_account(const std::string& id) const;
  AccountId scp_account(const std::string& id) const;
  ContractId master_contract(const std::string& mno_id) const;
  std::optional<ContractId> cell_contract(const Ecgi& ecgi) const;
  Currency total_endowment() const;

  // Truthful SCP-side measurements and the reports actually submitted,
  // for reconciliation.
  std::vector<UESession> measured_sessions(const Ecgi& ecgi) const;
  std::vector<TrafficReport> submitted_reports(const Ecgi& ecgi) const;
  std::size_t completed_metered_sessions() const { return metered_closed_; }
  std::size_t report_count() const { return reports_submitted_; }

  SimTrace result();

 private:
  struct CellInfo {
    ScenarioCell cfg;
    std::string scp_id;
    ContractId contract;
  };
  struct OpenSession {
    Tick start = 0;
    std::uint64_t bytes = 0;  // true bytes served
    bool metered = false;
    std::optional<Ecgi> ecgi;  // empty for macro attachment
  };

  const ScenarioUe& ue_cfg(const std::string& ue) const;
  void record(Tick t, std::string actor, std::string action, Json payload);
  void seal(Tick t);
  std::uint64_t tick_bytes(const ScenarioUe& ue, Tick t);

  SimScenario sc_;
  Ledger ledger_;
  std::map<std::string, AccountId> mno_accounts_;
  std::map<std::string, AccountId> scp_accounts_;
  std::map<std::string, ContractId> masters_;
  std::map<Ecgi, CellInfo> cells_;
  std::map<std::string, OpenSession> open_sessions_;
  std::map<Ecgi, std::vector<UESession>> measured_;
  std::map<Ecgi, std::vector<TrafficReport>> reported_;
  std::vector<TraceAction> actions_;
  std::size_t metered_closed_ = 0;
  std::size_t reports_submitted_ = 0;
  bool setup_done_ = false;
};

inline SimTrace run_scenario(const SimScenario& s) {
  return Simulator(s).run();
}

// Machine-readable exports used by the CLI.
void write_trace_jsonl(const SimTrace& t, std::ostream& os);
void write_accounting_csv(const SimTrace& t, std::ostream& os);

}  // namespace nhost
