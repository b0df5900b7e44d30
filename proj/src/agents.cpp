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

#include "nhost/agents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nhost/rng.hpp"

namespace nhost {

namespace {

std::string oracle_credential(const std::string& ue_id) {
  return "cred-" + ue_id;
}

}  // namespace

const char* to_string(BillingMode m) {
  return m == BillingMode::PerByte ? "per_byte" : "per_attachment_time";
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Match: return "match";
    case Verdict::MismatchBeyondTolerance: return "mismatch_beyond_tolerance";
    case Verdict::MissingReport: return "missing_report";
  }
  return "unknown";
}

std::vector<std::string> SimScenario::validate() const {
  std::vector<std::string> errors;
  std::set<std::string> mno_ids, scp_ids, ue_ids;
  std::set<Ecgi> ecgis;

  for (const auto& m : mnos) {
    if (m.id.empty()) errors.push_back("mno with empty id");
    if (!mno_ids.insert(m.id).second)
      errors.push_back("duplicate mno id: " + m.id);
  }
  for (const auto& s : scps) {
    if (s.id.empty()) errors.push_back("scp with empty id");
    if (!scp_ids.insert(s.id).second)
      errors.push_back("duplicate scp id: " + s.id);
    for (const auto& c : s.cells) {
      if (!mno_ids.contains(c.host_mno))
        errors.push_back("cell " + c.ecgi.str() + " hosts unknown mno: " +
                         c.host_mno);
      if (c.ecgi.cell_id > Ecgi::kMaxCellId)
        errors.push_back("cell id exceeds 28 bits: " + c.ecgi.str());
      if (!ecgis.insert(c.ecgi).second)
        errors.push_back("duplicate ecgi: " + c.ecgi.str());
    }
  }
  for (const auto& u : ues) {
    if (u.id.empty()) errors.push_back("ue with empty id");
    if (!ue_ids.insert(u.id).second)
      errors.push_back("duplicate ue id: " + u.id);
    if (!mno_ids.contains(u.home_mno))
      errors.push_back("ue " + u.id + " has unknown home mno: " + u.home_mno);
    if (u.report_scale < 0)
      errors.push_back("ue " + u.id + " has negative report_scale");
    if (u.traffic_jitter < 0 || u.traffic_jitter > 1)
      errors.push_back("ue " + u.id + " jitter outside [0,1]");
    Tick prev = 0;
    bool first = true;
    for (const auto& e : u.schedule) {
      if (!first && e.tick <= prev)
        errors.push_back("ue " + u.id +
                         " schedule not strictly increasing at tick " +
                         std::to_string(e.tick));
      first = false;
      prev = e.tick;
      if (e.tick >= duration_ticks)
        errors.push_back("ue " + u.id + " schedule tick " +
                         std::to_string(e.tick) + " beyond duration");
      if (e.kind == ScheduleEntry::Kind::AttachCell &&
          !ecgis.contains(e.ecgi))
        errors.push_back("ue " + u.id + " schedule references unknown cell " +
                         e.ecgi.str());
    }
  }
  if (block_interval == 0) errors.push_back("block_interval must be positive");
  return errors;
}

ReconciliationResult scp_verify(const std::vector<UESession>& measured,
                                const std::vector<TrafficReport>& reported,
                                std::uint64_t tolerance_bytes) {
  std::map<std::pair<std::string, Tick>, std::uint64_t> by_key;
  for (const auto& r : reported)
    by_key[{r.ue_id, r.session_start}] = r.bytes_served;

  ReconciliationResult result;
  for (const auto& s : measured) {
    SessionVerdict v;
    v.ue = s.ue;
    v.start_tick = s.start_tick;
    v.measured_bytes = s.bytes;
    auto it = by_key.find({s.ue, s.start_tick});
    if (it == by_key.end()) {
      v.verdict = Verdict::MissingReport;
      v.reported_bytes = 0;
      result.aggregate_discrepancy_bytes += s.bytes;
    } else {
      v.reported_bytes = it->second;
      std::uint64_t diff = s.bytes > it->second ? s.bytes - it->second
                                                : it->second - s.bytes;
      v.verdict = diff <= tolerance_bytes ? Verdict::Match
                                          : Verdict::MismatchBeyondTolerance;
      result.aggregate_discrepancy_bytes += diff;
    }
    result.sessions.push_back(std::move(v));
  }
  return result;
}

Json TraceAction::to_json() const {
  Json j;
  j["tick"] = tick;
  j["actor"] = actor;
  j["action"] = action;
  j["payload"] = payload;
  return j;
}

std::uint64_t SimTrace::digest() const {
  std::uint64_t h = kFnvOffset;
  for (const auto& a : actions) h = fnv1a(a.to_json().dump(), h);
  h = fnv1a(final_snapshot.dump(), h);
  return h;
}

Simulator::Simulator(SimScenario s)
    : sc_(std::move(s)), ledger_(LedgerConfig{sc_.tx_fee}) {
  auto errors = sc_.validate();
  if (!errors.empty()) {
    std::string msg = "invalid scenario:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }
}

void Simulator::record(Tick t, std::string actor, std::string action,
                       Json payload) {
  actions_.push_back(
      TraceAction{t, std::move(actor), std::move(action), std::move(payload)});
}

void Simulator::seal(Tick t) {
  const Block& b = ledger_.seal_block(t);
  record(t, "ledger", "seal_block",
         Json{{"height", b.height}, {"tx_count", b.transactions.size()}});
}

void Simulator::setup() {
  if (setup_done_) throw std::logic_error("setup() called twice");

  for (const auto& m : sc_.mnos) {
    mno_accounts_[m.id] = ledger_.create_account(m.endowment);
    masters_[m.id] =
        ledger_.install_contract(std::make_unique<MasterContract>(
            mno_accounts_[m.id]));
    record(0, m.id, "deploy_master",
           Json{{"master", masters_[m.id].value},
                {"endowment", m.endowment}});
  }
  for (const auto& s : sc_.scps) scp_accounts_[s.id] = ledger_.create_account(0);

  // Provider registrations, all in the first block.
  for (const auto& s : sc_.scps) {
    for (const auto& c : s.cells) {
      AccountId mno = mno_accounts_.at(c.host_mno);
      ledger_.submit_transaction(ledger_.make_call(
          mno, masters_.at(c.host_mno), "register_provider",
          Json{{"scp_account", scp_accounts_.at(s.id).value},
               {"ecgi", c.ecgi.to_json()},
               {"price_per_kb", c.price_per_kb},
               {"spectrum_tag", c.spectrum_tag},
               {"termination_threshold", c.termination_threshold}}));
      record(0, s.id, "register_provider",
             Json{{"ecgi", c.ecgi.str()},
                  {"host_mno", c.host_mno},
                  {"price_per_kb", c.price_per_kb}});
    }
  }
  seal(0);

  for (const auto& s : sc_.scps) {
    for (const auto& c : s.cells) {
      auto* master = ledger_.contract_as<MasterContract>(
          masters_.at(c.host_mno));
      auto cell = master->lookup(c.ecgi);
      if (!cell) throw std::logic_error("registration failed for " +
                                        c.ecgi.str());
      cells_[c.ecgi] = CellInfo{c, s.id, *cell};
    }
  }

  // Escrow deposits and oracle credentials, second block.
  for (const auto& [ecgi, info] : cells_) {
    AccountId mno = mno_accounts_.at(info.cfg.host_mno);
    if (info.cfg.deposit > 0) {
      ledger_.submit_transaction(ledger_.make_call(
          mno, info.contract, "deposit", Json::object(), info.cfg.deposit));
      record(0, info.cfg.host_mno, "deposit",
             Json{{"ecgi", ecgi.str()}, {"amount", info.cfg.deposit}});
    }
    for (const auto& u : sc_.ues) {
      if (u.home_mno != info.cfg.host_mno) continue;
      ledger_.submit_transaction(ledger_.make_call(
          mno, info.contract, "authorize_oracle",
          Json{{"credential", oracle_credential(u.id)}}));
      record(0, info.cfg.host_mno, "authorize_oracle",
             Json{{"ecgi", ecgi.str()}, {"ue", u.id}});
    }
  }
  seal(0);
  setup_done_ = true;
}

const ScenarioUe& Simulator::ue_cfg(const std::string& ue) const {
  for (const auto& u : sc_.ues)
    if (u.id == ue) return u;
  throw std::out_of_range("unknown ue: " + ue);
}

void Simulator::attach(const std::string& ue, const Ecgi& cell, Tick t) {
  if (open_sessions_.contains(ue))
    throw std::logic_error("ue " + ue + " already attached");
  const ScenarioUe& cfg = ue_cfg(ue);
  // The monitoring service queries the home operator's master registry; an
  // unregistered (or foreign) cell attaches unmetered.
  auto master_it = masters_.find(cfg.home_mno);
  bool metered = false;
  if (master_it != masters_.end()) {
    auto* master = ledger_.contract_as<MasterContract>(master_it->second);
    metered = master->lookup(cell).has_value();
  }
  open_sessions_[ue] = OpenSession{t, 0, metered, cell};
  record(t, ue, "ue_attach",
         Json{{"ecgi", cell.str()}, {"metered", metered}});
}

void Simulator::attach_macro(const std::string& ue, Tick t) {
  if (open_sessions_.contains(ue))
    throw std::logic_error("ue " + ue + " already attached");
  open_sessions_[ue] = OpenSession{t, 0, false, std::nullopt};
  record(t, ue, "ue_attach", Json{{"ecgi", "macro"}, {"metered", false}});
}

bool Simulator::attached(const std::string& ue) const {
  return open_sessions_.contains(ue);
}

std::optional<TrafficReport> Simulator::detach(const std::string& ue, Tick t) {
  auto it = open_sessions_.find(ue);
  if (it == open_sessions_.end())
    throw std::logic_error("ue " + ue + " is not attached");
  OpenSession session = it->second;
  open_sessions_.erase(it);

  record(t, ue, "ue_detach",
         Json{{"ecgi", session.ecgi ? session.ecgi->str() : "macro"},
              {"metered", session.metered},
              {"bytes", session.bytes}});
  if (!session.metered) return std::nullopt;

  const ScenarioUe& cfg = ue_cfg(ue);
  const CellInfo& info = cells_.at(*session.ecgi);
  ++metered_closed_;
  measured_[*session.ecgi].push_back(
      UESession{ue, *session.ecgi, session.start, t, session.bytes});

  std::uint64_t reported_bytes = static_cast<std::uint64_t>(
      std::llround(static_cast<double>(session.bytes) * cfg.report_scale));
  TrafficReport report{*session.ecgi, ue, session.start, t, reported_bytes};
  AccountId sender = mno_accounts_.at(cfg.home_mno);

  if (sc_.billing_mode == BillingMode::PerByte) {
    ledger_.submit_transaction(ledger_.make_call(
        sender, info.contract, "report_traffic",
        Json{{"credential", oracle_credential(ue)},
             {"ecgi", session.ecgi->to_json()},
             {"ue", ue},
             {"start", session.start},
             {"end", t},
             {"bytes", reported_bytes}}));
    reported_[*session.ecgi].push_back(report);
    record(t, ue, "report_traffic",
           Json{{"ecgi", session.ecgi->str()}, {"bytes", reported_bytes}});
  } else {
    ledger_.submit_transaction(ledger_.make_call(
        sender, info.contract, "bill_attachment",
        Json{{"credential", oracle_credential(ue)},
             {"ue", ue},
             {"duration", t - session.start},
             {"rate", info.cfg.attachment_rate_per_tick}}));
    record(t, ue, "bill_attachment",
           Json{{"ecgi", session.ecgi->str()},
                {"duration", t - session.start}});
  }
  ++reports_submitted_;
  return report;
}

std::uint64_t Simulator::tick_bytes(const ScenarioUe& ue, Tick t) {
  if (ue.traffic_jitter == 0.0) return ue.traffic_rate_bytes_per_tick;
  std::uint64_t key = fnv1a_u64(t, fnv1a(ue.id, fnv1a_u64(sc_.seed)));
  DetRng rng(key);
  double factor = 1.0 + ue.traffic_jitter * (2.0 * rng.next_unit() - 1.0);
  double bytes = static_cast<double>(ue.traffic_rate_bytes_per_tick) * factor;
  return bytes <= 0 ? 0 : static_cast<std::uint64_t>(std::llround(bytes));
}

void Simulator::accrue_traffic(Tick t) {
  for (auto& [ue, session] : open_sessions_)
    session.bytes += tick_bytes(ue_cfg(ue), t);
}

void Simulator::finish(Tick t) {
  std::vector<std::string> attached_ues;
  for (const auto& [ue, session] : open_sessions_) attached_ues.push_back(ue);
  std::sort(attached_ues.begin(), attached_ues.end());
  for (const auto& ue : attached_ues) detach(ue, t);
  seal(t);

  // SCPs withdraw at scenario end.
  for (const auto& s : sc_.scps) {
    for (const auto& c : s.cells) {
      const CellInfo& info = cells_.at(c.ecgi);
      auto* cell = ledger_.contract_as<CellContract>(info.contract);
      if (cell->accrued_credit() == 0) continue;
      ledger_.submit_transaction(ledger_.make_call(
          scp_accounts_.at(s.id), info.contract, "withdraw", Json::object()));
      record(t, s.id, "withdraw", Json{{"ecgi", c.ecgi.str()}});
    }
  }
  seal(t);
}

SimTrace Simulator::run() {
  setup();
  for (Tick t = 0; t < sc_.duration_ticks; ++t) {
    // Same-tick entries resolve by UE id ascending; sc_.ues keeps scenario
    // order, so collect and sort.
    std::vector<std::pair<std::string, const ScheduleEntry*>> due;
    for (const auto& u : sc_.ues)
      for (const auto& e : u.schedule)
        if (e.tick == t) due.emplace_back(u.id, &e);
    std::sort(due.begin(), due.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [ue, entry] : due) {
      if (attached(ue)) detach(ue, t);
      switch (entry->kind) {
        case ScheduleEntry::Kind::AttachCell: attach(ue, entry->ecgi, t); break;
        case ScheduleEntry::Kind::AttachMacro: attach_macro(ue, t); break;
        case ScheduleEntry::Kind::Detach: break;
      }
    }
    accrue_traffic(t);
    if ((t + 1) % sc_.block_interval == 0) seal(t);
  }
  finish(sc_.duration_ticks);
  return result();
}

AccountId Simulator::mno_account(const std::string& id) const {
  return mno_accounts_.at(id);
}

AccountId Simulator::scp_account(const std::string& id) const {
  return scp_accounts_.at(id);
}

ContractId Simulator::master_contract(const std::string& mno_id) const {
  return masters_.at(mno_id);
}

std::optional<ContractId> Simulator::cell_contract(const Ecgi& ecgi) const {
  auto it = cells_.find(ecgi);
  if (it == cells_.end()) return std::nullopt;
  return it->second.contract;
}

Currency Simulator::total_endowment() const {
  Currency total = 0;
  for (const auto& m : sc_.mnos) total += m.endowment;
  return total;
}

std::vector<UESession> Simulator::measured_sessions(const Ecgi& ecgi) const {
  auto it = measured_.find(ecgi);
  return it == measured_.end() ? std::vector<UESession>{} : it->second;
}

std::vector<TrafficReport> Simulator::submitted_reports(
    const Ecgi& ecgi) const {
  auto it = reported_.find(ecgi);
  return it == reported_.end() ? std::vector<TrafficReport>{} : it->second;
}

SimTrace Simulator::result() {
  SimTrace trace;
  trace.actions = actions_;

  Json accounts = Json::object();
  for (const auto& [id, acct] : mno_accounts_)
    accounts[id] = ledger_.balance(acct);
  for (const auto& [id, acct] : scp_accounts_)
    accounts[id] = ledger_.balance(acct);

  Json contracts = Json::object();
  for (ContractId id : ledger_.contract_ids())
    contracts[std::to_string(id.value)] = ledger_.contract(id)->snapshot();

  Json snap;
  snap["accounts"] = std::move(accounts);
  snap["contracts"] = std::move(contracts);
  snap["fee_sink"] = ledger_.fee_sink();
  snap["minted_supply"] = ledger_.minted_supply();
  snap["chain_height"] = ledger_.chain().size();
  trace.final_snapshot = std::move(snap);

  for (const auto& [ecgi, info] : cells_) {
    auto* cell = ledger_.contract_as<CellContract>(info.contract);
    ContractAccounting row;
    row.mno = info.cfg.host_mno;
    row.scp = info.scp_id;
    row.ecgi = ecgi;
    row.contract = info.contract;
    row.deposits = cell->total_deposits();
    row.credited = cell->total_credited();
    row.withdrawn = cell->total_withdrawn();
    row.penalties = cell->total_penalties();
    row.refunds = cell->total_refunds();
    row.escrow = cell->escrow();
    row.accrued = cell->accrued_credit();
    trace.summary.push_back(std::move(row));
  }
  return trace;
}

}  // namespace nhost
