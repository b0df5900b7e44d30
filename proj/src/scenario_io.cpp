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

#include <fstream>
#include <stdexcept>

#include "nhost/agents.hpp"

namespace nhost {

namespace {

constexpr int kSchemaVersion = 1;

[[noreturn]] void bad(const std::string& what) {
  throw std::invalid_argument("scenario: " + what);
}

std::uint64_t require_uint(const Json& j, const std::string& key,
                           const std::string& where) {
  if (!j.contains(key)) bad(where + ": missing '" + key + "'");
  const Json& v = j[key];
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  bad(where + ": '" + key + "' must be a non-negative integer");
}

std::string require_string(const Json& j, const std::string& key,
                           const std::string& where) {
  if (!j.contains(key) || !j[key].is_string())
    bad(where + ": missing string '" + key + "'");
  return j[key].get<std::string>();
}

Ecgi require_ecgi(const Json& j, const std::string& key,
                  const std::string& where) {
  if (!j.contains(key)) bad(where + ": missing '" + key + "'");
  auto e = Ecgi::from_json(j[key]);
  if (!e) bad(where + ": malformed ecgi in '" + key + "'");
  return *e;
}

}  // namespace

SimScenario scenario_from_json(const Json& j) {
  if (!j.is_object()) bad("root must be an object");
  if (require_uint(j, "version", "root") != kSchemaVersion)
    bad("unsupported schema version");

  SimScenario s;
  s.seed = require_uint(j, "seed", "root");
  s.duration_ticks = require_uint(j, "duration_ticks", "root");
  s.block_interval = j.contains("block_interval")
                         ? require_uint(j, "block_interval", "root")
                         : 10;
  s.tx_fee = j.contains("tx_fee") ? require_uint(j, "tx_fee", "root") : 0;
  if (j.contains("reconciliation_tolerance_bytes"))
    s.reconciliation_tolerance_bytes =
        require_uint(j, "reconciliation_tolerance_bytes", "root");

  std::string mode = j.value("billing_mode", "per_byte");
  if (mode == "per_byte") {
    s.billing_mode = BillingMode::PerByte;
  } else if (mode == "per_attachment_time") {
    s.billing_mode = BillingMode::PerAttachmentTime;
  } else {
    bad("unknown billing_mode: " + mode);
  }

  if (!j.contains("mnos") || !j["mnos"].is_array()) bad("missing mnos array");
  for (const auto& m : j["mnos"]) {
    ScenarioMno mno;
    mno.id = require_string(m, "id", "mno");
    mno.endowment = require_uint(m, "endowment", "mno " + mno.id);
    s.mnos.push_back(std::move(mno));
  }

  if (!j.contains("scps") || !j["scps"].is_array()) bad("missing scps array");
  for (const auto& p : j["scps"]) {
    ScenarioScp scp;
    scp.id = require_string(p, "id", "scp");
    if (!p.contains("cells") || !p["cells"].is_array())
      bad("scp " + scp.id + ": missing cells array");
    for (const auto& c : p["cells"]) {
      std::string where = "scp " + scp.id + " cell";
      ScenarioCell cell;
      cell.ecgi = require_ecgi(c, "ecgi", where);
      cell.host_mno = require_string(c, "host_mno", where);
      cell.price_per_kb = require_uint(c, "price_per_kb", where);
      cell.deposit = c.contains("deposit") ? require_uint(c, "deposit", where)
                                           : 0;
      if (c.contains("attachment_rate_per_tick"))
        cell.attachment_rate_per_tick =
            require_uint(c, "attachment_rate_per_tick", where);
      if (c.contains("termination_threshold"))
        cell.termination_threshold = static_cast<std::uint32_t>(
            require_uint(c, "termination_threshold", where));
      cell.spectrum_tag = c.value("spectrum_tag", "");
      scp.cells.push_back(std::move(cell));
    }
    s.scps.push_back(std::move(scp));
  }

  if (!j.contains("ues") || !j["ues"].is_array()) bad("missing ues array");
  for (const auto& u : j["ues"]) {
    ScenarioUe ue;
    ue.id = require_string(u, "id", "ue");
    std::string where = "ue " + ue.id;
    ue.home_mno = require_string(u, "home_mno", where);
    ue.traffic_rate_bytes_per_tick =
        require_uint(u, "traffic_rate_bytes_per_tick", where);
    ue.traffic_jitter = u.value("traffic_jitter", 0.0);
    ue.report_scale = u.value("report_scale", 1.0);
    if (u.contains("schedule")) {
      if (!u["schedule"].is_array()) bad(where + ": schedule must be array");
      for (const auto& e : u["schedule"]) {
        ScheduleEntry entry;
        entry.tick = require_uint(e, "tick", where + " schedule");
        if (e.contains("detach")) {
          entry.kind = ScheduleEntry::Kind::Detach;
        } else if (e.contains("attach")) {
          if (e["attach"].is_string()) {
            if (e["attach"].get<std::string>() != "macro")
              bad(where + ": attach must be an ecgi object or \"macro\"");
            entry.kind = ScheduleEntry::Kind::AttachMacro;
          } else {
            entry.kind = ScheduleEntry::Kind::AttachCell;
            auto ecgi = Ecgi::from_json(e["attach"]);
            if (!ecgi) bad(where + ": malformed attach ecgi");
            entry.ecgi = *ecgi;
          }
        } else {
          bad(where + ": schedule entry needs 'attach' or 'detach'");
        }
        ue.schedule.push_back(std::move(entry));
      }
    }
    s.ues.push_back(std::move(ue));
  }
  return s;
}

Json scenario_to_json(const SimScenario& s) {
  Json j;
  j["version"] = kSchemaVersion;
  j["seed"] = s.seed;
  j["duration_ticks"] = s.duration_ticks;
  j["block_interval"] = s.block_interval;
  j["tx_fee"] = s.tx_fee;
  j["billing_mode"] = to_string(s.billing_mode);
  j["reconciliation_tolerance_bytes"] = s.reconciliation_tolerance_bytes;
  j["mnos"] = Json::array();
  for (const auto& m : s.mnos)
    j["mnos"].push_back(Json{{"id", m.id}, {"endowment", m.endowment}});
  j["scps"] = Json::array();
  for (const auto& p : s.scps) {
    Json cells = Json::array();
    for (const auto& c : p.cells) {
      Json cell;
      cell["ecgi"] = c.ecgi.to_json();
      cell["host_mno"] = c.host_mno;
      cell["price_per_kb"] = c.price_per_kb;
      cell["deposit"] = c.deposit;
      cell["attachment_rate_per_tick"] = c.attachment_rate_per_tick;
      cell["termination_threshold"] = c.termination_threshold;
      cell["spectrum_tag"] = c.spectrum_tag;
      cells.push_back(std::move(cell));
    }
    j["scps"].push_back(Json{{"id", p.id}, {"cells", std::move(cells)}});
  }
  j["ues"] = Json::array();
  for (const auto& u : s.ues) {
    Json schedule = Json::array();
    for (const auto& e : u.schedule) {
      Json entry;
      entry["tick"] = e.tick;
      switch (e.kind) {
        case ScheduleEntry::Kind::AttachCell:
          entry["attach"] = e.ecgi.to_json();
          break;
        case ScheduleEntry::Kind::AttachMacro: entry["attach"] = "macro"; break;
        case ScheduleEntry::Kind::Detach: entry["detach"] = true; break;
      }
      schedule.push_back(std::move(entry));
    }
    Json ue;
    ue["id"] = u.id;
    ue["home_mno"] = u.home_mno;
    ue["traffic_rate_bytes_per_tick"] = u.traffic_rate_bytes_per_tick;
    ue["traffic_jitter"] = u.traffic_jitter;
    ue["report_scale"] = u.report_scale;
    ue["schedule"] = std::move(schedule);
    j["ues"].push_back(std::move(ue));
  }
  return j;
}

SimScenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " +
                                    path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::runtime_error("scenario parse error in " + path.string() +
                             ": " + e.what());
  }
  return scenario_from_json(j);
}

void write_trace_jsonl(const SimTrace& t, std::ostream& os) {
  for (const auto& a : t.actions) os << a.to_json().dump() << "\n";
  Json final_line;
  final_line["final_snapshot"] = t.final_snapshot;
  os << final_line.dump() << "\n";
}

void write_accounting_csv(const SimTrace& t, std::ostream& os) {
  os << "contract_id,mno,scp,ecgi,deposits,credited,withdrawn,penalties,"
        "refunds,escrow,accrued\n";
  for (const auto& row : t.summary) {
    os << row.contract.value << ',' << row.mno << ',' << row.scp << ','
       << row.ecgi.str() << ',' << row.deposits << ',' << row.credited << ','
       << row.withdrawn << ',' << row.penalties << ',' << row.refunds << ','
       << row.escrow << ',' << row.accrued << "\n";
  }
}

}  // namespace nhost
