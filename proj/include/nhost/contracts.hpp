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

#include <map>
#include <optional>
#include <set>
#include <string>

#include "nhost/ledger.hpp"

namespace nhost {

// E-UTRAN cell global identity; cell_id is 28 bits.
struct Ecgi {
  std::string plmn_id;
  std::uint32_t cell_id = 0;

  static constexpr std::uint32_t kMaxCellId = (1u << 28) - 1;

  auto operator<=>(const Ecgi&) const = default;
  std::string str() const { return plmn_id + ":" + std::to_string(cell_id); }
  Json to_json() const { return Json{{"plmn", plmn_id}, {"cell_id", cell_id}}; }
  static std::optional<Ecgi> from_json(const Json& j);
};

struct TrafficReport {
  Ecgi ecgi;
  std::string ue_id;
  Tick session_start = 0;
  Tick session_end = 0;
  std::uint64_t bytes_served = 0;
};

enum class CellStatus { Active, Terminated };
const char* to_string(CellStatus s);

// One SCP<->MNO agreement for a single cell. Escrowed funds live in the
// contract's ledger balance; escrow_ mirrors it so snapshots are
// self-contained. Methods that do not expect attached value reject it.
//
// Methods (callable via ledger transactions):
//   deposit                     MNO only; amount = attached value
//   authorize_oracle            MNO only; {credential}
//   report_traffic              oracle credential; {credential, ecgi, ue,
//                               start, end, bytes}
//   bill_attachment             oracle credential; {credential, ue, duration,
//                               rate} — attachment-time billing alternative
//   withdraw                    SCP only; pays out accrued credit
//   record_infraction           MNO only; {penalty}
//   terminate                   MNO only
//   recover_funds               MNO only, after termination; {force}
class CellContract : public ContractBase {
 public:
  struct Params {
    AccountId mno;
    AccountId scp;
    Ecgi ecgi;
    Currency price_per_kb = 0;
    std::string spectrum_tag;
    std::uint32_t termination_threshold = 3;
  };

  explicit CellContract(Params p) : p_(std::move(p)) {}

  std::string kind() const override { return "cell"; }
  CallOutcome call(CallContext& ctx, const std::string& method,
                   const Json& args) override;
  Json snapshot() const override;

  const Params& params() const { return p_; }
  CellStatus status() const { return status_; }
  Currency escrow() const { return escrow_; }
  Currency accrued_credit() const { return accrued_credit_; }
  std::uint32_t infractions() const { return infractions_; }
  bool has_credential(const std::string& token) const {
    return oracle_credentials_.contains(token);
  }
  Currency total_deposits() const { return total_deposits_; }
  Currency total_credited() const { return total_credited_; }
  Currency total_withdrawn() const { return total_withdrawn_; }
  Currency total_penalties() const { return total_penalties_; }
  Currency total_refunds() const { return total_refunds_; }

  // ceil(bytes / 1024) * price, saturating at Currency max.
  static Currency credit_for_bytes(std::uint64_t bytes, Currency price_per_kb);

 private:
  CallOutcome deposit(CallContext& ctx);
  CallOutcome authorize_oracle(CallContext& ctx, const Json& args);
  CallOutcome report_traffic(CallContext& ctx, const Json& args);
  CallOutcome bill_attachment(CallContext& ctx, const Json& args);
  CallOutcome withdraw(CallContext& ctx);
  CallOutcome record_infraction(CallContext& ctx, const Json& args);
  CallOutcome terminate(CallContext& ctx);
  CallOutcome recover_funds(CallContext& ctx, const Json& args);

  // Shared tail of the two billing paths: clamp to free escrow and emit.
  CallOutcome credit_clamped(CallContext& ctx, Currency requested,
                             Json event_payload);

  Params p_;
  CellStatus status_ = CellStatus::Active;
  Currency escrow_ = 0;
  Currency accrued_credit_ = 0;
  std::uint32_t infractions_ = 0;
  std::set<std::string> oracle_credentials_;
  bool recovered_ = false;
  Currency total_deposits_ = 0;
  Currency total_credited_ = 0;
  Currency total_withdrawn_ = 0;
  Currency total_penalties_ = 0;
  Currency total_refunds_ = 0;
};

// Per-MNO registry: ECGI -> cell contract. Only the owning MNO may register
// providers; registration spawns the cell contract.
//
// Methods:
//   register_provider   owner only; {scp_account, ecgi, price_per_kb,
//                       spectrum_tag, termination_threshold?}
//   lookup              anyone; {ecgi}
class MasterContract : public ContractBase {
 public:
  explicit MasterContract(AccountId owner_mno) : owner_(owner_mno) {}

  std::string kind() const override { return "master"; }
  CallOutcome call(CallContext& ctx, const std::string& method,
                   const Json& args) override;
  Json snapshot() const override;

  AccountId owner() const { return owner_; }
  std::optional<ContractId> lookup(const Ecgi& ecgi) const;
  const std::map<Ecgi, ContractId>& registry() const { return registry_; }

 private:
  AccountId owner_;
  std::map<Ecgi, ContractId> registry_;
};

}  // namespace nhost
