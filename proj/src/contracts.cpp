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

#include "nhost/contracts.hpp"

#include <limits>

namespace nhost {

namespace {

// Accepts any non-negative JSON integer.
std::optional<std::uint64_t> get_uint(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) return std::nullopt;
  const Json& v = j[key];
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    auto s = v.get<std::int64_t>();
    if (s >= 0) return static_cast<std::uint64_t>(s);
  }
  return std::nullopt;
}

}  // namespace

const char* to_string(CellStatus s) {
  return s == CellStatus::Active ? "active" : "terminated";
}

std::optional<Ecgi> Ecgi::from_json(const Json& j) {
  if (!j.is_object() || !j.contains("plmn") || !j["plmn"].is_string())
    return std::nullopt;
  auto cell = get_uint(j, "cell_id");
  if (!cell) return std::nullopt;
  Ecgi e{j["plmn"].get<std::string>(), static_cast<std::uint32_t>(*cell)};
  if (e.plmn_id.empty() || *cell > kMaxCellId) return std::nullopt;
  return e;
}

Currency CellContract::credit_for_bytes(std::uint64_t bytes,
                                        Currency price_per_kb) {
  std::uint64_t kb = bytes / 1024 + (bytes % 1024 != 0 ? 1 : 0);
  unsigned __int128 credit =
      static_cast<unsigned __int128>(kb) * price_per_kb;
  if (credit > std::numeric_limits<Currency>::max())
    return std::numeric_limits<Currency>::max();
  return static_cast<Currency>(credit);
}

CallOutcome CellContract::call(CallContext& ctx, const std::string& method,
                               const Json& args) {
  if (method == "deposit") return deposit(ctx);
  // Every other method runs with zero attached value.
  if (ctx.value() != 0)
    return CallOutcome::fail(ContractError::BadArgument,
                             "method does not accept attached value");
  if (method == "authorize_oracle") return authorize_oracle(ctx, args);
  if (method == "report_traffic") return report_traffic(ctx, args);
  if (method == "bill_attachment") return bill_attachment(ctx, args);
  if (method == "withdraw") return withdraw(ctx);
  if (method == "record_infraction") return record_infraction(ctx, args);
  if (method == "terminate") return terminate(ctx);
  if (method == "recover_funds") return recover_funds(ctx, args);
  return CallOutcome::fail(ContractError::UnknownMethod, method);
}

CallOutcome CellContract::deposit(CallContext& ctx) {
  if (ctx.sender() != p_.mno)
    return CallOutcome::fail(ContractError::AccessDenied);
  if (status_ == CellStatus::Terminated)
    return CallOutcome::fail(ContractError::ContractTerminated);
  Currency amount = ctx.value();
  escrow_ += amount;
  total_deposits_ += amount;
  ctx.emit("Deposited", Json{{"amount", amount}, {"escrow", escrow_}});
  return CallOutcome::success(Json{{"escrow", escrow_}});
}

CallOutcome CellContract::authorize_oracle(CallContext& ctx,
                                           const Json& args) {
  if (ctx.sender() != p_.mno)
    return CallOutcome::fail(ContractError::AccessDenied);
  if (!args.contains("credential") || !args["credential"].is_string())
    return CallOutcome::fail(ContractError::BadArgument, "credential");
  std::string token = args["credential"].get<std::string>();
  if (token.empty())
    return CallOutcome::fail(ContractError::BadArgument, "empty credential");
  auto [it, inserted] = oracle_credentials_.insert(token);
  if (inserted)
    ctx.emit("OracleAuthorized", Json{{"credential", token}});
  return CallOutcome::success();
}

CallOutcome CellContract::credit_clamped(CallContext& ctx, Currency requested,
                                         Json event_payload) {
  Currency available = escrow_ - accrued_credit_;
  Currency credited = requested < available ? requested : available;
  accrued_credit_ += credited;
  total_credited_ += credited;
  event_payload["requested"] = requested;
  event_payload["credited"] = credited;
  event_payload["unfunded"] = requested - credited;
  ctx.emit("TrafficCredited", event_payload);
  return CallOutcome::success(Json{{"requested", requested},
                                   {"credited", credited},
                                   {"unfunded", requested - credited}});
}

CallOutcome CellContract::report_traffic(CallContext& ctx, const Json& args) {
  if (!args.contains("credential") || !args["credential"].is_string())
    return CallOutcome::fail(ContractError::BadArgument, "credential");
  auto ecgi = args.contains("ecgi") ? Ecgi::from_json(args["ecgi"])
                                    : std::nullopt;
  if (!ecgi) return CallOutcome::fail(ContractError::BadArgument, "ecgi");
  auto bytes_arg = get_uint(args, "bytes");
  if (!bytes_arg)
    return CallOutcome::fail(ContractError::BadArgument, "bytes");
  Tick start = args.value("start", Tick{0});
  Tick end = args.value("end", Tick{0});
  if (end < start)
    return CallOutcome::fail(ContractError::BadArgument, "session interval");
  if (!oracle_credentials_.contains(args["credential"].get<std::string>()))
    return CallOutcome::fail(ContractError::AccessDenied,
                             "unknown oracle credential");
  if (*ecgi != p_.ecgi)
    return CallOutcome::fail(ContractError::EcgiMismatch);
  if (status_ == CellStatus::Terminated)
    return CallOutcome::fail(ContractError::ContractTerminated);

  std::uint64_t bytes = *bytes_arg;
  Currency requested = credit_for_bytes(bytes, p_.price_per_kb);
  return credit_clamped(ctx, requested,
                        Json{{"mode", "per_byte"},
                             {"ecgi", p_.ecgi.str()},
                             {"ue", args.value("ue", std::string{})},
                             {"start", start},
                             {"end", end},
                             {"bytes", bytes}});
}

CallOutcome CellContract::bill_attachment(CallContext& ctx, const Json& args) {
  if (!args.contains("credential") || !args["credential"].is_string())
    return CallOutcome::fail(ContractError::BadArgument, "credential");
  auto duration_arg = get_uint(args, "duration");
  if (!duration_arg)
    return CallOutcome::fail(ContractError::BadArgument, "duration");
  auto rate_arg = get_uint(args, "rate");
  if (!rate_arg)
    return CallOutcome::fail(ContractError::BadArgument, "rate");
  if (!oracle_credentials_.contains(args["credential"].get<std::string>()))
    return CallOutcome::fail(ContractError::AccessDenied,
                             "unknown oracle credential");
  if (status_ == CellStatus::Terminated)
    return CallOutcome::fail(ContractError::ContractTerminated);

  std::uint64_t duration = *duration_arg;
  Currency rate = *rate_arg;
  unsigned __int128 wide = static_cast<unsigned __int128>(duration) * rate;
  Currency requested = wide > std::numeric_limits<Currency>::max()
                           ? std::numeric_limits<Currency>::max()
                           : static_cast<Currency>(wide);
  return credit_clamped(ctx, requested,
                        Json{{"mode", "per_attachment_time"},
                             {"ecgi", p_.ecgi.str()},
                             {"ue", args.value("ue", std::string{})},
                             {"duration", duration},
                             {"rate", rate}});
}

CallOutcome CellContract::withdraw(CallContext& ctx) {
  if (ctx.sender() != p_.scp)
    return CallOutcome::fail(ContractError::AccessDenied);
  if (accrued_credit_ == 0)
    return CallOutcome::fail(ContractError::ZeroCredit);
  Currency amount = accrued_credit_;
  if (!ctx.transfer_to_account(p_.scp, amount))
    return CallOutcome::fail(ContractError::BadArgument,
                             "payout transfer failed");
  accrued_credit_ = 0;
  escrow_ -= amount;
  total_withdrawn_ += amount;
  ctx.emit("Withdrawn", Json{{"amount", amount}, {"escrow", escrow_}});
  return CallOutcome::success(Json{{"amount", amount}});
}

CallOutcome CellContract::record_infraction(CallContext& ctx,
                                            const Json& args) {
  if (ctx.sender() != p_.mno)
    return CallOutcome::fail(ContractError::AccessDenied);
  auto penalty_arg = get_uint(args, "penalty");
  if (!penalty_arg)
    return CallOutcome::fail(ContractError::BadArgument, "penalty");
  if (status_ == CellStatus::Terminated)
    return CallOutcome::fail(ContractError::ContractTerminated);
  Currency penalty = *penalty_arg;
  Currency burned = penalty < accrued_credit_ ? penalty : accrued_credit_;
  // The detraction comes out of the SCP's accrued credit and goes back to
  // the MNO; it cannot exceed what has actually been earned.
  if (burned > 0) {
    if (!ctx.transfer_to_account(p_.mno, burned))
      return CallOutcome::fail(ContractError::BadArgument,
                               "penalty transfer failed");
    accrued_credit_ -= burned;
    escrow_ -= burned;
    total_penalties_ += burned;
  }
  infractions_ += 1;
  if (infractions_ >= p_.termination_threshold)
    status_ = CellStatus::Terminated;
  ctx.emit("Infraction", Json{{"penalty", penalty},
                              {"burned", burned},
                              {"infractions", infractions_},
                              {"status", to_string(status_)}});
  return CallOutcome::success(Json{{"burned", burned},
                                   {"infractions", infractions_},
                                   {"status", to_string(status_)}});
}

CallOutcome CellContract::terminate(CallContext& ctx) {
  if (ctx.sender() != p_.mno)
    return CallOutcome::fail(ContractError::AccessDenied);
  if (status_ == CellStatus::Terminated)
    return CallOutcome::success(Json{{"refund", 0}, {"already", true}});
  Currency refund = escrow_ - accrued_credit_;
  if (refund > 0) {
    if (!ctx.transfer_to_account(p_.mno, refund))
      return CallOutcome::fail(ContractError::BadArgument,
                               "refund transfer failed");
    escrow_ -= refund;
    total_refunds_ += refund;
  }
  status_ = CellStatus::Terminated;
  ctx.emit("Terminated",
           Json{{"refund", refund}, {"withdrawable", accrued_credit_}});
  return CallOutcome::success(Json{{"refund", refund}});
}

CallOutcome CellContract::recover_funds(CallContext& ctx, const Json& args) {
  if (ctx.sender() != p_.mno)
    return CallOutcome::fail(ContractError::AccessDenied);
  if (status_ != CellStatus::Terminated)
    return CallOutcome::fail(ContractError::NotTerminated);
  bool force = args.value("force", false);
  Currency residual = force ? escrow_ : escrow_ - accrued_credit_;
  if (residual > 0) {
    if (!ctx.transfer_to_account(p_.mno, residual))
      return CallOutcome::fail(ContractError::BadArgument,
                               "recovery transfer failed");
    escrow_ -= residual;
    total_refunds_ += residual;
    if (force) accrued_credit_ = 0;
  }
  recovered_ = true;
  ctx.emit("Recovered", Json{{"amount", residual}, {"force", force}});
  return CallOutcome::success(Json{{"amount", residual}});
}

Json CellContract::snapshot() const {
  Json creds = Json::array();
  for (const auto& t : oracle_credentials_) creds.push_back(t);
  Json j;
  j["kind"] = kind();
  j["mno"] = p_.mno.value;
  j["scp"] = p_.scp.value;
  j["ecgi"] = p_.ecgi.to_json();
  j["price_per_kb"] = p_.price_per_kb;
  j["spectrum_tag"] = p_.spectrum_tag;
  j["termination_threshold"] = p_.termination_threshold;
  j["status"] = to_string(status_);
  j["escrow"] = escrow_;
  j["accrued_credit"] = accrued_credit_;
  j["infractions"] = infractions_;
  j["oracle_credentials"] = std::move(creds);
  j["recovered"] = recovered_;
  j["total_deposits"] = total_deposits_;
  j["total_credited"] = total_credited_;
  j["total_withdrawn"] = total_withdrawn_;
  j["total_penalties"] = total_penalties_;
  j["total_refunds"] = total_refunds_;
  return j;
}

CallOutcome MasterContract::call(CallContext& ctx, const std::string& method,
                                 const Json& args) {
  if (ctx.value() != 0)
    return CallOutcome::fail(ContractError::BadArgument,
                             "method does not accept attached value");
  if (method == "register_provider") {
    if (ctx.sender() != owner_)
      return CallOutcome::fail(ContractError::AccessDenied);
    auto ecgi = args.contains("ecgi") ? Ecgi::from_json(args["ecgi"])
                                      : std::nullopt;
    if (!ecgi) return CallOutcome::fail(ContractError::BadArgument, "ecgi");
    auto scp_arg = get_uint(args, "scp_account");
    if (!scp_arg)
      return CallOutcome::fail(ContractError::BadArgument, "scp_account");
    auto price_arg = get_uint(args, "price_per_kb");
    if (!price_arg)
      return CallOutcome::fail(ContractError::BadArgument, "price_per_kb");
    if (registry_.contains(*ecgi))
      return CallOutcome::fail(ContractError::AlreadyRegistered, ecgi->str());

    CellContract::Params p;
    p.mno = owner_;
    p.scp = AccountId{*scp_arg};
    p.ecgi = *ecgi;
    p.price_per_kb = *price_arg;
    p.spectrum_tag = args.value("spectrum_tag", std::string{});
    p.termination_threshold =
        args.value("termination_threshold", std::uint32_t{3});
    ContractId cell = ctx.spawn(std::make_unique<CellContract>(p));
    registry_[*ecgi] = cell;
    ctx.emit("ContractSpawned", Json{{"ecgi", ecgi->str()},
                                     {"cell_contract", cell.value},
                                     {"scp", p.scp.value},
                                     {"price_per_kb", p.price_per_kb},
                                     {"spectrum_tag", p.spectrum_tag}});
    return CallOutcome::success(Json{{"cell_contract", cell.value}});
  }
  if (method == "lookup") {
    auto ecgi = args.contains("ecgi") ? Ecgi::from_json(args["ecgi"])
                                      : std::nullopt;
    if (!ecgi) return CallOutcome::fail(ContractError::BadArgument, "ecgi");
    auto it = registry_.find(*ecgi);
    Json ret;
    if (it == registry_.end())
      ret["cell_contract"] = nullptr;
    else
      ret["cell_contract"] = it->second.value;
    return CallOutcome::success(std::move(ret));
  }
  return CallOutcome::fail(ContractError::UnknownMethod, method);
}

std::optional<ContractId> MasterContract::lookup(const Ecgi& ecgi) const {
  auto it = registry_.find(ecgi);
  if (it == registry_.end()) return std::nullopt;
  return it->second;
}

Json MasterContract::snapshot() const {
  Json entries = Json::array();
  for (const auto& [ecgi, cell] : registry_)
    entries.push_back(Json{{"ecgi", ecgi.to_json()},
                           {"cell_contract", cell.value}});
  Json j;
  j["kind"] = kind();
  j["owner"] = owner_.value;
  j["registry"] = std::move(entries);
  return j;
}

}  // namespace nhost
