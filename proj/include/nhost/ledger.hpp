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
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "nhost/common.hpp"

namespace nhost {

using Json = nlohmann::ordered_json;

enum class ContractError {
  AccessDenied,
  AlreadyRegistered,
  InsufficientFunds,
  ContractTerminated,
  NotTerminated,
  EcgiMismatch,
  ZeroCredit,
  UnknownMethod,
  BadArgument,
};

const char* to_string(ContractError e);

struct CallOutcome {
  std::optional<ContractError> error;
  Json ret;
  std::string detail;

  bool ok() const { return !error.has_value(); }
  static CallOutcome success(Json ret = Json::object()) {
    return CallOutcome{std::nullopt, std::move(ret), {}};
  }
  static CallOutcome fail(ContractError e, std::string detail = {}) {
    return CallOutcome{e, Json::object(), std::move(detail)};
  }
};

using TxTarget = std::variant<AccountId, ContractId>;
using TxId = std::uint64_t;

struct Transaction {
  AccountId sender;
  TxTarget target;
  std::string method;  // empty for a plain value transfer
  Json args = Json::object();
  Currency value = 0;
  std::uint64_t nonce = 0;
  Currency fee = 0;
};

enum class TxStatus {
  Ok,
  UnknownSender,
  UnknownTarget,
  BadNonce,
  InsufficientFunds,
  CallFailed,
};

const char* to_string(TxStatus s);

struct ExecutedTx {
  TxId id = 0;
  Transaction tx;
  TxStatus status = TxStatus::Ok;
  std::optional<ContractError> call_error;
  Json ret;  // contract call return value, empty object otherwise
};

struct Block {
  std::uint64_t height = 0;
  std::uint64_t parent_digest = 0;
  std::uint64_t digest = 0;
  Tick timestamp = 0;
  std::vector<ExecutedTx> transactions;
};

struct EventRecord {
  ContractId contract;  // {0} for ledger-level events (e.g. tx failures)
  std::string name;
  Json payload;
  std::uint64_t block_height = 0;
  std::uint32_t index_in_block = 0;
};

struct EventFilter {
  std::optional<ContractId> contract;
  std::optional<std::string> name;

  bool matches(const EventRecord& e) const {
    if (contract && e.contract != *contract) return false;
    if (name && e.name != *name) return false;
    return true;
  }
};

class Ledger;
class CallContext;

// Installed contracts implement this. Contract code must validate every
// precondition before touching any state (its own fields or the context):
// the ledger does not snapshot contract state, so a failing call must not
// have mutated anything.
class ContractBase {
 public:
  virtual ~ContractBase() = default;
  virtual std::string kind() const = 0;
  virtual CallOutcome call(CallContext& ctx, const std::string& method,
                           const Json& args) = 0;
  // Full state as JSON with stable key order, for exports and
  // state-unchanged assertions.
  virtual Json snapshot() const = 0;
};

class CallContext {
 public:
  AccountId sender() const { return sender_; }
  ContractId self() const { return self_; }
  Currency value() const { return value_; }
  Currency self_balance() const;

  // Buffered until the call succeeds; dropped if it fails.
  void emit(std::string name, Json payload);

  // Moves funds out of the contract's balance. Returns false if the balance
  // is insufficient (the caller should have checked).
  bool transfer_to_account(AccountId to, Currency amount);

  // Installs a new contract owned by the ledger; only call after all
  // validation has passed.
  ContractId spawn(std::unique_ptr<ContractBase> c);

 private:
  friend class Ledger;
  CallContext(Ledger& ledger, AccountId sender, ContractId self,
              Currency value)
      : ledger_(ledger), sender_(sender), self_(self), value_(value) {}

  Ledger& ledger_;
  AccountId sender_;
  ContractId self_;
  Currency value_;
  std::vector<std::pair<std::string, Json>> pending_events_;
};

struct LedgerConfig {
  Currency flat_fee = 0;  // charged per transaction, burned into fee_sink
};

// Minimal deterministic chain: a single honest sequencer executes the
// pending queue in FIFO order at each seal_block. Failed transactions burn
// their fee only and never abort the block.
class Ledger {
 public:
  explicit Ledger(LedgerConfig cfg = {});
  Ledger(const Ledger&) = delete;
  Ledger& operator=(const Ledger&) = delete;

  // Accounts. Minting happens only here.
  AccountId create_account(Currency initial_balance);
  bool account_exists(AccountId a) const;
  Currency balance(AccountId a) const;  // throws std::out_of_range if unknown
  std::uint64_t executed_nonce(AccountId a) const;

  // Contracts.
  ContractId install_contract(std::unique_ptr<ContractBase> c);
  bool contract_exists(ContractId c) const;
  ContractBase* contract(ContractId c);
  const ContractBase* contract(ContractId c) const;
  template <typename T>
  T* contract_as(ContractId c) {
    return dynamic_cast<T*>(contract(c));
  }
  template <typename T>
  const T* contract_as(ContractId c) const {
    return dynamic_cast<const T*>(contract(c));
  }
  Currency contract_balance(ContractId c) const;
  std::vector<ContractId> contract_ids() const;

  // Transactions.
  TxId submit_transaction(Transaction tx);  // throws std::invalid_argument
  std::size_t pending_count() const { return pending_.size(); }
  const Block& seal_block(Tick now);

  // Builders that fill in nonce and the configured flat fee.
  Transaction make_transfer(AccountId sender, AccountId to, Currency value);
  Transaction make_call(AccountId sender, ContractId target,
                        std::string method, Json args, Currency value = 0);

  // Submit one call, seal immediately, return its outcome. Test/driver
  // convenience; uses the same execution path as seal_block.
  CallOutcome call_now(AccountId sender, ContractId target, std::string method,
                       Json args, Currency value = 0, Tick now = 0);

  // Reads.
  const std::vector<Block>& chain() const { return chain_; }
  const std::vector<EventRecord>& events() const { return events_; }
  std::vector<EventRecord> events_matching(const EventFilter& f) const;
  Currency fee_sink() const { return fee_sink_; }
  Currency minted_supply() const { return minted_supply_; }
  Currency total_account_balance() const;
  Currency total_contract_balance() const;
  bool supply_invariant_holds() const;
  bool verify_chain() const;  // parent digests link and contents re-hash

  // JSON-lines export, one block per line, stable field order.
  void dump_chain(std::ostream& os) const;
  static Json block_to_json(const Block& b);

 private:
  friend class CallContext;

  struct ContractSlot {
    std::unique_ptr<ContractBase> impl;
    Currency balance = 0;
  };

  ExecutedTx execute(TxId id, Transaction tx, std::vector<EventRecord>& out,
                     std::uint64_t height, std::uint32_t& event_index);
  static std::uint64_t block_digest(const Block& b);

  LedgerConfig cfg_;
  std::uint64_t next_account_ = 1;
  std::uint64_t next_contract_ = 1;
  std::uint64_t next_tx_ = 1;
  std::map<AccountId, Currency> accounts_;
  std::map<AccountId, std::uint64_t> executed_nonce_;
  std::map<AccountId, std::uint64_t> assigned_nonce_;
  std::map<ContractId, ContractSlot> contracts_;
  std::vector<std::pair<TxId, Transaction>> pending_;
  std::vector<Block> chain_;
  std::vector<EventRecord> events_;
  Currency fee_sink_ = 0;
  Currency minted_supply_ = 0;
};

}  // namespace nhost
