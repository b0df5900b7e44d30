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

#include "nhost/ledger.hpp"

#include <stdexcept>

namespace nhost {

const char* to_string(ContractError e) {
  switch (e) {
    case ContractError::AccessDenied: return "AccessDenied";
    case ContractError::AlreadyRegistered: return "AlreadyRegistered";
    case ContractError::InsufficientFunds: return "InsufficientFunds";
    case ContractError::ContractTerminated: return "ContractTerminated";
    case ContractError::NotTerminated: return "NotTerminated";
    case ContractError::EcgiMismatch: return "EcgiMismatch";
    case ContractError::ZeroCredit: return "ZeroCredit";
    case ContractError::UnknownMethod: return "UnknownMethod";
    case ContractError::BadArgument: return "BadArgument";
  }
  return "Unknown";
}

const char* to_string(TxStatus s) {
  switch (s) {
    case TxStatus::Ok: return "ok";
    case TxStatus::UnknownSender: return "unknown_sender";
    case TxStatus::UnknownTarget: return "unknown_target";
    case TxStatus::BadNonce: return "bad_nonce";
    case TxStatus::InsufficientFunds: return "insufficient_funds";
    case TxStatus::CallFailed: return "call_failed";
  }
  return "unknown";
}

Currency CallContext::self_balance() const {
  return ledger_.contract_balance(self_);
}

void CallContext::emit(std::string name, Json payload) {
  pending_events_.emplace_back(std::move(name), std::move(payload));
}

bool CallContext::transfer_to_account(AccountId to, Currency amount) {
  auto slot = ledger_.contracts_.find(self_);
  if (slot == ledger_.contracts_.end() || slot->second.balance < amount)
    return false;
  auto acct = ledger_.accounts_.find(to);
  if (acct == ledger_.accounts_.end()) return false;
  slot->second.balance -= amount;
  acct->second += amount;
  return true;
}

ContractId CallContext::spawn(std::unique_ptr<ContractBase> c) {
  return ledger_.install_contract(std::move(c));
}

Ledger::Ledger(LedgerConfig cfg) : cfg_(cfg) {}

AccountId Ledger::create_account(Currency initial_balance) {
  AccountId id{next_account_++};
  accounts_[id] = initial_balance;
  minted_supply_ += initial_balance;
  return id;
}

bool Ledger::account_exists(AccountId a) const {
  return accounts_.contains(a);
}

Currency Ledger::balance(AccountId a) const {
  auto it = accounts_.find(a);
  if (it == accounts_.end())
    throw std::out_of_range("unknown account " + std::to_string(a.value));
  return it->second;
}

std::uint64_t Ledger::executed_nonce(AccountId a) const {
  auto it = executed_nonce_.find(a);
  return it == executed_nonce_.end() ? 0 : it->second;
}

ContractId Ledger::install_contract(std::unique_ptr<ContractBase> c) {
  ContractId id{next_contract_++};
  contracts_[id] = ContractSlot{std::move(c), 0};
  return id;
}

bool Ledger::contract_exists(ContractId c) const {
  return contracts_.contains(c);
}

ContractBase* Ledger::contract(ContractId c) {
  auto it = contracts_.find(c);
  return it == contracts_.end() ? nullptr : it->second.impl.get();
}

const ContractBase* Ledger::contract(ContractId c) const {
  auto it = contracts_.find(c);
  return it == contracts_.end() ? nullptr : it->second.impl.get();
}

Currency Ledger::contract_balance(ContractId c) const {
  auto it = contracts_.find(c);
  if (it == contracts_.end())
    throw std::out_of_range("unknown contract " + std::to_string(c.value));
  return it->second.balance;
}

std::vector<ContractId> Ledger::contract_ids() const {
  std::vector<ContractId> out;
  out.reserve(contracts_.size());
  for (const auto& [id, slot] : contracts_) out.push_back(id);
  return out;
}

TxId Ledger::submit_transaction(Transaction tx) {
  if (tx.args.is_null()) tx.args = Json::object();
  if (!tx.args.is_object())
    throw std::invalid_argument("transaction args must be a JSON object");
  if (std::holds_alternative<ContractId>(tx.target) && tx.method.empty())
    throw std::invalid_argument("contract transaction requires a method name");
  if (std::holds_alternative<AccountId>(tx.target) && !tx.method.empty())
    throw std::invalid_argument("account transfer cannot carry a method");
  TxId id = next_tx_++;
  pending_.emplace_back(id, std::move(tx));
  return id;
}

Transaction Ledger::make_transfer(AccountId sender, AccountId to,
                                  Currency value) {
  Transaction tx;
  tx.sender = sender;
  tx.target = to;
  tx.value = value;
  tx.fee = cfg_.flat_fee;
  tx.nonce = ++assigned_nonce_[sender];
  return tx;
}

Transaction Ledger::make_call(AccountId sender, ContractId target,
                              std::string method, Json args, Currency value) {
  Transaction tx;
  tx.sender = sender;
  tx.target = target;
  tx.method = std::move(method);
  tx.args = std::move(args);
  tx.value = value;
  tx.fee = cfg_.flat_fee;
  tx.nonce = ++assigned_nonce_[sender];
  return tx;
}

CallOutcome Ledger::call_now(AccountId sender, ContractId target,
                             std::string method, Json args, Currency value,
                             Tick now) {
  TxId id = submit_transaction(
      make_call(sender, target, std::move(method), std::move(args), value));
  const Block& b = seal_block(now);
  for (const auto& etx : b.transactions) {
    if (etx.id != id) continue;
    if (etx.status == TxStatus::Ok) return CallOutcome::success(etx.ret);
    if (etx.call_error) return CallOutcome::fail(*etx.call_error);
    return CallOutcome::fail(ContractError::BadArgument, to_string(etx.status));
  }
  return CallOutcome::fail(ContractError::BadArgument, "tx not found in block");
}

ExecutedTx Ledger::execute(TxId id, Transaction tx,
                           std::vector<EventRecord>& out, std::uint64_t height,
                           std::uint32_t& event_index) {
  ExecutedTx etx;
  etx.id = id;
  etx.tx = tx;
  etx.ret = Json::object();

  ContractId event_contract{0};
  if (auto* c = std::get_if<ContractId>(&tx.target)) event_contract = *c;

  // A failure past the nonce check consumes the nonce and the fee, like the
  // dominant chain semantics; a nonce mismatch burns the fee but leaves the
  // nonce untouched so the sender can retry.
  auto fail = [&](TxStatus status, std::optional<ContractError> err,
                  bool charge_fee) {
    etx.status = status;
    etx.call_error = err;
    auto sender = accounts_.find(tx.sender);
    if (charge_fee && sender != accounts_.end() && sender->second >= tx.fee) {
      sender->second -= tx.fee;
      fee_sink_ += tx.fee;
      if (status != TxStatus::BadNonce) executed_nonce_[tx.sender] = tx.nonce;
    }
    Json payload{{"tx_id", id},
                 {"status", to_string(status)},
                 {"sender", tx.sender.value}};
    if (err) payload["error"] = to_string(*err);
    out.push_back(EventRecord{event_contract, "TxFailed", std::move(payload),
                              height, event_index++});
    return etx;
  };

  auto sender = accounts_.find(tx.sender);
  if (sender == accounts_.end())
    return fail(TxStatus::UnknownSender, std::nullopt, false);
  std::uint64_t expected = executed_nonce_[tx.sender] + 1;
  if (tx.nonce != expected)
    return fail(TxStatus::BadNonce, std::nullopt, true);
  if (sender->second < tx.value + tx.fee)
    return fail(TxStatus::InsufficientFunds, std::nullopt, true);

  if (auto* acct = std::get_if<AccountId>(&tx.target)) {
    auto dst = accounts_.find(*acct);
    if (dst == accounts_.end())
      return fail(TxStatus::UnknownTarget, std::nullopt, true);
    sender->second -= tx.value + tx.fee;
    fee_sink_ += tx.fee;
    dst->second += tx.value;
    executed_nonce_[tx.sender] = tx.nonce;
    etx.status = TxStatus::Ok;
    return etx;
  }

  ContractId target = std::get<ContractId>(tx.target);
  auto slot = contracts_.find(target);
  if (slot == contracts_.end())
    return fail(TxStatus::UnknownTarget, std::nullopt, true);

  sender->second -= tx.value + tx.fee;
  fee_sink_ += tx.fee;
  slot->second.balance += tx.value;

  CallContext ctx(*this, tx.sender, target, tx.value);
  CallOutcome outcome = slot->second.impl->call(ctx, tx.method, tx.args);
  if (!outcome.ok()) {
    // Undo the value credit; contract code guarantees it mutated nothing.
    contracts_.find(target)->second.balance -= tx.value;
    accounts_.find(tx.sender)->second += tx.value;
    executed_nonce_[tx.sender] = tx.nonce;
    etx.status = TxStatus::CallFailed;
    etx.call_error = outcome.error;
    Json payload{{"tx_id", id},
                 {"status", to_string(TxStatus::CallFailed)},
                 {"sender", tx.sender.value},
                 {"method", tx.method},
                 {"error", to_string(*outcome.error)}};
    out.push_back(EventRecord{target, "TxFailed", std::move(payload), height,
                              event_index++});
    return etx;
  }

  executed_nonce_[tx.sender] = tx.nonce;
  etx.status = TxStatus::Ok;
  etx.ret = std::move(outcome.ret);
  for (auto& [name, payload] : ctx.pending_events_)
    out.push_back(EventRecord{target, std::move(name), std::move(payload),
                              height, event_index++});
  return etx;
}

const Block& Ledger::seal_block(Tick now) {
  Block b;
  b.height = chain_.size();
  b.parent_digest = chain_.empty() ? 0 : chain_.back().digest;
  b.timestamp = now;

  std::vector<EventRecord> block_events;
  std::uint32_t event_index = 0;
  auto queue = std::move(pending_);
  pending_.clear();
  for (auto& [id, tx] : queue)
    b.transactions.push_back(
        execute(id, std::move(tx), block_events, b.height, event_index));

  b.digest = block_digest(b);
  chain_.push_back(std::move(b));
  for (auto& e : block_events) events_.push_back(std::move(e));
  return chain_.back();
}

std::uint64_t Ledger::block_digest(const Block& b) {
  std::uint64_t h = kFnvOffset;
  h = fnv1a_u64(b.height, h);
  h = fnv1a_u64(b.parent_digest, h);
  h = fnv1a_u64(b.timestamp, h);
  for (const auto& etx : b.transactions) {
    h = fnv1a_u64(etx.id, h);
    h = fnv1a_u64(etx.tx.sender.value, h);
    if (auto* a = std::get_if<AccountId>(&etx.tx.target)) {
      h = fnv1a("a", h);
      h = fnv1a_u64(a->value, h);
    } else {
      h = fnv1a("c", h);
      h = fnv1a_u64(std::get<ContractId>(etx.tx.target).value, h);
    }
    h = fnv1a(etx.tx.method, h);
    h = fnv1a(etx.tx.args.dump(), h);
    h = fnv1a_u64(etx.tx.value, h);
    h = fnv1a_u64(etx.tx.nonce, h);
    h = fnv1a_u64(etx.tx.fee, h);
    h = fnv1a(to_string(etx.status), h);
  }
  return h;
}

std::vector<EventRecord> Ledger::events_matching(const EventFilter& f) const {
  std::vector<EventRecord> out;
  for (const auto& e : events_)
    if (f.matches(e)) out.push_back(e);
  return out;
}

Currency Ledger::total_account_balance() const {
  Currency total = 0;
  for (const auto& [id, bal] : accounts_) total += bal;
  return total;
}

Currency Ledger::total_contract_balance() const {
  Currency total = 0;
  for (const auto& [id, slot] : contracts_) total += slot.balance;
  return total;
}

bool Ledger::supply_invariant_holds() const {
  return total_account_balance() + total_contract_balance() + fee_sink_ ==
         minted_supply_;
}

bool Ledger::verify_chain() const {
  std::uint64_t parent = 0;
  for (std::size_t i = 0; i < chain_.size(); ++i) {
    const Block& b = chain_[i];
    if (b.height != i) return false;
    if (b.parent_digest != parent) return false;
    if (block_digest(b) != b.digest) return false;
    parent = b.digest;
  }
  return true;
}

Json Ledger::block_to_json(const Block& b) {
  Json txs = Json::array();
  for (const auto& etx : b.transactions) {
    Json t;
    t["id"] = etx.id;
    t["sender"] = etx.tx.sender.value;
    if (auto* a = std::get_if<AccountId>(&etx.tx.target)) {
      t["target"] = {{"kind", "account"}, {"id", a->value}};
    } else {
      t["target"] = {{"kind", "contract"},
                     {"id", std::get<ContractId>(etx.tx.target).value}};
    }
    t["method"] = etx.tx.method;
    t["args"] = etx.tx.args;
    t["value"] = etx.tx.value;
    t["nonce"] = etx.tx.nonce;
    t["fee"] = etx.tx.fee;
    t["status"] = to_string(etx.status);
    if (etx.call_error) t["error"] = to_string(*etx.call_error);
    txs.push_back(std::move(t));
  }
  Json j;
  j["height"] = b.height;
  j["parent_digest"] = hex_digest(b.parent_digest);
  j["digest"] = hex_digest(b.digest);
  j["timestamp"] = b.timestamp;
  j["transactions"] = std::move(txs);
  return j;
}

void Ledger::dump_chain(std::ostream& os) const {
  for (const Block& b : chain_) os << block_to_json(b).dump() << "\n";
}

}  // namespace nhost
