#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "paychan/calls.hpp"
#include "paychan/crypto.hpp"
#include "paychan/types.hpp"

namespace paychan {

enum class EventKind : std::uint8_t { Closure, Dispute };

const char* event_kind_name(EventKind k);

struct Event {
  EventKind kind = EventKind::Closure;
  Cid cid;
  ChannelState state;
  Nonce r;
  Height block_height = 0;
  std::uint32_t index = 0;  // position within the block's event list

  bool operator==(const Event&) const = default;
};

/// Signed contract call. `from` authenticates msg.sender.
struct Tx {
  PublicKey from;
  Address to;
  Amount value = 0;
  Call call;
  Signature sig;

  /// 0x04 || from || to || value || method || args.
  Bytes signing_bytes() const;
  Digest hash() const;
};

Tx make_tx(const KeyPair& from, const Address& to, Call call, Amount value = 0);

using TxId = std::uint64_t;

enum class TxStatus : std::uint8_t { Ok, Reverted };

/// A cross-contract call that reverted without aborting its caller.
struct InnerFailure {
  Address target;
  std::string method;
  std::string reason;
};

struct Receipt {
  TxId id = 0;
  Height height = 0;
  Address from;
  Address to;
  std::string method;
  std::size_t args_bytes = 0;
  TxStatus status = TxStatus::Ok;
  std::string reason;
  std::vector<InnerFailure> inner_failures;

  bool ok() const { return status == TxStatus::Ok; }
};

struct Block {
  Height height = 0;
  Digest hash;
  Digest parent_hash;
  Digest tx_root;
  std::vector<TxId> txs;
};

/// hash = H(parent_hash || height || tx_root).
Digest block_hash(const Digest& parent, Height height, const Digest& tx_root);

/// Aborts the current call; state changes made by it are rolled back.
class Revert : public std::runtime_error {
 public:
  explicit Revert(std::string reason) : std::runtime_error(std::move(reason)) {}
  std::string_view reason() const { return what(); }
};

[[noreturn]] inline void revert(std::string_view reason) { throw Revert(std::string(reason)); }

inline void require(bool ok, std::string_view reason) {
  if (!ok) revert(reason);
}

/// Thrown by submit_tx for transactions the chain refuses outright.
class TxRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CallContext;

/// On-chain program. Instances are owned by SimChain and only mutated inside execute().
class Contract {
 public:
  virtual ~Contract() = default;
  virtual std::unique_ptr<Contract> clone() const = 0;
  /// Restores this object to `other`'s state in place (used for rollback).
  virtual void assign_from(const Contract& other) = 0;
  virtual std::string_view kind() const = 0;
  virtual void execute(CallContext& ctx, const Call& call) = 0;
};

template <class Derived>
class ContractBase : public Contract {
 public:
  std::unique_ptr<Contract> clone() const override {
    return std::make_unique<Derived>(static_cast<const Derived&>(*this));
  }
  void assign_from(const Contract& other) override {
    static_cast<Derived&>(*this) = static_cast<const Derived&>(other);
  }
};

class SimChain;

/// msg.* and platform services visible to executing contract code.
class CallContext {
 public:
  /// Height of the block being produced.
  Height now() const;
  const Address& self() const { return self_; }
  const Address& sender() const { return sender_; }
  /// Present when the caller is an external key rather than a contract.
  const std::optional<PublicKey>& sender_key() const { return sender_key_; }
  Amount value() const { return value_; }

  Amount balance_of(const Address& who) const;
  /// Moves funds out of this contract; reverts when the contract cannot cover it.
  void transfer(const Address& to, Amount amount);
  /// Synchronous call; a revert in the callee propagates.
  void call(const Address& target, const Call& call, Amount value = 0);
  /// Synchronous call whose revert is contained; returns the reason on failure.
  std::optional<std::string> try_call(const Address& target, const Call& call);
  void emit(EventKind kind, const ChannelState& state, const Nonce& r);
  /// Hashes of the most recent completed blocks, newest first.
  std::vector<Digest> recent_block_hashes(std::size_t n) const;

 private:
  friend class SimChain;
  CallContext(SimChain& chain, Address self, Address sender, std::optional<PublicKey> key, Amount value)
      : chain_(chain), self_(self), sender_(sender), sender_key_(std::move(key)), value_(value) {}

  SimChain& chain_;
  Address self_;
  Address sender_;
  std::optional<PublicKey> sender_key_;
  Amount value_;
};

struct ChainParams {
  /// Distinguishes otherwise identical chains (different genesis hash).
  std::uint64_t chain_seed = 0;
};

/// Deterministic single-chain simulator: block height is logical time, transactions
/// execute FIFO during mine_block, each atomically.
class SimChain {
 public:
  explicit SimChain(ChainParams params = {});
  SimChain(const SimChain&) = delete;
  SimChain& operator=(const SimChain&) = delete;

  /// Height of the latest block.
  Height now() const { return blocks_.back().height; }
  const std::vector<Block>& blocks() const { return blocks_; }
  const Block& tip() const { return blocks_.back(); }

  /// Installs a contract outside block production; returns its address.
  Address deploy(std::unique_ptr<Contract> contract, const Address& deployer);
  /// Genesis-style allocation to an account.
  void mint(const Address& to, Amount amount);

  TxId submit_tx(Tx tx);
  const Block& mine_block();

  std::vector<Digest> recent_block_hashes(std::size_t n) const;
  std::optional<Height> height_of(const Digest& block_hash) const;
  bool contains_block_hash(const Digest& h) const { return height_of(h).has_value(); }

  /// Events with from <= block_height <= to; optional kind filter. Throws if to > now().
  std::vector<Event> read_events(Height from, Height to, std::optional<EventKind> kind = {}) const;
  const std::vector<Event>& event_log() const { return events_; }

  const Receipt* receipt(TxId id) const;
  const std::vector<Receipt>& receipts() const { return receipts_; }
  /// Receipts of the transactions included in block `h`.
  std::vector<const Receipt*> receipts_at(Height h) const;
  std::size_t pending_tx_count() const { return queue_.size(); }

  Amount balance_of(const Address& who) const;
  const std::map<Address, Amount>& balances() const { return balances_; }
  Amount total_minted() const { return minted_; }

  const Contract* contract_at(const Address& a) const;
  template <class C>
  const C* view(const Address& a) const {
    return dynamic_cast<const C*>(contract_at(a));
  }
  bool has_contract(const Address& a) const { return contracts_.count(a) != 0; }

 private:
  friend class CallContext;

  struct Frame {
    std::map<Address, std::unique_ptr<Contract>> contract_preimages;
    std::map<Address, Amount> balance_preimages;
    std::size_t event_mark = 0;
  };

  struct Queued {
    TxId id;
    Tx tx;
  };

  Height producing_height() const { return now() + 1; }
  void begin_frame();
  void commit_frame();
  void rollback_frame();
  Contract& touch_contract(const Address& a);
  void set_balance(const Address& a, Amount v);
  void move_funds(const Address& from, const Address& to, Amount amount);
  void invoke(const Address& target, const Address& sender, const std::optional<PublicKey>& key,
              const Call& call, Amount value);
  Receipt execute(const Queued& q);

  std::vector<Block> blocks_;
  std::unordered_map<Digest, Height> height_by_hash_;
  std::map<Address, std::unique_ptr<Contract>> contracts_;
  std::map<Address, Amount> balances_;
  Amount minted_ = 0;
  std::uint64_t deploy_counter_ = 0;

  std::deque<Queued> queue_;
  TxId next_tx_id_ = 0;
  std::vector<Receipt> receipts_;
  std::vector<Event> events_;
  std::vector<Event> block_events_;
  std::vector<InnerFailure> inner_failures_;
  std::vector<Frame> frames_;
};

}  // namespace paychan
