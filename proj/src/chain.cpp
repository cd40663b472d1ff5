#include "paychan/chain.hpp"

#include <algorithm>

namespace paychan {

const char* event_kind_name(EventKind k) { return k == EventKind::Closure ? "Closure" : "Dispute"; }

Bytes Tx::signing_bytes() const {
  Bytes out;
  out.push_back(static_cast<std::uint8_t>(SigTag::Transaction));
  append(out, from.view());
  append(out, to.view());
  append_u128(out, value);
  auto name = method_name(call);
  out.push_back(static_cast<std::uint8_t>(name.size()));
  out.insert(out.end(), name.begin(), name.end());
  append(out, encode_args(call));
  return out;
}

Digest Tx::hash() const {
  auto bytes = signing_bytes();
  return Hasher().update(bytes).update(sig.view()).finish();
}

Tx make_tx(const KeyPair& from, const Address& to, Call call, Amount value) {
  Tx tx{from.public_key, to, value, std::move(call), {}};
  tx.sig = sign(from, tx.signing_bytes());
  return tx;
}

Digest block_hash(const Digest& parent, Height height, const Digest& tx_root) {
  return Hasher().update(parent.view()).update_u64(height).update(tx_root.view()).finish();
}

// --- CallContext -----------------------------------------------------------

Height CallContext::now() const { return chain_.producing_height(); }

Amount CallContext::balance_of(const Address& who) const { return chain_.balance_of(who); }

void CallContext::transfer(const Address& to, Amount amount) { chain_.move_funds(self_, to, amount); }

void CallContext::call(const Address& target, const Call& call, Amount value) {
  chain_.begin_frame();
  try {
    chain_.invoke(target, self_, std::nullopt, call, value);
  } catch (const Revert&) {
    chain_.rollback_frame();
    throw;
  }
  chain_.commit_frame();
}

std::optional<std::string> CallContext::try_call(const Address& target, const Call& call) {
  try {
    this->call(target, call);
  } catch (const Revert& r) {
    chain_.inner_failures_.push_back({target, std::string(method_name(call)), std::string(r.reason())});
    return std::string(r.reason());
  }
  return std::nullopt;
}

void CallContext::emit(EventKind kind, const ChannelState& state, const Nonce& r) {
  Event e{kind, self_, state, r, chain_.producing_height(),
          static_cast<std::uint32_t>(chain_.block_events_.size())};
  chain_.block_events_.push_back(e);
}

std::vector<Digest> CallContext::recent_block_hashes(std::size_t n) const {
  return chain_.recent_block_hashes(n);
}

// --- SimChain --------------------------------------------------------------

SimChain::SimChain(ChainParams params) {
  Block genesis;
  genesis.height = 0;
  genesis.tx_root = Hasher().update("paychan/genesis/").update_u64(params.chain_seed).finish();
  genesis.hash = block_hash(genesis.parent_hash, 0, genesis.tx_root);
  height_by_hash_.emplace(genesis.hash, 0);
  blocks_.push_back(std::move(genesis));
}

Address SimChain::deploy(std::unique_ptr<Contract> contract, const Address& deployer) {
  Digest d = Hasher().update("paychan/deploy/").update(deployer.view()).update_u64(deploy_counter_++).finish();
  Address addr = Address::from(ByteView(d.bytes.data() + 12, 20));
  contracts_.emplace(addr, std::move(contract));
  return addr;
}

void SimChain::mint(const Address& to, Amount amount) {
  balances_[to] += amount;
  minted_ += amount;
}

TxId SimChain::submit_tx(Tx tx) {
  if (!has_contract(tx.to)) throw TxRejected("unknown target address " + to_hex(tx.to));
  if (!verify(tx.from, tx.signing_bytes(), tx.sig)) throw TxRejected("bad transaction signature");
  TxId id = next_tx_id_++;
  queue_.push_back({id, std::move(tx)});
  return id;
}

const Block& SimChain::mine_block() {
  Block b;
  b.height = producing_height();
  b.parent_hash = tip().hash;

  Hasher root;
  root.update("paychan/txroot/");
  while (!queue_.empty()) {
    Queued q = std::move(queue_.front());
    queue_.pop_front();
    root.update(q.tx.hash().view());
    b.txs.push_back(q.id);
    receipts_.push_back(execute(q));
  }
  b.tx_root = root.finish();
  b.hash = block_hash(b.parent_hash, b.height, b.tx_root);

  events_.insert(events_.end(), block_events_.begin(), block_events_.end());
  block_events_.clear();
  height_by_hash_.emplace(b.hash, b.height);
  blocks_.push_back(std::move(b));
  return blocks_.back();
}

Receipt SimChain::execute(const Queued& q) {
  Receipt rc;
  rc.id = q.id;
  rc.height = producing_height();
  rc.from = address_of(q.tx.from);
  rc.to = q.tx.to;
  rc.method = std::string(method_name(q.tx.call));
  rc.args_bytes = encode_args(q.tx.call).size();
  inner_failures_.clear();

  begin_frame();
  try {
    invoke(q.tx.to, rc.from, q.tx.from, q.tx.call, q.tx.value);
    commit_frame();
  } catch (const Revert& r) {
    rollback_frame();
    rc.status = TxStatus::Reverted;
    rc.reason = std::string(r.reason());
  }
  rc.inner_failures = std::move(inner_failures_);
  inner_failures_.clear();
  return rc;
}

void SimChain::invoke(const Address& target, const Address& sender, const std::optional<PublicKey>& key,
                      const Call& call, Amount value) {
  auto it = contracts_.find(target);
  require(it != contracts_.end(), "unknown-contract");
  if (value > 0) move_funds(sender, target, value);
  Contract& c = touch_contract(target);
  CallContext ctx(*this, target, sender, key, value);
  c.execute(ctx, call);
}

void SimChain::begin_frame() {
  Frame f;
  f.event_mark = block_events_.size();
  frames_.push_back(std::move(f));
}

void SimChain::commit_frame() {
  Frame done = std::move(frames_.back());
  frames_.pop_back();
  if (frames_.empty()) return;
  // The child's pre-images are the parent's too unless the parent already holds an older one.
  Frame& parent = frames_.back();
  for (auto& [addr, pre] : done.contract_preimages) parent.contract_preimages.try_emplace(addr, std::move(pre));
  for (auto& [addr, amount] : done.balance_preimages) parent.balance_preimages.try_emplace(addr, amount);
}

void SimChain::rollback_frame() {
  Frame& f = frames_.back();
  for (auto& [addr, pre] : f.contract_preimages) contracts_.at(addr)->assign_from(*pre);
  for (auto& [addr, amount] : f.balance_preimages) balances_[addr] = amount;
  block_events_.resize(f.event_mark);
  frames_.pop_back();
}

Contract& SimChain::touch_contract(const Address& a) {
  Contract& live = *contracts_.at(a);
  if (!frames_.empty()) {
    auto& pre = frames_.back().contract_preimages;
    if (pre.find(a) == pre.end()) pre.emplace(a, live.clone());
  }
  return live;
}

void SimChain::set_balance(const Address& a, Amount v) {
  if (!frames_.empty()) frames_.back().balance_preimages.try_emplace(a, balance_of(a));
  balances_[a] = v;
}

void SimChain::move_funds(const Address& from, const Address& to, Amount amount) {
  if (amount == 0) return;
  Amount have = balance_of(from);
  require(have >= amount, "insufficient-funds");
  set_balance(from, have - amount);
  set_balance(to, balance_of(to) + amount);
}

std::vector<Digest> SimChain::recent_block_hashes(std::size_t n) const {
  std::vector<Digest> out;
  const std::size_t count = std::min(n, blocks_.size());
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(blocks_[blocks_.size() - 1 - i].hash);
  return out;
}

std::optional<Height> SimChain::height_of(const Digest& h) const {
  auto it = height_by_hash_.find(h);
  if (it == height_by_hash_.end()) return std::nullopt;
  return it->second;
}

std::vector<Event> SimChain::read_events(Height from, Height to, std::optional<EventKind> kind) const {
  if (from > to || to > now()) throw std::out_of_range("read_events: range beyond current height");
  auto first = std::lower_bound(events_.begin(), events_.end(), from,
                                [](const Event& e, Height h) { return e.block_height < h; });
  std::vector<Event> out;
  for (auto it = first; it != events_.end() && it->block_height <= to; ++it)
    if (!kind || it->kind == *kind) out.push_back(*it);
  return out;
}

const Receipt* SimChain::receipt(TxId id) const {
  return id < receipts_.size() ? &receipts_[id] : nullptr;
}

std::vector<const Receipt*> SimChain::receipts_at(Height h) const {
  std::vector<const Receipt*> out;
  if (h >= blocks_.size()) return out;
  for (TxId id : blocks_[h].txs) out.push_back(&receipts_[id]);
  return out;
}

Amount SimChain::balance_of(const Address& who) const {
  auto it = balances_.find(who);
  return it == balances_.end() ? 0 : it->second;
}

const Contract* SimChain::contract_at(const Address& a) const {
  auto it = contracts_.find(a);
  return it == contracts_.end() ? nullptr : it->second.get();
}

}  // namespace paychan
