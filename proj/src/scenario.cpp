#include "paychan/scenario.hpp"

#include <algorithm>
#include <deque>
#include <exception>
#include <filesystem>
#include <set>

#include "paychan/offchain.hpp"
#include "paychan/tower_contract.hpp"
#include "paychan/watchtower.hpp"

namespace paychan {

using nlohmann::json;

namespace {

constexpr int kTraceVersion = 1;

std::string dec(u128 v) { return u128_to_string(v); }

json state_json(const ChannelState& s) {
  return {{"bal_a", dec(s.bal_a)}, {"bal_b", dec(s.bal_b)}, {"idx", dec(s.idx)}};
}

json outcome_json(const ChannelOutcome& o) {
  json j;
  j["cid"] = to_hex(o.cid);
  j["deposit_a"] = dec(o.deposit_a);
  j["deposit_b"] = dec(o.deposit_b);
  j["latest"] = state_json(o.latest);
  j["close_height"] = o.close_height ? json(*o.close_height) : json(nullptr);
  j["payout_height"] = o.payout_height ? json(*o.payout_height) : json(nullptr);
  j["final_state"] = o.final_state ? state_json(*o.final_state) : json(nullptr);
  j["paid_a"] = dec(o.paid_a);
  j["paid_b"] = dec(o.paid_b);
  j["tower_refund"] = dec(o.tower_refund);
  j["responded"] = o.responded ? json(*o.responded) : json(nullptr);
  j["perc"] = to_string(o.perc);
  j["close_freshness"] = o.close_freshness ? json(freshness_name(*o.close_freshness)) : json(nullptr);
  return j;
}

struct PartyActor {
  std::string name;
  Role role;
  KeyPair key;
  Address addr;
  NonceSource nonces;
  std::vector<Interval> offline;
  std::deque<Bytes> inbox;
  std::optional<Index> disputed_idx;
  std::optional<Height> last_payout_round;
  bool adversarial = false;

  PartyActor(std::string n, Role r, std::uint64_t seed, std::vector<Interval> off)
      : name(std::move(n)),
        role(r),
        key(KeyPair::derive("party/" + name, seed)),
        addr(address_of(key.public_key)),
        nonces(seed, "party/" + name),
        offline(std::move(off)) {}

  bool online(Height h) const { return !any_contains(offline, h); }
};

struct ChannelRun {
  std::size_t index = 0;
  const ChannelScript* script = nullptr;
  Address cid;
  PartyActor a;
  PartyActor b;
  std::optional<PartyLedger> ledger_a, ledger_b;
  std::optional<AssertionLedger> assert_a, assert_b;
  std::size_t next_payment = 0;
  std::vector<Height> payment_rounds;
  std::optional<TxId> close_tx;
  std::optional<Height> close_height;
  std::optional<Height> payout_height;
  bool challenge_resolved = false;
  std::optional<TxId> challenge_tx;
  std::optional<PaymentProposal> intercepted_proposal;
  bool replayed = false;

  ChannelRun(std::size_t i, const ChannelScript& s, std::uint64_t seed)
      : index(i),
        script(&s),
        a("A" + std::to_string(i), Role::A, seed, s.offline_a),
        b("B" + std::to_string(i), Role::B, seed, s.offline_b) {}

  PartyActor& party(Role r) { return r == Role::A ? a : b; }
  PartyLedger& ledger(Role r) { return r == Role::A ? *ledger_a : *ledger_b; }
  AssertionLedger& assertions(Role r) { return r == Role::A ? *assert_a : *assert_b; }
  Index latest_idx() const {
    if (ledger_a) return std::max(ledger_a->latest().state.idx, ledger_b->latest().state.idx);
    if (assert_a) return std::max(assert_a->latest().state.idx, assert_b->latest().state.idx);
    return 0;
  }
  ChannelState latest_state() const {
    if (ledger_a)
      return ledger_a->latest().state.idx >= ledger_b->latest().state.idx ? ledger_a->latest().state
                                                                           : ledger_b->latest().state;
    if (assert_a)
      return assert_a->latest().state.idx >= assert_b->latest().state.idx ? assert_a->latest().state
                                                                          : assert_b->latest().state;
    return {script->deposit_a, script->deposit_b, 0};
  }
};

struct InboxItem {
  Bytes wire;
  bool adversarial = false;
};

class Runner {
 public:
  Runner(const ScenarioConfig& cfg, const ScenarioHooks& hooks)
      : cfg_(cfg),
        hooks_(hooks),
        chain_(ChainParams{cfg.seed}),
        wt_key_(KeyPair::derive("watchtower", cfg.seed)),
        adv_key_(KeyPair::derive("adversary", cfg.seed)) {}

  RunTrace run();

 private:
  bool watchtower_mode() const { return cfg_.mode == Mode::Watchtower; }
  WatchtowerConfig watchtower_config() const;
  void deploy();
  void setup_round(Height h);
  void init_ledgers(ChannelRun& ch);
  void watchtower_round(Height h);
  void adversary_round(Height h);
  void party_round(ChannelRun& ch, Height h);
  void drain_inbox(ChannelRun& ch, PartyActor& p);
  void pay(ChannelRun& ch, const ScriptedPayment& p, Height h);
  void close(ChannelRun& ch, Height h);
  void monitor_channel(ChannelRun& ch, PartyActor& p, Height h);
  void monitor_assertions(ChannelRun& ch, PartyActor& p, Height h);
  bool payout_duty(ChannelRun& ch, const PartyActor& p, Height h) const;
  void deliver_to_watchtower(ChannelRun& ch, Bytes wire);
  void deliver_receipt(const WatchtowerReceipt& r);
  void after_block(const Block& b);
  bool settled(const ChannelRun& ch) const;
  void finish();
  TxId submit(const std::string& actor, const KeyPair& key, const Address& to, Call call, Amount value = 0);
  void act(json a) { round_actions_.push_back(std::move(a)); }
  void violation(std::string msg) { trace_.violations.push_back(std::move(msg)); }
  bool paid_out(const ChannelRun& ch) const;

  const ScenarioConfig& cfg_;
  const ScenarioHooks& hooks_;
  SimChain chain_;
  KeyPair wt_key_;
  KeyPair adv_key_;
  std::optional<Watchtower> wt_;
  Address tower_;
  std::vector<ChannelRun> channels_;
  std::map<Cid, std::size_t> by_cid_;
  std::deque<InboxItem> wt_inbox_;
  std::vector<Interval> wt_offline_;
  std::set<TxId> adversary_txs_;
  std::set<TxId> update_txs_;
  std::map<Cid, std::vector<Bytes>> intercepted_;
  std::optional<std::uint64_t> tampered_counter_;
  std::set<Height> restarts_;
  json round_actions_ = json::array();
  Height last_scripted_ = 2;
  Height max_height_ = 0;
  RunTrace trace_;
};

WatchtowerConfig Runner::watchtower_config() const {
  WatchtowerConfig wc;
  wc.period = cfg_.period;
  wc.eager = cfg_.eager_updates;
  wc.offline = wt_offline_;
  if (cfg_.snapshot_path) wc.snapshot_path = *cfg_.snapshot_path;
  return wc;
}

TxId Runner::submit(const std::string& actor, const KeyPair& key, const Address& to, Call call, Amount value) {
  json a{{"actor", actor}, {"act", "tx"}, {"method", std::string(method_name(call))}, {"to", to_hex(to)}};
  if (value > 0) a["value"] = dec(value);
  const TxId id = chain_.submit_tx(make_tx(key, to, std::move(call), value));
  a["id"] = id;
  act(std::move(a));
  return id;
}

void Runner::deploy() {
  if (watchtower_mode()) {
    tower_ = chain_.deploy(std::make_unique<TowerContract>(wt_key_.public_key), address_of(wt_key_.public_key));
  }
  FreshnessPolicy policy = cfg_.freshness;
  policy.failsafe = cfg_.timeouts.failsafe;
  channels_.reserve(cfg_.channels.size());
  for (std::size_t i = 0; i < cfg_.channels.size(); ++i) {
    channels_.emplace_back(i, cfg_.channels[i], cfg_.seed);
    ChannelRun& ch = channels_.back();
    if (watchtower_mode())
      ch.cid = chain_.deploy(std::make_unique<ChannelContract>(cfg_.timeouts), ch.a.addr);
    else
      ch.cid = chain_.deploy(std::make_unique<AssertionChannelContract>(policy), ch.a.addr);
    by_cid_[ch.cid] = i;
    chain_.mint(ch.a.addr, ch.script->deposit_a);
    chain_.mint(ch.b.addr, ch.script->deposit_b + (watchtower_mode() ? ch.script->tower_fee : 0));
    if (cfg_.adversary == Strategy::StaleCloser && ch.script->close) ch.party(ch.script->close->by).adversarial = true;
  }
}

void Runner::setup_round(Height h) {
  for (auto& ch : channels_) {
    const ChannelScript& s = *ch.script;
    if (h == 0) {
      if (watchtower_mode())
        submit(ch.a.name, ch.a.key, ch.cid, calls::ChannelSetup{tower_, wt_key_.public_key}, s.deposit_a);
      else
        submit(ch.a.name, ch.a.key, ch.cid, calls::AssertionSetup{}, s.deposit_a);
    } else if (h == 1) {
      if (watchtower_mode()) {
        submit(ch.b.name, ch.b.key, ch.cid, calls::ChannelDeposit{}, s.deposit_b);
        if (s.tower_fee > 0) submit(ch.b.name, ch.b.key, tower_, calls::TowerDeposit{ch.cid}, s.tower_fee);
        wt_->enroll(ch.cid, ch.a.key.public_key, ch.b.key.public_key);
      } else {
        submit(ch.b.name, ch.b.key, ch.cid, calls::AssertionDeposit{}, s.deposit_b);
      }
    }
  }
}

void Runner::init_ledgers(ChannelRun& ch) {
  const ChannelState s0{ch.script->deposit_a, ch.script->deposit_b, 0};
  if (watchtower_mode()) {
    const auto* cc = chain_.view<ChannelContract>(ch.cid);
    if (cc->flag() != ChannelFlag::Ok || !cc->party_b() || cc->capacity() != s0.total())
      violation("channel " + std::to_string(ch.index) + ": setup did not complete");
    const SignedState st = sign_initial_state(ch.cid, s0, ch.a.nonces.next(), ch.a.key, ch.b.key);
    ch.ledger_a.emplace(ch.cid, Role::A, ch.a.key.public_key, ch.b.key.public_key, st);
    ch.ledger_b.emplace(ch.cid, Role::B, ch.a.key.public_key, ch.b.key.public_key, st);
    deliver_to_watchtower(ch, encode(make_submission(ch.cid, st)));
  } else {
    const auto* ac = chain_.view<AssertionChannelContract>(ch.cid);
    if (ac->flag() != ChannelFlag::Ok || !ac->party_b() || ac->capacity() != s0.total())
      violation("channel " + std::to_string(ch.index) + ": setup did not complete");
    const auto init = sign_initial_assertion(ch.cid, s0, chain_.tip().hash, ch.a.key, ch.b.key);
    ch.assert_a.emplace(ch.cid, Role::A, ch.a.key.public_key, ch.b.key.public_key, init);
    ch.assert_b.emplace(ch.cid, Role::B, ch.a.key.public_key, ch.b.key.public_key, init);
  }
  act({{"actor", ch.a.name + "," + ch.b.name}, {"act", "open"}, {"cid", to_hex(ch.cid)}, {"state", state_json(s0)}});
}

void Runner::deliver_to_watchtower(ChannelRun& ch, Bytes wire) {
  if (hooks_.party_to_watchtower) hooks_.party_to_watchtower(wire);
  trace_.metrics.party_to_watchtower.add(wire.size());
  if (cfg_.adversary == Strategy::ReplayMitm) {
    // The man in the middle keeps a copy and slips in a variant with one commitment bit flipped.
    intercepted_[ch.cid].push_back(wire);
    Bytes forged = wire;
    forged[Cid::size] ^= 0x01;
    wt_inbox_.push_back({std::move(wire), false});
    wt_inbox_.push_back({std::move(forged), true});
    ++trace_.metrics.adversary_actions;
    act({{"actor", "ADV"}, {"act", "inject"}, {"kind", "tampered-submission"}, {"cid", to_hex(ch.cid)}});
    return;
  }
  wt_inbox_.push_back({std::move(wire), false});
}

void Runner::deliver_receipt(const WatchtowerReceipt& r) {
  auto it = by_cid_.find(r.cid);
  if (it == by_cid_.end()) return;
  ChannelRun& ch = channels_[it->second];
  const Bytes wire = encode(r);
  for (PartyActor* p : {&ch.a, &ch.b}) {
    if (hooks_.watchtower_to_party) hooks_.watchtower_to_party(wire);
    trace_.metrics.watchtower_to_party.add(wire.size());
    p->inbox.push_back(wire);
  }
}

void Runner::watchtower_round(Height h) {
  if (!wt_->online_at(h)) return;
  if (!wt_inbox_.empty()) {
    std::vector<Bytes> wires;
    std::vector<bool> adversarial;
    for (auto& item : wt_inbox_) {
      wires.push_back(std::move(item.wire));
      adversarial.push_back(item.adversarial);
    }
    wt_inbox_.clear();
    const auto results = wt_->ingest_batch(wires);
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& res = results[i];
      json a{{"actor", "WT"}, {"act", "ingest"}, {"status", ingest_status_name(res.status)}};
      if (res.receipt) a["idx"] = dec(res.receipt->idx);
      act(std::move(a));
      if (adversarial[i]) {
        if (res.accepted())
          violation("watchtower accepted an adversarial submission");
        else
          ++trace_.metrics.adversary_rejected;
      } else if (!res.accepted()) {
        ++trace_.metrics.ingest_rejections[ingest_status_name(res.status)];
      }
      if (res.receipt) deliver_receipt(*res.receipt);
    }
  }
  if (auto tx = wt_->tick(chain_, tower_)) {
    const auto& confs = std::get<calls::TowerUpdate>(tx->call).confs;
    json a{{"actor", "WT"}, {"act", "tx"}, {"method", "tower.update"}, {"m", confs.size()}};
    const TxId id = chain_.submit_tx(std::move(*tx));
    a["id"] = id;
    act(std::move(a));
    update_txs_.insert(id);
    ++trace_.metrics.update_txs;
  }
}

void Runner::adversary_round(Height) {
  const Address adv = address_of(adv_key_.public_key);
  if (cfg_.adversary == Strategy::ConfsTamperer) {
    const auto* tc = chain_.view<TowerContract>(tower_);
    const PendingEntry entry = tc->current_entry();
    if (entry.size() > 0 && tampered_counter_ != tc->counter()) {
      tampered_counter_ = tc->counter();
      ConfirmationSet all(entry.size());
      for (std::size_t j = 0; j < entry.size(); ++j) all.set(j, true);
      adversary_txs_.insert(submit("ADV", adv_key_, tower_, calls::TowerUpdate{all}));
      adversary_txs_.insert(submit("ADV", adv_key_, tower_, calls::TowerWithdraw{entry.cids[0], adv, Fraction::one()}));
      adversary_txs_.insert(submit("ADV", adv_key_, entry.cids[0], calls::ChannelPayout{entry.states[0], true}));
      trace_.metrics.adversary_actions += 3;
    }
  }
  if (cfg_.adversary == Strategy::ReplayMitm) {
    for (auto& ch : channels_) {
      const auto* cc = chain_.view<ChannelContract>(ch.cid);
      if (ch.replayed || cc->flag() != ChannelFlag::Dispute) continue;
      ch.replayed = true;
      // Old submissions replayed once the channel is closing, and a dispute built from an
      // eavesdropped proposal that carries only one party's signature.
      for (const auto& w : intercepted_[ch.cid]) {
        wt_inbox_.push_back({w, true});
        ++trace_.metrics.adversary_actions;
      }
      act({{"actor", "ADV"}, {"act", "replay"}, {"cid", to_hex(ch.cid)}, {"count", intercepted_[ch.cid].size()}});
      if (ch.intercepted_proposal) {
        const auto& p = *ch.intercepted_proposal;
        adversary_txs_.insert(
            submit("ADV", adv_key_, ch.cid, calls::ChannelDispute{p.state, p.r, p.sig, p.sig}));
        ++trace_.metrics.adversary_actions;
      }
    }
  }
}

void Runner::drain_inbox(ChannelRun& ch, PartyActor& p) {
  while (!p.inbox.empty()) {
    const Bytes wire = std::move(p.inbox.front());
    p.inbox.pop_front();
    try {
      apply_receipt(ch.ledger(p.role), decode_receipt(wire), wt_key_.public_key);
    } catch (const OffchainReject& e) {
      violation(p.name + " rejected a watchtower receipt: " + e.what());
    } catch (const DecodeError& e) {
      violation(p.name + " received a malformed receipt: " + e.what());
    }
  }
}

void Runner::pay(ChannelRun& ch, const ScriptedPayment& sp, Height h) {
  PartyActor& payer = ch.party(sp.payer);
  PartyActor& payee = ch.party(other(sp.payer));
  const auto tap = [&](const Bytes& w) {
    if (hooks_.party_to_party) hooks_.party_to_party(w);
    trace_.metrics.party_to_party.add(w.size());
  };
  try {
    if (watchtower_mode()) {
      const Bytes proposal = encode(propose_payment(ch.ledger(payer.role), payer.key, sp.amount, payer.nonces));
      tap(proposal);
      const auto decoded = decode_payment(proposal);
      if (cfg_.adversary == Strategy::ReplayMitm) ch.intercepted_proposal = decoded;
      const auto acc = accept_payment(ch.ledger(payee.role), payee.key, decoded);
      const Bytes reply = encode(acc.reply);
      tap(reply);
      complete_payment(ch.ledger(payer.role), decode_payment(reply));
      deliver_to_watchtower(ch, encode(acc.submission));
    } else {
      const Bytes proposal =
          encode(propose_assertion(ch.assertions(payer.role), payer.key, sp.amount, chain_.tip().hash));
      tap(proposal);
      const auto signed_assertion =
          accept_assertion(ch.assertions(payee.role), payee.key, decode_assertion(proposal), chain_);
      const Bytes reply = encode(signed_assertion);
      tap(reply);
      complete_assertion(ch.assertions(payer.role), decode_assertion(reply));
    }
  } catch (const OffchainReject& e) {
    violation(payer.name + " payment rejected: " + e.what());
    return;
  }
  ch.payment_rounds.push_back(h);
  ++trace_.metrics.payments;
  act({{"actor", payer.name}, {"act", "pay"}, {"to", payee.name}, {"amount", dec(sp.amount)}, {"idx", dec(ch.latest_idx())}});
}

void Runner::close(ChannelRun& ch, Height) {
  const ScriptedClose& sc = *ch.script->close;
  PartyActor& closer = ch.party(sc.by);
  const Index latest = ch.latest_idx();
  Index idx = latest;
  if (sc.idx)
    idx = *sc.idx;
  else if (closer.adversarial && latest > 0)
    idx = latest - 1;
  if (watchtower_mode()) {
    PartyLedger& l = ch.ledger(sc.by);
    const SignedState* st = l.find(idx);
    ch.close_tx = submit(closer.name, closer.key, ch.cid, calls::ChannelClose{st->state, st->r, st->sig_a, st->sig_b});
    if (!closer.adversarial) l.mark_closed();
  } else {
    AssertionLedger& l = ch.assertions(sc.by);
    const auto& hist = l.history();
    const auto it = std::find_if(hist.begin(), hist.end(), [&](const auto& a) { return a.state.idx == idx; });
    ch.close_tx = submit(closer.name, closer.key, ch.cid, calls::AssertionClose{*it});
    if (!closer.adversarial) l.mark_closed();
  }
}

bool Runner::payout_duty(ChannelRun& ch, const PartyActor& p, Height h) const {
  return p.role == Role::A || !ch.a.online(h);
}

void Runner::monitor_channel(ChannelRun& ch, PartyActor& p, Height h) {
  const auto* cc = chain_.view<ChannelContract>(ch.cid);
  PartyLedger& l = ch.ledger(p.role);
  if (cc->flag() == ChannelFlag::Dispute) {
    l.mark_closed();
    const ChannelState s = *cc->accepted_state();
    const SignedState& mine = l.latest();
    if (!p.adversarial && s.idx < mine.state.idx && h + 1 < cc->end() && p.disputed_idx != mine.state.idx) {
      submit(p.name, p.key, ch.cid, calls::ChannelDispute{mine.state, mine.r, mine.sig_a, mine.sig_b});
      p.disputed_idx = mine.state.idx;
    }
    if (h + 1 > cc->end() && payout_duty(ch, p, h) && p.last_payout_round < h) {
      submit(p.name, p.key, ch.cid, calls::ChannelPayout{s, false});
      p.last_payout_round = h;
    }
  }
  if (p.role != Role::B || !ch.script->challenge || ch.challenge_resolved || ch.challenge_tx) return;
  if (cc->flag() != ChannelFlag::Bottom || !cc->paid_out() || !cc->responded() || h + 1 <= cc->end()) return;
  const ChannelState s = *cc->accepted_state();
  const auto& rc = l.receipt();
  const bool grounds = !*cc->responded() || !cc->perc().is_zero() || (rc && rc->idx > s.idx);
  const SignedState* st = rc ? l.find(rc->idx) : nullptr;
  if (!grounds || cc->challenged() || st == nullptr) {
    ch.challenge_resolved = true;
    return;
  }
  ch.challenge_tx = submit(p.name, p.key, ch.cid, calls::ChannelChallenge{st->state, st->r, rc->sig_wt});
}

void Runner::monitor_assertions(ChannelRun& ch, PartyActor& p, Height h) {
  const auto* ac = chain_.view<AssertionChannelContract>(ch.cid);
  if (ac->flag() != ChannelFlag::Dispute) return;
  AssertionLedger& l = ch.assertions(p.role);
  l.mark_closed();
  const ChannelState s = *ac->accepted_state();
  const ShortLivedAssertion& mine = l.latest();
  if (!p.adversarial && s.idx < mine.state.idx && h + 1 < ac->deadline() && p.disputed_idx != mine.state.idx) {
    submit(p.name, p.key, ch.cid, calls::AssertionDispute{mine});
    p.disputed_idx = mine.state.idx;
  }
  if (h + 1 >= ac->deadline() && payout_duty(ch, p, h) && p.last_payout_round < h) {
    submit(p.name, p.key, ch.cid, calls::AssertionPayout{});
    p.last_payout_round = h;
  }
}

void Runner::party_round(ChannelRun& ch, Height h) {
  if (watchtower_mode())
    for (PartyActor* p : {&ch.a, &ch.b})
      if (p->online(h)) drain_inbox(ch, *p);
  const auto& payments = ch.script->payments;
  while (ch.next_payment < payments.size() && payments[ch.next_payment].at == h) pay(ch, payments[ch.next_payment++], h);
  if (ch.script->close && ch.script->close->at == h && !ch.close_tx) close(ch, h);
  for (PartyActor* p : {&ch.a, &ch.b}) {
    if (!p->online(h)) continue;
    if (watchtower_mode())
      monitor_channel(ch, *p, h);
    else
      monitor_assertions(ch, *p, h);
  }
}

bool Runner::paid_out(const ChannelRun& ch) const {
  if (watchtower_mode()) return chain_.view<ChannelContract>(ch.cid)->paid_out();
  return chain_.view<AssertionChannelContract>(ch.cid)->paid_out();
}

void Runner::after_block(const Block& b) {
  json txs = json::array();
  for (const Receipt* rc : chain_.receipts_at(b.height)) {
    const bool adversarial = adversary_txs_.count(rc->id) != 0;
    if (adversarial) {
      if (rc->ok())
        violation("adversary transaction " + std::to_string(rc->id) + " (" + rc->method + ") succeeded");
      else
        ++trace_.metrics.adversary_rejected;
    } else if (!rc->ok()) {
      ++trace_.metrics.reverted_txs;
    }
    if (update_txs_.count(rc->id) && rc->ok()) {
      ++trace_.metrics.update_txs_ok;
      trace_.metrics.bitmap_bytes.push_back(rc->args_bytes - 2);
      ++trace_.metrics.updates_per_period[(b.height - 1) / cfg_.period];
    }
    if (cfg_.record_trace) {
      json t{{"id", rc->id},         {"from", to_hex(rc->from)}, {"to", to_hex(rc->to)},
             {"method", rc->method}, {"args_bytes", rc->args_bytes}, {"status", rc->ok() ? "ok" : "reverted"}};
      if (!rc->ok()) t["reason"] = rc->reason;
      if (!rc->inner_failures.empty()) {
        t["inner"] = json::array();
        for (const auto& f : rc->inner_failures)
          t["inner"].push_back({{"target", to_hex(f.target)}, {"method", f.method}, {"reason", f.reason}});
      }
      txs.push_back(std::move(t));
    }
  }

  for (auto& ch : channels_) {
    if (ch.close_tx && !ch.close_height) {
      const Receipt* rc = chain_.receipt(*ch.close_tx);
      if (rc->ok())
        ch.close_height = b.height;
      else
        violation("channel " + std::to_string(ch.index) + ": close reverted (" + rc->reason + ")");
    }
    if (ch.close_height && !ch.payout_height && paid_out(ch)) {
      ch.payout_height = b.height;
      trace_.metrics.blocks_to_payout.push_back(b.height - *ch.close_height);
    }
    if (ch.challenge_tx && !ch.challenge_resolved) {
      const Receipt* rc = chain_.receipt(*ch.challenge_tx);
      if (!rc->ok()) violation("channel " + std::to_string(ch.index) + ": challenge reverted (" + rc->reason + ")");
      ch.challenge_resolved = true;
    }
  }

  Amount total = 0;
  for (const auto& [_, v] : chain_.balances()) total += v;
  if (total != chain_.total_minted()) violation("token supply changed at height " + std::to_string(b.height));

  if (!cfg_.record_trace) {
    round_actions_ = json::array();
    return;
  }
  json events = json::array();
  for (const Event& e : chain_.read_events(b.height, b.height))
    events.push_back({{"kind", event_kind_name(e.kind)}, {"cid", to_hex(e.cid)}, {"state", state_json(e.state)}, {"index", e.index}});
  json line{{"v", kTraceVersion},  {"height", b.height}, {"hash", to_hex(b.hash)}, {"parent", to_hex(b.parent_hash)},
            {"actions", std::move(round_actions_)}, {"txs", std::move(txs)}, {"events", std::move(events)}};
  trace_.jsonl += line.dump();
  trace_.jsonl += '\n';
  round_actions_ = json::array();
}

bool Runner::settled(const ChannelRun& ch) const {
  if (!ch.script->close) return true;
  if (!ch.payout_height) return false;
  return !ch.script->challenge || ch.challenge_resolved;
}

void Runner::finish() {
  trace_.final_height = chain_.now();
  for (auto& ch : channels_) {
    const ChannelScript& s = *ch.script;
    const std::string where = "channel " + std::to_string(ch.index);
    ChannelOutcome o;
    o.cid = ch.cid;
    o.deposit_a = s.deposit_a;
    o.deposit_b = s.deposit_b;
    o.latest = ch.latest_state();
    o.close_height = ch.close_height;
    o.payout_height = ch.payout_height;
    Amount deposited_fee = 0;
    if (watchtower_mode()) {
      const auto* cc = chain_.view<ChannelContract>(ch.cid);
      const auto* tc = chain_.view<TowerContract>(tower_);
      if (cc->paid_out()) o.final_state = cc->accepted_state();
      o.responded = cc->responded();
      o.perc = cc->perc();
      o.tower_refund = tc->total_withdrawn(ch.cid);
      deposited_fee = tc->total_deposited(ch.cid);
      if (o.tower_refund > deposited_fee) violation(where + ": tower paid out more than was deposited");
      if (cc->challenged()) {
        const Amount expected = !*cc->responded() ? deposited_fee : scale_floor(deposited_fee, cc->perc());
        if (o.tower_refund != expected)
          violation(where + ": challenge refunded " + dec(o.tower_refund) + ", expected " + dec(expected));
      }
    } else {
      const auto* ac = chain_.view<AssertionChannelContract>(ch.cid);
      if (ac->paid_out()) o.final_state = ac->accepted_state();
      o.close_freshness = ac->close_freshness();
    }
    o.paid_a = chain_.balance_of(ch.a.addr);
    const Amount fee_minted = watchtower_mode() ? s.tower_fee : 0;
    o.paid_b = chain_.balance_of(ch.b.addr) - o.tower_refund - (fee_minted - deposited_fee);

    const Amount deposits = s.deposit_a + s.deposit_b;
    if (o.paid_a + o.paid_b > deposits) violation(where + ": paid out more than deposited");
    if (o.final_state && o.paid_a + o.paid_b != deposits) violation(where + ": finalized without paying out the deposits");
    if (!o.final_state && o.paid_a + o.paid_b != 0) violation(where + ": funds left an open channel");
    if (s.close && !o.final_state) violation(where + ": did not finalize by height " + std::to_string(trace_.final_height));

    if (o.final_state) {
      if (o.final_state->bal_a != o.paid_a || o.final_state->bal_b != o.paid_b)
        violation(where + ": payout does not match the accepted state");
      const Index gap = o.latest.idx - o.final_state->idx;
      if (watchtower_mode()) {
        if (*o.final_state != o.latest) violation(where + ": finalized with " + to_string(*o.final_state) +
                                                  " instead of the latest state " + to_string(o.latest));
        // With no watchtower answer the channel must settle at the first chance after end.
        const auto* cc = chain_.view<ChannelContract>(ch.cid);
        if (o.responded && !*o.responded) {
          Height r = cc->end();
          while (!ch.a.online(r) && !ch.b.online(r)) ++r;
          if (*o.payout_height != r + 1)
            violation(where + ": fail-safe payout at " + std::to_string(*o.payout_height) + ", expected " +
                      std::to_string(r + 1));
        }
      } else if (gap > 0) {
        // A stale assertion can only win on the fast path, and only by the payments made
        // inside the freshness window.
        const Height close_round = *o.close_height - 1;
        const Height lo = close_round + 1 >= cfg_.freshness.n ? close_round + 1 - cfg_.freshness.n : 0;
        const auto bound = static_cast<Index>(std::count_if(ch.payment_rounds.begin(), ch.payment_rounds.end(),
                                                             [&](Height r) { return r >= lo && r <= close_round; }));
        if (o.close_freshness != Freshness::Fresh || gap > bound)
          violation(where + ": stale state won (gap " + dec(gap) + ", bound " + dec(bound) + ")");
        trace_.metrics.max_fast_path_gap =
            std::max<std::uint64_t>(trace_.metrics.max_fast_path_gap, static_cast<std::uint64_t>(gap));
      }
      if (s.close && ch.party(s.close->by).adversarial && watchtower_mode()) {
        const Role by = s.close->by;
        const Amount got = by == Role::A ? o.paid_a : o.paid_b;
        if (got > o.latest.balance(by)) violation(where + ": stale closer gained " + dec(got - o.latest.balance(by)));
      }
    }
    trace_.channels.push_back(std::move(o));
  }
  if (wt_) {
    trace_.metrics.watchtower_storage_bytes = wt_->storage_bytes();
    trace_.metrics.watchtower_channels = wt_->channel_count();
  }
  trace_.final_balances = chain_.balances();

  json fin;
  fin["height"] = trace_.final_height;
  json balances = json::object();
  for (const auto& [addr, v] : trace_.final_balances) balances[to_hex(addr)] = dec(v);
  fin["balances"] = balances;
  fin["channels"] = json::array();
  for (const auto& o : trace_.channels) fin["channels"].push_back(outcome_json(o));
  fin["violations"] = trace_.violations;
  trace_.jsonl += json{{"v", kTraceVersion}, {"final", fin}}.dump();
  trace_.jsonl += '\n';
  trace_.digest = hash(ByteView(reinterpret_cast<const std::uint8_t*>(trace_.jsonl.data()), trace_.jsonl.size()));
}

RunTrace Runner::run() {
  validate(cfg_);
  trace_.name = cfg_.name;
  trace_.seed = cfg_.seed;

  const Height t = cfg_.timeouts.tolerance;
  const Height T = cfg_.timeouts.failsafe;
  wt_offline_ = cfg_.watchtower_offline;
  for (const auto& c : cfg_.channels) {
    for (const auto& p : c.payments) last_scripted_ = std::max(last_scripted_, p.at);
    if (c.close) {
      last_scripted_ = std::max(last_scripted_, c.close->at);
      // Silent watchtower: first answer lands at ddl + T/2.
      if (cfg_.adversary == Strategy::SilentWatchtower && t + T / 2 >= 2)
        wt_offline_.push_back({c.close->at + 1, c.close->at + t + T / 2 - 1});
    }
  }
  for (Height r : cfg_.watchtower_restarts) {
    restarts_.insert(r);
    last_scripted_ = std::max(last_scripted_, r);
  }
  max_height_ = cfg_.max_height ? cfg_.max_height : last_scripted_ + t + 3 * T + 64;

  if (watchtower_mode()) {
    if (cfg_.snapshot_path) std::filesystem::remove(*cfg_.snapshot_path);
    wt_.emplace(wt_key_, watchtower_config());
  }
  deploy();

  for (Height h = 0;; ++h) {
    if (wt_ && restarts_.count(h)) {
      wt_.reset();
      wt_.emplace(wt_key_, watchtower_config());
      act({{"actor", "WT"}, {"act", "restart"}, {"channels", wt_->channel_count()}});
    }
    if (h == 2)
      for (auto& ch : channels_) init_ledgers(ch);
    if (h < 2) setup_round(h);
    if (wt_ && h >= 2) watchtower_round(h);
    if (h >= 2) adversary_round(h);
    if (h >= 2)
      for (auto& ch : channels_) party_round(ch, h);
    const Block& b = chain_.mine_block();
    after_block(b);
    if (b.height >= max_height_) break;
    if (h >= last_scripted_ && chain_.pending_tx_count() == 0 && wt_inbox_.empty() &&
        std::all_of(channels_.begin(), channels_.end(), [&](const ChannelRun& ch) { return settled(ch); }))
      break;
  }
  finish();
  return std::move(trace_);
}

}  // namespace

RunTrace run_scenario(const ScenarioConfig& cfg, const ScenarioHooks& hooks) { return Runner(cfg, hooks).run(); }

std::vector<RunTrace> run_scenarios(std::span<const ScenarioConfig> configs) {
  std::vector<RunTrace> out(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  const auto n = static_cast<std::ptrdiff_t>(configs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = run_scenario(configs[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::vector<RunTrace> run_scenarios_serial(std::span<const ScenarioConfig> configs) {
  std::vector<RunTrace> out;
  out.reserve(configs.size());
  for (const auto& c : configs) out.push_back(run_scenario(c));
  return out;
}

nlohmann::json metrics_report(const RunTrace& trace) {
  const auto wire = [](const WireStats& w) {
    json sizes = json::object();
    for (const auto& [size, count] : w.sizes) sizes[std::to_string(size)] = count;
    return json{{"count", w.count}, {"bytes", w.bytes}, {"sizes", sizes}};
  };
  const Metrics& m = trace.metrics;
  json j;
  j["name"] = trace.name;
  j["seed"] = trace.seed;
  j["final_height"] = trace.final_height;
  j["trace_sha256"] = to_hex(trace.digest);
  j["wire"] = {{"party_to_party", wire(m.party_to_party)},
               {"party_to_watchtower", wire(m.party_to_watchtower)},
               {"watchtower_to_party", wire(m.watchtower_to_party)}};
  j["watchtower"] = {{"storage_bytes", m.watchtower_storage_bytes}, {"channels", m.watchtower_channels}};
  json per_period = json::object();
  for (const auto& [p, c] : m.updates_per_period) per_period[std::to_string(p)] = c;
  j["updates"] = {{"submitted", m.update_txs}, {"succeeded", m.update_txs_ok}, {"bitmap_bytes", m.bitmap_bytes},
                  {"per_period", per_period}};
  j["blocks_to_payout"] = m.blocks_to_payout;
  j["ingest_rejections"] = m.ingest_rejections;
  j["reverted_txs"] = m.reverted_txs;
  j["adversary"] = {{"actions", m.adversary_actions}, {"rejected", m.adversary_rejected}};
  j["max_fast_path_gap"] = m.max_fast_path_gap;
  j["payments"] = m.payments;
  j["channels"] = json::array();
  for (const auto& o : trace.channels) j["channels"].push_back(outcome_json(o));
  j["violations"] = trace.violations;
  j["ok"] = trace.ok();
  return j;
}

}  // namespace paychan
