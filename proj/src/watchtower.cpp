#include "paychan/watchtower.hpp"

#include <fstream>
#include <set>

#include "paychan/kernels.hpp"

namespace paychan {

namespace {

// Snapshot: "PCWT" || version u16 || reserved u16, then entries of
// type u8 || length u16 || body. Later entries supersede earlier ones.
constexpr std::array<std::uint8_t, 4> kMagic{'P', 'C', 'W', 'T'};
constexpr std::uint16_t kSnapshotVersion = 1;
constexpr std::size_t kHeaderBytes = 8;
constexpr std::size_t kEntryOverhead = 3;
constexpr std::uint8_t kEntryEnrollment = 1;
constexpr std::uint8_t kEntryRecord = 2;

Bytes header_bytes() {
  Bytes out(kMagic.begin(), kMagic.end());
  out.push_back(static_cast<std::uint8_t>(kSnapshotVersion >> 8));
  out.push_back(static_cast<std::uint8_t>(kSnapshotVersion & 0xff));
  out.push_back(0);
  out.push_back(0);
  return out;
}

void write_entry(std::ostream& os, std::uint8_t type, const Bytes& body) {
  const std::uint8_t head[3] = {type, static_cast<std::uint8_t>(body.size() >> 8),
                                static_cast<std::uint8_t>(body.size() & 0xff)};
  os.write(reinterpret_cast<const char*>(head), 3);
  os.write(reinterpret_cast<const char*>(body.data()), static_cast<std::streamsize>(body.size()));
}

Bytes record_body(const Cid& cid, const WatchtowerRecord& rec) {
  Bytes b;
  b.reserve(Watchtower::kRecordBytes);
  append(b, cid.view());
  append_u128(b, rec.idx);
  append(b, rec.h_s.view());
  append(b, rec.sig_a.view());
  append(b, rec.sig_b.view());
  b.push_back(rec.closing ? 1 : 0);
  return b;
}

}  // namespace

const char* ingest_status_name(IngestStatus s) {
  switch (s) {
    case IngestStatus::Accepted:
      return "accepted";
    case IngestStatus::UnknownChannel:
      return "unknown-channel";
    case IngestStatus::Malformed:
      return "malformed";
    case IngestStatus::BadSignature:
      return "bad-signature";
    case IngestStatus::StaleIndex:
      return "stale-index";
    case IngestStatus::ChannelClosing:
      return "channel-closing";
  }
  return "?";
}

Watchtower::Watchtower(KeyPair key, WatchtowerConfig config) : key_(std::move(key)), config_(std::move(config)) {
  if (config_.period == 0) throw std::invalid_argument("watchtower period must be positive");
  if (config_.snapshot_path) load_snapshot();
}

void Watchtower::enroll(const Cid& cid, const PublicKey& pk_a, const PublicKey& pk_b) {
  Keys k{pk_a, pk_b};
  keys_[cid] = k;
  append_enrollment(cid, k);
}

IngestResult Watchtower::precheck(const WatchtowerSubmission& s) const {
  if (!enrolled(s.cid)) return {IngestStatus::UnknownChannel, {}};
  return {IngestStatus::Accepted, {}};
}

IngestResult Watchtower::apply(const WatchtowerSubmission& s, bool signatures_ok) {
  if (!signatures_ok) return {IngestStatus::BadSignature, {}};
  auto it = records_.find(s.cid);
  if (it != records_.end()) {
    if (it->second.closing) return {IngestStatus::ChannelClosing, {}};
    if (s.idx <= it->second.idx) return {IngestStatus::StaleIndex, {}};
  }
  WatchtowerRecord rec{s.idx, s.h_s, s.sig_a, s.sig_b, false};
  records_[s.cid] = rec;
  append_record(s.cid, rec);
  return {IngestStatus::Accepted, make_receipt(s.cid, rec)};
}

IngestResult Watchtower::ingest(const WatchtowerSubmission& s) {
  IngestResult pre = precheck(s);
  if (!pre.accepted()) return pre;
  const Keys& k = keys_.at(s.cid);
  const auto payload = s.signed_payload();
  return apply(s, verify(k.a, payload, s.sig_a) && verify(k.b, payload, s.sig_b));
}

IngestResult Watchtower::ingest_wire(ByteView wire) {
  WatchtowerSubmission s;
  try {
    s = decode_submission(wire);
  } catch (const DecodeError&) {
    return {IngestStatus::Malformed, {}};
  }
  return ingest(s);
}

std::vector<IngestResult> Watchtower::ingest_batch(std::span<const Bytes> wires) {
  std::vector<IngestResult> results(wires.size());
  std::vector<WatchtowerSubmission> decoded(wires.size());
  std::vector<kernels::SignatureCheck> checks;
  std::vector<std::size_t> check_of(wires.size(), SIZE_MAX);
  for (std::size_t i = 0; i < wires.size(); ++i) {
    try {
      decoded[i] = decode_submission(wires[i]);
    } catch (const DecodeError&) {
      results[i] = {IngestStatus::Malformed, {}};
      continue;
    }
    results[i] = precheck(decoded[i]);
    if (!results[i].accepted()) continue;
    const Keys& k = keys_.at(decoded[i].cid);
    check_of[i] = checks.size();
    checks.push_back({&decoded[i], &k.a, &k.b});
  }
  const auto sig_ok = kernels::verify_submissions(checks);
  for (std::size_t i = 0; i < wires.size(); ++i)
    if (check_of[i] != SIZE_MAX) results[i] = apply(decoded[i], sig_ok[check_of[i]] != 0);
  return results;
}

WatchtowerReceipt Watchtower::make_receipt(const Cid& cid, const WatchtowerRecord& rec) const {
  WatchtowerReceipt r{cid, rec.idx, rec.h_s, {}};
  r.sig_wt = sign(key_, r.signed_payload());
  return r;
}

std::optional<WatchtowerReceipt> Watchtower::resend_receipt(const Cid& cid, Index idx) const {
  const WatchtowerRecord* rec = record(cid);
  if (rec == nullptr || rec->idx != idx) return std::nullopt;
  return make_receipt(cid, *rec);
}

const WatchtowerRecord* Watchtower::record(const Cid& cid) const {
  auto it = records_.find(cid);
  return it == records_.end() ? nullptr : &it->second;
}

bool Watchtower::decide(const Cid& cid, const ChannelState& s, const Nonce& r) const {
  const WatchtowerRecord* rec = record(cid);
  kernels::DecisionCase c;
  if (rec != nullptr) c = {true, rec->idx, rec->h_s, s, r};
  c.state = s;
  c.r = r;
  return kernels::decide_one(c);
}

std::vector<PendingDecision> Watchtower::scan_and_collect(const SimChain& chain, Height from) {
  std::vector<PendingDecision> out;
  if (from > chain.now()) return out;
  std::vector<Cid> order;
  std::set<Cid> seen;
  for (const Event& ev : chain.read_events(from, chain.now())) {
    latest_event_[ev.cid] = ev;
    if (seen.insert(ev.cid).second) order.push_back(ev.cid);
    auto it = records_.find(ev.cid);
    if (it != records_.end() && !it->second.closing) {
      it->second.closing = true;
      append_record(ev.cid, it->second);
    }
  }
  for (const Cid& cid : order) {
    const Event& ev = latest_event_.at(cid);
    out.push_back({cid, ev.state, ev.r, decide(cid, ev.state, ev.r)});
  }
  return out;
}

ConfirmationSet Watchtower::build_confs(std::span<const PendingDecision> decisions, const PendingEntry& entry) const {
  if (decisions.size() != entry.size()) throw OrderingMismatch("decision count differs from pending entry");
  ConfirmationSet confs(entry.size());
  for (std::size_t j = 0; j < entry.size(); ++j) {
    if (decisions[j].cid != entry.cids[j] || decisions[j].state != entry.states[j])
      throw OrderingMismatch("decision " + std::to_string(j) + " does not match pending entry");
    confs.set(j, decisions[j].allow);
  }
  return confs;
}

std::optional<Tx> Watchtower::tick(const SimChain& chain, const Address& tower) {
  const Height h = chain.now();
  if (!online_at(h)) return std::nullopt;
  if (scanned_to_ < h) {
    scan_and_collect(chain, scanned_to_ + 1);
    scanned_to_ = h;
  }
  const bool due = h >= next_due_;
  if (due)
    while (next_due_ <= h) next_due_ += config_.period;
  if (!config_.eager && !due) return std::nullopt;

  const auto* contract = chain.view<TowerContract>(tower);
  if (contract == nullptr) return std::nullopt;
  const PendingEntry entry = contract->current_entry();
  if (entry.size() == 0) return std::nullopt;

  // The tower contract's entry holds the state each channel last forwarded; the nonce
  // comes from the matching event. Anything unexplained is denied.
  std::vector<kernels::DecisionCase> cases(entry.size());
  for (std::size_t j = 0; j < entry.size(); ++j) {
    auto& c = cases[j];
    c.state = entry.states[j];
    auto ev = latest_event_.find(entry.cids[j]);
    const WatchtowerRecord* rec = record(entry.cids[j]);
    if (ev == latest_event_.end() || ev->second.state != c.state || rec == nullptr) continue;
    c.known = true;
    c.stored_idx = rec->idx;
    c.stored_h = rec->h_s;
    c.r = ev->second.r;
  }
  const auto allow = kernels::decide_batch(cases);
  std::vector<PendingDecision> decisions(entry.size());
  for (std::size_t j = 0; j < entry.size(); ++j)
    decisions[j] = {entry.cids[j], entry.states[j], cases[j].r, allow[j] != 0};
  return make_tx(key_, tower, calls::TowerUpdate{build_confs(decisions, entry)});
}

std::size_t Watchtower::storage_bytes() const {
  return kHeaderBytes + keys_.size() * (kEntryOverhead + kEnrollmentBytes) +
         records_.size() * (kEntryOverhead + kRecordBytes);
}

void Watchtower::append_enrollment(const Cid& cid, const Keys& k) const {
  if (!config_.snapshot_path) return;
  const bool fresh = !std::filesystem::exists(*config_.snapshot_path);
  std::ofstream os(*config_.snapshot_path, std::ios::binary | std::ios::app);
  if (!os) throw SnapshotError("cannot open snapshot " + config_.snapshot_path->string());
  if (fresh) {
    const Bytes h = header_bytes();
    os.write(reinterpret_cast<const char*>(h.data()), static_cast<std::streamsize>(h.size()));
  }
  Bytes body;
  append(body, cid.view());
  append(body, k.a.view());
  append(body, k.b.view());
  write_entry(os, kEntryEnrollment, body);
}

void Watchtower::append_record(const Cid& cid, const WatchtowerRecord& rec) const {
  if (!config_.snapshot_path) return;
  std::ofstream os(*config_.snapshot_path, std::ios::binary | std::ios::app);
  if (!os) throw SnapshotError("cannot open snapshot " + config_.snapshot_path->string());
  write_entry(os, kEntryRecord, record_body(cid, rec));
}

void Watchtower::compact_snapshot() const {
  if (!config_.snapshot_path) return;
  const auto tmp = config_.snapshot_path->string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw SnapshotError("cannot write " + tmp);
    const Bytes h = header_bytes();
    os.write(reinterpret_cast<const char*>(h.data()), static_cast<std::streamsize>(h.size()));
    for (const auto& [cid, k] : keys_) {
      Bytes body;
      append(body, cid.view());
      append(body, k.a.view());
      append(body, k.b.view());
      write_entry(os, kEntryEnrollment, body);
    }
    for (const auto& [cid, rec] : records_) write_entry(os, kEntryRecord, record_body(cid, rec));
  }
  std::filesystem::rename(tmp, *config_.snapshot_path);
}

void Watchtower::load_snapshot() {
  const auto& path = *config_.snapshot_path;
  if (!std::filesystem::exists(path)) return;
  std::ifstream is(path, std::ios::binary);
  const Bytes data((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (data.size() < kHeaderBytes || !std::equal(kMagic.begin(), kMagic.end(), data.begin()))
    throw SnapshotError("not a watchtower snapshot: " + path.string());
  const std::uint16_t version = static_cast<std::uint16_t>((data[4] << 8) | data[5]);
  if (version != kSnapshotVersion) throw SnapshotError("unsupported snapshot version " + std::to_string(version));

  std::size_t pos = kHeaderBytes;
  while (pos + kEntryOverhead <= data.size()) {
    const std::uint8_t type = data[pos];
    const std::size_t len = (static_cast<std::size_t>(data[pos + 1]) << 8) | data[pos + 2];
    // A torn final entry (crash mid-append) is dropped; the state before it is intact.
    if (pos + kEntryOverhead + len > data.size()) break;
    ByteReader rd(ByteView(data).subspan(pos + kEntryOverhead, len));
    if (type == kEntryEnrollment && len == kEnrollmentBytes) {
      const auto cid = rd.fixed<Cid>();
      const auto a = rd.fixed<PublicKey>();
      const auto b = rd.fixed<PublicKey>();
      keys_[cid] = {a, b};
    } else if (type == kEntryRecord && len == kRecordBytes) {
      const auto cid = rd.fixed<Cid>();
      WatchtowerRecord rec;
      rec.idx = rd.u128_be();
      rec.h_s = rd.fixed<Digest>();
      rec.sig_a = rd.fixed<Signature>();
      rec.sig_b = rd.fixed<Signature>();
      rec.closing = rd.u8() != 0;
      records_[cid] = rec;
    } else {
      throw SnapshotError("corrupt snapshot entry at offset " + std::to_string(pos));
    }
    pos += kEntryOverhead + len;
  }
}

}  // namespace paychan
