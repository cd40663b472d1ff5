#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "paychan/chain.hpp"
#include "paychan/confirmation_set.hpp"
#include "paychan/tower_contract.hpp"
#include "paychan/wire.hpp"

namespace paychan {

/// What the watchtower keeps per channel: the latest commitment and both signatures.
struct WatchtowerRecord {
  Index idx = 0;
  Digest h_s;
  Signature sig_a;
  Signature sig_b;
  /// Set once a closure for the channel was observed; the record is then frozen.
  bool closing = false;

  bool operator==(const WatchtowerRecord&) const = default;
};

enum class IngestStatus { Accepted, UnknownChannel, Malformed, BadSignature, StaleIndex, ChannelClosing };

const char* ingest_status_name(IngestStatus s);

struct IngestResult {
  IngestStatus status = IngestStatus::Malformed;
  /// Present only when accepted.
  std::optional<WatchtowerReceipt> receipt;

  bool accepted() const { return status == IngestStatus::Accepted; }
};

/// A closure or dispute seen on chain, with the watchtower's verdict.
struct PendingDecision {
  Cid cid;
  ChannelState state;
  Nonce r;
  bool allow = false;
};

/// The decisions handed to build_confs do not line up with the tower's pending entry.
class OrderingMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Corrupt or incompatible snapshot file.
class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WatchtowerConfig {
  /// Update period in blocks.
  Height period = 16;
  /// Respond as soon as closures are pending instead of waiting for the period boundary.
  bool eager = true;
  /// Heights at which the watchtower does nothing.
  std::vector<Interval> offline;
  /// Append-only state log; loaded on construction when it exists.
  std::optional<std::filesystem::path> snapshot_path;
};

/// Off-chain watchtower: stores one commitment per channel, never sees balances or
/// nonces, and answers pending closures with a single confirmation-set update.
class Watchtower {
 public:
  /// Bytes of one stored record (cid, idx, h_s, two signatures, flags).
  static constexpr std::size_t kRecordBytes = 199;
  /// Bytes of one enrollment (cid, pk_A, pk_B).
  static constexpr std::size_t kEnrollmentBytes = 84;

  explicit Watchtower(KeyPair key, WatchtowerConfig config = {});

  const PublicKey& public_key() const { return key_.public_key; }
  Address address() const { return address_of(key_.public_key); }
  const WatchtowerConfig& config() const { return config_; }

  /// Registers the two party keys submissions for `cid` must be signed with.
  void enroll(const Cid& cid, const PublicKey& pk_a, const PublicKey& pk_b);
  bool enrolled(const Cid& cid) const { return keys_.count(cid) != 0; }

  IngestResult ingest(const WatchtowerSubmission& s);
  /// Decodes a 198-byte submission first; anything else is Malformed.
  IngestResult ingest_wire(ByteView wire);
  /// Verifies signatures in parallel, then applies in order. Same result as sequential ingest.
  std::vector<IngestResult> ingest_batch(std::span<const Bytes> wires);
  /// Receipt for the stored record when it still has index `idx`.
  std::optional<WatchtowerReceipt> resend_receipt(const Cid& cid, Index idx) const;

  /// True iff the stored record has this index and (s, r) opens its commitment.
  bool decide(const Cid& cid, const ChannelState& s, const Nonce& r) const;

  /// Reads closure and dispute events in [from, now], freezes the affected records and
  /// returns one decision per channel (latest event wins) in first-seen order.
  std::vector<PendingDecision> scan_and_collect(const SimChain& chain, Height from);

  /// Lays decisions out in the pending entry's order. Throws OrderingMismatch when the
  /// decisions do not cover exactly the entry's channels and states.
  ConfirmationSet build_confs(std::span<const PendingDecision> decisions, const PendingEntry& entry) const;

  /// One round of the service loop at chain.now(): scan new events and, when an update
  /// is due and closures are pending, return the signed tower.update transaction.
  std::optional<Tx> tick(const SimChain& chain, const Address& tower);

  bool online_at(Height h) const { return !any_contains(config_.offline, h); }
  const WatchtowerRecord* record(const Cid& cid) const;
  std::size_t channel_count() const { return records_.size(); }
  /// Size of a compacted snapshot holding the current state.
  std::size_t storage_bytes() const;
  Height next_due() const { return next_due_; }

  /// Rewrites the snapshot file with only the current state.
  void compact_snapshot() const;

 private:
  struct Keys {
    PublicKey a;
    PublicKey b;
  };

  IngestResult apply(const WatchtowerSubmission& s, bool signatures_ok);
  IngestResult precheck(const WatchtowerSubmission& s) const;
  WatchtowerReceipt make_receipt(const Cid& cid, const WatchtowerRecord& rec) const;
  void load_snapshot();
  void append_enrollment(const Cid& cid, const Keys& k) const;
  void append_record(const Cid& cid, const WatchtowerRecord& rec) const;

  KeyPair key_;
  WatchtowerConfig config_;
  std::map<Cid, Keys> keys_;
  std::map<Cid, WatchtowerRecord> records_;
  std::map<Cid, Event> latest_event_;
  Height scanned_to_ = 0;
  Height next_due_ = 0;
};

}  // namespace paychan
