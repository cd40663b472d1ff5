#pragma once

// End-to-end runs: parties, watchtower and adversary actors stepped round-robin between
// blocks of one SimChain. A run is a pure function of its config.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "paychan/assertions.hpp"
#include "paychan/channel_contract.hpp"

namespace paychan {

enum class Mode : std::uint8_t { Watchtower, ShortLived };

enum class Strategy : std::uint8_t { None, StaleCloser, ReplayMitm, ConfsTamperer, SilentWatchtower };

const char* mode_name(Mode m);
const char* strategy_name(Strategy s);

struct ScriptedPayment {
  Height at = 2;
  Role payer = Role::A;
  Amount amount = 0;
};

struct ScriptedClose {
  Height at = 2;
  Role by = Role::A;
  /// State to close with; the latest when absent (stale_closer defaults to latest - 1).
  std::optional<std::uint64_t> idx;
};

struct ChannelScript {
  Amount deposit_a = 10;
  Amount deposit_b = 0;
  /// B's deposit at the tower contract; 0 skips it.
  Amount tower_fee = 100;
  std::vector<ScriptedPayment> payments;
  std::optional<ScriptedClose> close;
  std::vector<Interval> offline_a;
  std::vector<Interval> offline_b;
  /// B challenges the watchtower after end when it has grounds.
  bool challenge = false;
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::uint64_t seed = 0;
  Mode mode = Mode::Watchtower;
  ChannelTimeouts timeouts;
  Height period = 16;
  bool eager_updates = true;
  FreshnessPolicy freshness;  // failsafe is taken from timeouts
  std::vector<Interval> watchtower_offline;
  /// Rounds at which the watchtower process is rebuilt from its snapshot.
  std::vector<Height> watchtower_restarts;
  std::optional<std::string> snapshot_path;
  Strategy adversary = Strategy::None;
  std::vector<ChannelScript> channels;
  /// 0 derives a bound from the script and timeouts.
  Height max_height = 0;
  bool record_trace = true;
};

/// Invalid scenario; raised before anything executes.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void validate(const ScenarioConfig& cfg);
ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ScenarioConfig& cfg);

struct WireStats {
  std::size_t count = 0;
  std::size_t bytes = 0;
  std::map<std::size_t, std::size_t> sizes;  // message size -> count

  void add(std::size_t n) {
    ++count;
    bytes += n;
    ++sizes[n];
  }
};

struct Metrics {
  WireStats party_to_party;
  WireStats party_to_watchtower;
  WireStats watchtower_to_party;
  std::size_t watchtower_storage_bytes = 0;
  std::size_t watchtower_channels = 0;
  std::size_t update_txs = 0;
  std::size_t update_txs_ok = 0;
  /// Bitmap bytes of each successful update, in order.
  std::vector<std::size_t> bitmap_bytes;
  /// Successful updates per period index ((height - 1) / period).
  std::map<Height, std::size_t> updates_per_period;
  std::vector<Height> blocks_to_payout;
  std::map<std::string, std::size_t> ingest_rejections;
  std::size_t reverted_txs = 0;
  std::size_t adversary_actions = 0;
  std::size_t adversary_rejected = 0;
  std::uint64_t max_fast_path_gap = 0;
  std::size_t payments = 0;
};

struct ChannelOutcome {
  Cid cid;
  Amount deposit_a = 0;
  Amount deposit_b = 0;
  ChannelState latest;
  std::optional<Height> close_height;
  std::optional<Height> payout_height;
  std::optional<ChannelState> final_state;
  Amount paid_a = 0;
  Amount paid_b = 0;
  /// Tower deposit returned to B through challenges.
  Amount tower_refund = 0;
  std::optional<bool> responded;
  Fraction perc;
  std::optional<Freshness> close_freshness;
};

struct RunTrace {
  std::string name;
  std::uint64_t seed = 0;
  /// JSON lines, one object per block plus a final summary line.
  std::string jsonl;
  Digest digest;
  Height final_height = 0;
  Metrics metrics;
  std::vector<ChannelOutcome> channels;
  std::map<Address, Amount> final_balances;
  /// In-run property violations; empty for a successful run.
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

/// Optional taps on the message layer, e.g. for boundary instrumentation.
struct ScenarioHooks {
  std::function<void(ByteView)> party_to_party;
  std::function<void(ByteView)> party_to_watchtower;
  std::function<void(ByteView)> watchtower_to_party;
};

RunTrace run_scenario(const ScenarioConfig& cfg, const ScenarioHooks& hooks = {});

/// Runs independent scenarios across OpenMP threads; results are in input order.
std::vector<RunTrace> run_scenarios(std::span<const ScenarioConfig> configs);
std::vector<RunTrace> run_scenarios_serial(std::span<const ScenarioConfig> configs);

nlohmann::json metrics_report(const RunTrace& trace);

/// Two-party walkthrough: deposits (10, 0), two payments of 3 from A, then a close.
ScenarioConfig walkthrough_scenario(std::optional<std::uint64_t> close_idx, Strategy adversary = Strategy::None);

}  // namespace paychan
