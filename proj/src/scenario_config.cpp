#include <algorithm>
#include <set>

#include "paychan/scenario.hpp"

namespace paychan {

using nlohmann::json;

namespace {

const std::vector<std::pair<Strategy, const char*>> kStrategies = {
    {Strategy::None, "none"},
    {Strategy::StaleCloser, "stale_closer"},
    {Strategy::ReplayMitm, "replay_mitm"},
    {Strategy::ConfsTamperer, "confs_tamperer"},
    {Strategy::SilentWatchtower, "silent_wt"},
};

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) fail(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      fail(where + ": unknown key '" + key + "'");
  }
}

// Values built in code arrive as signed integers; parsed text as unsigned.
bool non_negative_int(const json& j) {
  return j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0);
}

Amount amount_of(const json& j, const std::string& where) {
  if (non_negative_int(j)) return j.get<std::uint64_t>();
  if (j.is_string()) {
    try {
      return parse_u128(j.get<std::string>());
    } catch (const EncodingError& e) {
      fail(where + ": " + e.what());
    }
  }
  fail(where + ": expected a non-negative integer or decimal string");
}

std::uint64_t u64_of(const json& j, const std::string& where) {
  if (!non_negative_int(j)) fail(where + ": expected a non-negative integer");
  return j.get<std::uint64_t>();
}

Role role_of(const json& j, const std::string& where) {
  if (j == "A") return Role::A;
  if (j == "B") return Role::B;
  fail(where + ": expected \"A\" or \"B\"");
}

std::vector<Interval> intervals_of(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where + ": expected a list of [from, until] pairs");
  std::vector<Interval> out;
  for (const auto& w : j) {
    if (!w.is_array() || w.size() != 2) fail(where + ": expected [from, until]");
    out.push_back({u64_of(w[0], where), u64_of(w[1], where)});
  }
  return out;
}

json intervals_json(const std::vector<Interval>& v) {
  json out = json::array();
  for (const auto& w : v) out.push_back({w.from, w.until});
  return out;
}

ChannelScript channel_of(const json& j, const std::string& where) {
  check_keys(j,
             {"replicate", "deposit_a", "deposit_b", "tower_fee", "payments", "close", "offline_a", "offline_b",
              "challenge"},
             where);
  ChannelScript c;
  if (j.contains("deposit_a")) c.deposit_a = amount_of(j["deposit_a"], where + ".deposit_a");
  if (j.contains("deposit_b")) c.deposit_b = amount_of(j["deposit_b"], where + ".deposit_b");
  if (j.contains("tower_fee")) c.tower_fee = amount_of(j["tower_fee"], where + ".tower_fee");
  if (j.contains("payments")) {
    if (!j["payments"].is_array()) fail(where + ".payments: expected a list");
    for (const auto& p : j["payments"]) {
      const std::string w = where + ".payments[]";
      check_keys(p, {"at", "payer", "amount"}, w);
      if (!p.contains("at") || !p.contains("amount")) fail(w + ": 'at' and 'amount' are required");
      c.payments.push_back({u64_of(p["at"], w + ".at"), p.contains("payer") ? role_of(p["payer"], w + ".payer") : Role::A,
                            amount_of(p["amount"], w + ".amount")});
    }
  }
  if (j.contains("close")) {
    const auto& cl = j["close"];
    const std::string w = where + ".close";
    check_keys(cl, {"at", "by", "idx"}, w);
    if (!cl.contains("at")) fail(w + ": 'at' is required");
    ScriptedClose sc;
    sc.at = u64_of(cl["at"], w + ".at");
    if (cl.contains("by")) sc.by = role_of(cl["by"], w + ".by");
    if (cl.contains("idx")) sc.idx = u64_of(cl["idx"], w + ".idx");
    c.close = sc;
  }
  if (j.contains("offline_a")) c.offline_a = intervals_of(j["offline_a"], where + ".offline_a");
  if (j.contains("offline_b")) c.offline_b = intervals_of(j["offline_b"], where + ".offline_b");
  if (j.contains("challenge")) {
    if (!j["challenge"].is_boolean()) fail(where + ".challenge: expected a boolean");
    c.challenge = j["challenge"].get<bool>();
  }
  return c;
}

/// True when every height in [lo, hi] lies in some window.
bool fully_covered(std::vector<Interval> windows, Height lo, Height hi) {
  std::sort(windows.begin(), windows.end(), [](const Interval& a, const Interval& b) { return a.from < b.from; });
  Height next = lo;
  for (const auto& w : windows) {
    if (w.from > next) break;
    if (w.until >= next) {
      if (w.until >= hi) return true;
      next = w.until + 1;
    }
  }
  return false;
}

}  // namespace

const char* mode_name(Mode m) { return m == Mode::Watchtower ? "watchtower" : "short-lived"; }

const char* strategy_name(Strategy s) {
  for (const auto& [k, name] : kStrategies)
    if (k == s) return name;
  return "?";
}

void validate(const ScenarioConfig& cfg) {
  if (cfg.channels.empty()) fail("scenario has no channels");
  if (cfg.channels.size() > ConfirmationSet::kMaxBits) fail("too many channels");
  const Height t = cfg.timeouts.tolerance;
  const Height T = cfg.timeouts.failsafe;
  if (t == 0 || T == 0) fail("timeouts t and T must be positive");
  if (cfg.period == 0) fail("period must be positive");
  if (cfg.freshness.n == 0 || cfg.freshness.fast == 0) fail("freshness n and t_fast must be positive");
  for (const auto& w : cfg.watchtower_offline)
    if (w.from > w.until) fail("watchtower offline interval ends before it starts");
  if (!cfg.watchtower_restarts.empty() && !cfg.snapshot_path) fail("watchtower restarts need a snapshot_path");

  const bool short_lived = cfg.mode == Mode::ShortLived;
  if (short_lived && (cfg.adversary == Strategy::ReplayMitm || cfg.adversary == Strategy::ConfsTamperer ||
                      cfg.adversary == Strategy::SilentWatchtower))
    fail(std::string("adversary ") + strategy_name(cfg.adversary) + " needs watchtower mode");
  if (cfg.adversary == Strategy::StaleCloser &&
      std::none_of(cfg.channels.begin(), cfg.channels.end(), [](const ChannelScript& c) { return c.close.has_value(); }))
    fail("stale_closer needs a channel that closes");

  for (std::size_t i = 0; i < cfg.channels.size(); ++i) {
    const ChannelScript& c = cfg.channels[i];
    const std::string where = "channel " + std::to_string(i);
    for (const auto* windows : {&c.offline_a, &c.offline_b})
      for (const auto& w : *windows)
        if (w.from > w.until) fail(where + ": offline interval ends before it starts");
    const auto online = [&](Role r, Height h) { return !any_contains(r == Role::A ? c.offline_a : c.offline_b, h); };

    const Amount cap = c.deposit_a + c.deposit_b;
    if (cap < c.deposit_a) fail(where + ": deposits overflow");
    if (cap == 0) fail(where + ": channel capacity is zero");
    if (!online(Role::A, 0) || !online(Role::B, 1) || !online(Role::A, 2) || !online(Role::B, 2))
      fail(where + ": parties must be online during setup (heights 0-2)");
    if (c.challenge && (short_lived || c.tower_fee == 0)) fail(where + ": challenge needs a watchtower deposit");

    ChannelState s{c.deposit_a, c.deposit_b, 0};
    Height last = 2;
    for (const auto& p : c.payments) {
      if (p.at < last) fail(where + ": payments must be ordered by height and start at 2");
      last = p.at;
      if (p.amount == 0) fail(where + ": zero payment");
      if (!online(Role::A, p.at) || !online(Role::B, p.at)) fail(where + ": both parties must be online to pay");
      Amount& from = p.payer == Role::A ? s.bal_a : s.bal_b;
      Amount& to = p.payer == Role::A ? s.bal_b : s.bal_a;
      if (from < p.amount) fail(where + ": payment exceeds the payer's balance");
      from -= p.amount;
      to += p.amount;
    }
    if (c.close) {
      const ScriptedClose& cl = *c.close;
      if (cl.at < last) fail(where + ": close precedes a scripted payment");
      if (!online(cl.by, cl.at)) fail(where + ": closer is offline at the close height");
      if (cl.idx && *cl.idx > c.payments.size()) fail(where + ": close idx beyond the last payment");
      // The counterparty must get a chance to dispute before the fail-safe window ends.
      const Height window = short_lived ? T : t + T;
      if (window >= 2 && fully_covered(other(cl.by) == Role::A ? c.offline_a : c.offline_b, cl.at + 1,
                                       cl.at + window - 1))
        fail(where + ": counterparty offline for the whole dispute window");
    }
  }
}

ScenarioConfig config_from_json(const json& j) {
  check_keys(j,
             {"name", "seed", "mode", "timeouts", "period", "eager_updates", "freshness", "watchtower_offline",
              "watchtower_restarts", "snapshot_path", "adversary", "channels", "max_height", "record_trace"},
             "scenario");
  ScenarioConfig cfg;
  if (j.contains("name")) cfg.name = j["name"].get<std::string>();
  if (j.contains("seed")) cfg.seed = u64_of(j["seed"], "seed");
  if (j.contains("mode")) {
    if (j["mode"] == "watchtower")
      cfg.mode = Mode::Watchtower;
    else if (j["mode"] == "short-lived")
      cfg.mode = Mode::ShortLived;
    else
      fail("mode: expected \"watchtower\" or \"short-lived\"");
  }
  if (j.contains("timeouts")) {
    check_keys(j["timeouts"], {"t", "T"}, "timeouts");
    if (j["timeouts"].contains("t")) cfg.timeouts.tolerance = u64_of(j["timeouts"]["t"], "timeouts.t");
    if (j["timeouts"].contains("T")) cfg.timeouts.failsafe = u64_of(j["timeouts"]["T"], "timeouts.T");
  }
  if (j.contains("period")) cfg.period = u64_of(j["period"], "period");
  if (j.contains("eager_updates")) cfg.eager_updates = j["eager_updates"].get<bool>();
  if (j.contains("freshness")) {
    check_keys(j["freshness"], {"n", "t_fast"}, "freshness");
    if (j["freshness"].contains("n")) cfg.freshness.n = u64_of(j["freshness"]["n"], "freshness.n");
    if (j["freshness"].contains("t_fast")) cfg.freshness.fast = u64_of(j["freshness"]["t_fast"], "freshness.t_fast");
  }
  if (j.contains("watchtower_offline")) cfg.watchtower_offline = intervals_of(j["watchtower_offline"], "watchtower_offline");
  if (j.contains("watchtower_restarts"))
    for (const auto& h : j["watchtower_restarts"]) cfg.watchtower_restarts.push_back(u64_of(h, "watchtower_restarts"));
  if (j.contains("snapshot_path")) cfg.snapshot_path = j["snapshot_path"].get<std::string>();
  if (j.contains("adversary")) {
    const auto name = j["adversary"].get<std::string>();
    auto it = std::find_if(kStrategies.begin(), kStrategies.end(), [&](const auto& e) { return name == e.second; });
    if (it == kStrategies.end()) fail("adversary: unknown strategy '" + name + "'");
    cfg.adversary = it->first;
  }
  if (j.contains("max_height")) cfg.max_height = u64_of(j["max_height"], "max_height");
  if (j.contains("record_trace")) cfg.record_trace = j["record_trace"].get<bool>();
  if (!j.contains("channels") || !j["channels"].is_array()) fail("channels: expected a list");
  for (std::size_t i = 0; i < j["channels"].size(); ++i) {
    const auto& cj = j["channels"][i];
    const std::string where = "channels[" + std::to_string(i) + "]";
    const ChannelScript c = channel_of(cj, where);
    const std::uint64_t copies = cj.contains("replicate") ? u64_of(cj["replicate"], where + ".replicate") : 1;
    if (copies == 0 || copies > ConfirmationSet::kMaxBits) fail(where + ".replicate: out of range");
    for (std::uint64_t k = 0; k < copies; ++k) cfg.channels.push_back(c);
  }
  cfg.freshness.failsafe = cfg.timeouts.failsafe;
  return cfg;
}

json config_to_json(const ScenarioConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["seed"] = cfg.seed;
  j["mode"] = mode_name(cfg.mode);
  j["timeouts"] = {{"t", cfg.timeouts.tolerance}, {"T", cfg.timeouts.failsafe}};
  j["period"] = cfg.period;
  j["eager_updates"] = cfg.eager_updates;
  j["freshness"] = {{"n", cfg.freshness.n}, {"t_fast", cfg.freshness.fast}};
  j["watchtower_offline"] = intervals_json(cfg.watchtower_offline);
  j["watchtower_restarts"] = cfg.watchtower_restarts;
  if (cfg.snapshot_path) j["snapshot_path"] = *cfg.snapshot_path;
  j["adversary"] = strategy_name(cfg.adversary);
  j["max_height"] = cfg.max_height;
  j["record_trace"] = cfg.record_trace;
  j["channels"] = json::array();
  for (const auto& c : cfg.channels) {
    json cj;
    cj["deposit_a"] = u128_to_string(c.deposit_a);
    cj["deposit_b"] = u128_to_string(c.deposit_b);
    cj["tower_fee"] = u128_to_string(c.tower_fee);
    cj["payments"] = json::array();
    for (const auto& p : c.payments)
      cj["payments"].push_back({{"at", p.at}, {"payer", role_name(p.payer)}, {"amount", u128_to_string(p.amount)}});
    if (c.close) {
      json cl{{"at", c.close->at}, {"by", role_name(c.close->by)}};
      if (c.close->idx) cl["idx"] = *c.close->idx;
      cj["close"] = cl;
    }
    cj["offline_a"] = intervals_json(c.offline_a);
    cj["offline_b"] = intervals_json(c.offline_b);
    cj["challenge"] = c.challenge;
    j["channels"].push_back(cj);
  }
  return j;
}

ScenarioConfig walkthrough_scenario(std::optional<std::uint64_t> close_idx, Strategy adversary) {
  ScenarioConfig cfg;
  cfg.name = "walkthrough";
  cfg.seed = 46;
  cfg.adversary = adversary;
  ChannelScript c;
  c.deposit_a = 10;
  c.deposit_b = 0;
  c.payments = {{2, Role::A, 3}, {3, Role::A, 3}};
  c.close = ScriptedClose{4, Role::A, close_idx};
  cfg.channels.push_back(c);
  return cfg;
}

}  // namespace paychan
