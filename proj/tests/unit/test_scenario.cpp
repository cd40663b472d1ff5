#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include <unistd.h>

#include "paychan/scenario.hpp"

using namespace paychan;
using nlohmann::json;

namespace {

json load(const std::string& name) {
  std::ifstream in(std::string(PAYCHAN_TEST_DATA) + "/../../examples_scenarios/" + name);
  return json::parse(in);
}

json minimal() {
  return json::parse(R"({"channels": [{"deposit_a": 10, "payments": [{"at": 2, "amount": 3}], "close": {"at": 3}}]})");
}

void expect_config_error(const json& j, const std::string& fragment) {
  try {
    validate(config_from_json(j));
    ADD_FAILURE() << "accepted: " << j.dump();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

}  // namespace

TEST(ScenarioConfig, examples_parse_and_roundtrip) {
  for (const char* name : {"honest_close.json", "stale_close.json", "wt_offline.json"}) {
    const auto cfg = config_from_json(load(name));
    EXPECT_NO_THROW(validate(cfg)) << name;
    const auto j = config_to_json(cfg);
    EXPECT_EQ(config_to_json(config_from_json(j)), j) << name;
  }
}

TEST(ScenarioConfig, amounts_accept_decimal_strings) {
  auto j = minimal();
  j["channels"][0]["deposit_a"] = "340282366920938463463374607431768211455";
  const auto cfg = config_from_json(j);
  EXPECT_EQ(cfg.channels[0].deposit_a, ~static_cast<u128>(0));
  j["channels"][0]["deposit_a"] = "340282366920938463463374607431768211456";
  EXPECT_THROW(config_from_json(j), ConfigError);
}

TEST(ScenarioConfig, replicate_copies_channels) {
  auto j = minimal();
  j["channels"][0]["replicate"] = 7;
  EXPECT_EQ(config_from_json(j).channels.size(), 7u);
  j["channels"][0]["replicate"] = 0;
  EXPECT_THROW(config_from_json(j), ConfigError);
}

TEST(ScenarioConfig, rejects_bad_input) {
  auto j = minimal();
  j["bogus"] = 1;
  expect_config_error(j, "unknown key");

  j = minimal();
  j["adversary"] = "eve";
  expect_config_error(j, "unknown strategy");

  j = minimal();
  j["channels"] = json::array();
  expect_config_error(j, "no channels");

  j = minimal();
  j["timeouts"] = {{"t", 0}};
  expect_config_error(j, "positive");

  j = minimal();
  j["channels"][0]["payments"][0]["amount"] = 11;
  expect_config_error(j, "exceeds");

  j = minimal();
  j["channels"][0]["close"]["idx"] = 2;
  expect_config_error(j, "idx");

  j = minimal();
  j["channels"][0]["close"]["at"] = 1;
  expect_config_error(j, "precedes");

  j = minimal();
  j["channels"][0]["offline_a"] = json::array({json::array({1, 2})});
  expect_config_error(j, "setup");

  j = minimal();
  j["timeouts"] = {{"t", 4}, {"T", 8}};
  j["channels"][0]["offline_b"] = json::array({json::array({4, 20})});
  expect_config_error(j, "whole dispute window");

  j = minimal();
  j["mode"] = "short-lived";
  j["channels"][0]["challenge"] = true;
  expect_config_error(j, "challenge");

  j = minimal();
  j["mode"] = "short-lived";
  j["adversary"] = "confs_tamperer";
  expect_config_error(j, "watchtower mode");

  j = minimal();
  j["watchtower_restarts"] = {5};
  expect_config_error(j, "snapshot_path");

  j = minimal();
  j["channels"][0].erase("close");
  j["adversary"] = "stale_closer";
  expect_config_error(j, "stale_closer");

  j = minimal();
  j["channels"][0]["offline_b"] = json::array({json::array({2, 2})});
  expect_config_error(j, "online");

  EXPECT_THROW(run_scenario(config_from_json(json::parse(R"({"channels": []})"))), ConfigError);
}

TEST(Scenario, walkthrough_honest_close) {
  const RunTrace t = run_scenario(walkthrough_scenario(std::nullopt));
  ASSERT_TRUE(t.ok()) << t.violations.front();
  ASSERT_EQ(t.channels.size(), 1u);
  const auto& o = t.channels[0];
  EXPECT_EQ(o.paid_a, 4u);
  EXPECT_EQ(o.paid_b, 6u);
  EXPECT_EQ(o.final_state, (ChannelState{4, 6, 2}));
  EXPECT_EQ(t.metrics.blocks_to_payout, std::vector<Height>{1});
  EXPECT_EQ(t.metrics.payments, 2u);
  // Two 165-byte messages per payment, one 198-byte submission per state, one receipt to each party.
  EXPECT_EQ(t.metrics.party_to_party.sizes, (std::map<std::size_t, std::size_t>{{165, 4}}));
  EXPECT_EQ(t.metrics.party_to_watchtower.sizes, (std::map<std::size_t, std::size_t>{{198, 3}}));
  EXPECT_EQ(t.metrics.watchtower_to_party.sizes, (std::map<std::size_t, std::size_t>{{195, 6}}));
  EXPECT_EQ(t.metrics.watchtower_storage_bytes, 8u + 87 + 202);
}

TEST(Scenario, walkthrough_stale_close_is_disputed) {
  const RunTrace t = run_scenario(walkthrough_scenario(1, Strategy::StaleCloser));
  ASSERT_TRUE(t.ok()) << t.violations.front();
  const auto& o = t.channels[0];
  EXPECT_EQ(o.paid_a, 4u);
  EXPECT_EQ(o.paid_b, 6u);
  EXPECT_EQ(t.metrics.blocks_to_payout, std::vector<Height>{2});
}

TEST(Scenario, adversaries_are_rejected) {
  for (Strategy s : {Strategy::ReplayMitm, Strategy::ConfsTamperer}) {
    const RunTrace t = run_scenario(walkthrough_scenario(std::nullopt, s));
    EXPECT_TRUE(t.ok()) << strategy_name(s) << ": " << (t.ok() ? "" : t.violations.front());
    EXPECT_GT(t.metrics.adversary_actions, 0u) << strategy_name(s);
    EXPECT_EQ(t.metrics.adversary_rejected, t.metrics.adversary_actions) << strategy_name(s);
    EXPECT_EQ(t.channels[0].paid_a, 4u);
    EXPECT_EQ(t.channels[0].paid_b, 6u);
  }
}

TEST(Scenario, silent_watchtower_pays_half_penalty) {
  auto cfg = walkthrough_scenario(std::nullopt, Strategy::SilentWatchtower);
  cfg.timeouts = {4, 16};
  cfg.channels[0].challenge = true;
  const RunTrace t = run_scenario(cfg);
  ASSERT_TRUE(t.ok()) << t.violations.front();
  const auto& o = t.channels[0];
  // Closed at 5, ddl = 9, answer lands at ddl + T/2 = 17.
  EXPECT_EQ(*o.close_height, 5u);
  EXPECT_EQ(*o.payout_height, 17u);
  EXPECT_EQ(o.perc, (Fraction{1, 2}));
  EXPECT_EQ(o.tower_refund, 50u);
  EXPECT_EQ(o.paid_b, 6u);
}

TEST(Scenario, offline_watchtower_falls_back_to_end) {
  auto cfg = walkthrough_scenario(std::nullopt);
  cfg.timeouts = {4, 16};
  cfg.watchtower_offline = {{4, 100}};  // B keeps the receipt for idx 1
  cfg.channels[0].challenge = true;
  const RunTrace t = run_scenario(cfg);
  ASSERT_TRUE(t.ok()) << t.violations.front();
  const auto& o = t.channels[0];
  // end = close + t + T = 25; the party's payout lands in the next block.
  EXPECT_EQ(*o.payout_height, 26u);
  EXPECT_EQ(o.responded, std::optional<bool>(false));
  EXPECT_EQ(o.tower_refund, 100u);
  EXPECT_EQ(o.paid_a, 4u);
  EXPECT_EQ(o.paid_b, 6u);
}

TEST(Scenario, watchtower_restart_from_snapshot) {
  auto cfg = walkthrough_scenario(std::nullopt, Strategy::StaleCloser);
  cfg.channels[0].close->idx = 1;
  cfg.snapshot_path = (std::filesystem::temp_directory_path() / ("paychan_scn_" + std::to_string(::getpid()))).string();
  cfg.watchtower_restarts = {4};
  const RunTrace t = run_scenario(cfg);
  EXPECT_TRUE(t.ok()) << (t.ok() ? "" : t.violations.front());
  EXPECT_EQ(t.channels[0].paid_b, 6u);
  EXPECT_NE(t.jsonl.find("\"restart\""), std::string::npos);
  std::filesystem::remove(*cfg.snapshot_path);
}

TEST(Scenario, short_lived_mode) {
  auto cfg = walkthrough_scenario(std::nullopt);
  cfg.mode = Mode::ShortLived;
  cfg.timeouts = {4, 16};
  RunTrace t = run_scenario(cfg);
  ASSERT_TRUE(t.ok()) << t.violations.front();
  EXPECT_EQ(t.metrics.blocks_to_payout, std::vector<Height>{2});
  EXPECT_EQ(t.channels[0].close_freshness, std::optional<Freshness>(Freshness::Fresh));
  EXPECT_EQ(t.metrics.party_to_party.sizes, (std::map<std::size_t, std::size_t>{{231, 4}}));
  EXPECT_EQ(t.metrics.party_to_watchtower.count, 0u);

  cfg.adversary = Strategy::StaleCloser;
  cfg.channels[0].close->idx = 1;
  t = run_scenario(cfg);
  ASSERT_TRUE(t.ok()) << t.violations.front();
  EXPECT_EQ(t.channels[0].paid_a, 4u);
  EXPECT_EQ(t.channels[0].paid_b, 6u);
  EXPECT_EQ(t.metrics.blocks_to_payout, std::vector<Height>{3});
}

TEST(Scenario, deterministic_trace) {
  const auto cfg = walkthrough_scenario(1, Strategy::StaleCloser);
  const RunTrace a = run_scenario(cfg);
  const RunTrace b = run_scenario(cfg);
  EXPECT_EQ(a.jsonl, b.jsonl);
  EXPECT_EQ(a.digest, b.digest);
  auto other = cfg;
  other.seed = 47;
  EXPECT_NE(run_scenario(other).digest, a.digest);

  // Every line is a JSON object with a version tag; the last one is the summary.
  std::istringstream lines(a.jsonl);
  std::string line, last;
  while (std::getline(lines, line)) {
    const auto j = json::parse(line);
    EXPECT_EQ(j["v"], 1);
    last = line;
  }
  EXPECT_TRUE(json::parse(last).contains("final"));
}

TEST(Scenario, metrics_report_shape) {
  const RunTrace t = run_scenario(walkthrough_scenario(std::nullopt));
  const json m = metrics_report(t);
  EXPECT_EQ(m["trace_sha256"], to_hex(t.digest));
  EXPECT_EQ(m["ok"], true);
  EXPECT_EQ(m["wire"]["party_to_watchtower"]["sizes"]["198"], 3);
  EXPECT_EQ(m["channels"][0]["paid_b"], "6");
  EXPECT_EQ(m["blocks_to_payout"], json::array({1}));
}

TEST(Scenario, randomized_honest_runs_hold_invariants) {
  std::mt19937_64 rng(99);
  for (int k = 0; k < 25; ++k) {
    ScenarioConfig cfg;
    cfg.seed = rng();
    cfg.timeouts = {1 + rng() % 8, 8 + rng() % 24};
    cfg.eager_updates = rng() % 2 == 0;
    cfg.period = 1 + rng() % 6;
    const std::size_t m = 1 + rng() % 4;
    for (std::size_t c = 0; c < m; ++c) {
      ChannelScript s;
      s.deposit_a = 1 + rng() % 50;
      s.deposit_b = rng() % 50;
      ChannelState st{s.deposit_a, s.deposit_b, 0};
      Height h = 2;
      for (int p = 0, n = static_cast<int>(rng() % 6); p < n; ++p) {
        h += rng() % 3;
        const Role payer = (rng() % 2 == 0) ? Role::A : Role::B;
        Amount& from = payer == Role::A ? st.bal_a : st.bal_b;
        Amount& to = payer == Role::A ? st.bal_b : st.bal_a;
        if (from == 0) continue;
        const Amount amt = 1 + rng() % static_cast<std::uint64_t>(from);
        from -= amt;
        to += amt;
        s.payments.push_back({h, payer, amt});
      }
      s.close = ScriptedClose{h + rng() % 3, rng() % 2 == 0 ? Role::A : Role::B, std::nullopt};
      cfg.channels.push_back(s);
    }
    const RunTrace t = run_scenario(cfg);
    ASSERT_TRUE(t.ok()) << "seed " << cfg.seed << ": " << t.violations.front();
    for (const auto& o : t.channels) EXPECT_EQ(o.final_state, o.latest);
  }
}

TEST(Scenario, storage_and_update_economy_at_scale) {
  ScenarioConfig cfg;
  cfg.eager_updates = false;
  ChannelScript s;
  s.payments = {{2, Role::A, 1}};
  s.close = ScriptedClose{3, Role::A, std::nullopt};
  cfg.channels.assign(1000, s);
  const RunTrace t = run_scenario(cfg);
  ASSERT_TRUE(t.ok()) << t.violations.front();
  // One enrollment and one record per channel.
  EXPECT_EQ(t.metrics.watchtower_storage_bytes, 8u + 1000 * (87 + 202));
  EXPECT_LE(t.metrics.watchtower_storage_bytes, 2u * 198 * 1000);
  EXPECT_EQ(t.metrics.party_to_watchtower.sizes, (std::map<std::size_t, std::size_t>{{198, 2000}}));
  EXPECT_EQ(t.metrics.update_txs_ok, 1u);
  EXPECT_EQ(t.metrics.bitmap_bytes, std::vector<std::size_t>{125});
}
