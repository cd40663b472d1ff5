// paychan: run scenarios, check wire formats, time the off-chain exchange.

#include <chrono>
#include <condition_variable>
#include <fstream>
#include <iostream>
#include <mutex>
#include <queue>
#include <thread>

#include "CLI11.hpp"
#include "paychan/golden.hpp"
#include "paychan/offchain.hpp"
#include "paychan/scenario.hpp"
#include "paychan/watchtower.hpp"

using namespace paychan;

namespace {

int cmd_run(const std::string& path, std::optional<std::uint64_t> seed, const std::string& trace_out,
            const std::string& metrics_out, std::optional<Height> period, std::optional<Height> off_from,
            std::optional<Height> off_until, const std::string& snapshot) {
  ScenarioConfig cfg;
  try {
    std::ifstream in(path);
    if (!in) {
      std::cerr << "cannot open " << path << "\n";
      return 2;
    }
    cfg = config_from_json(nlohmann::json::parse(in));
    if (seed) cfg.seed = *seed;
    if (period) cfg.period = *period;
    if (off_from || off_until) {
      if (!off_from || !off_until) throw ConfigError("--offline-from and --offline-until go together");
      cfg.watchtower_offline.push_back({*off_from, *off_until});
    }
    if (!snapshot.empty()) cfg.snapshot_path = snapshot;
    validate(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "invalid scenario: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "invalid scenario: " << e.what() << "\n";
    return 2;
  }

  const RunTrace trace = run_scenario(cfg);
  if (!trace_out.empty()) {
    std::ofstream(trace_out, std::ios::binary) << trace.jsonl;
  }
  const auto report = metrics_report(trace);
  if (!metrics_out.empty()) std::ofstream(metrics_out) << report.dump(2) << "\n";

  std::cout << trace.name << ": height " << trace.final_height << ", trace " << to_hex(trace.digest) << "\n";
  for (std::size_t i = 0; i < trace.channels.size(); ++i) {
    const auto& o = trace.channels[i];
    std::cout << "  channel " << i << ": ";
    if (o.final_state)
      std::cout << "paid A " << u128_to_string(o.paid_a) << ", B " << u128_to_string(o.paid_b) << " at height "
                << *o.payout_height << "\n";
    else
      std::cout << "open\n";
  }
  for (const auto& v : trace.violations) std::cout << "  VIOLATION " << v << "\n";
  return trace.ok() ? 0 : 1;
}

int cmd_verify_formats(bool print) {
  if (print) {
    for (const auto& g : build_golden_vectors()) std::cout << g.name << " " << to_hex(g.encoded) << "\n";
    return 0;
  }
  bool ok = true;
  for (const auto& c : check_golden_vectors()) {
    const bool pass = c.encoding_matches && c.roundtrips;
    ok = ok && pass;
    std::cout << (pass ? "ok   " : "FAIL ") << c.name << " (" << c.size << " bytes)"
              << (c.encoding_matches ? "" : " encoding differs") << (c.roundtrips ? "" : " roundtrip failed") << "\n";
  }
  return ok ? 0 : 1;
}

// Party and watchtower on separate threads connected by a queue; the only place
// actors run concurrently.
int cmd_bench_throughput(std::size_t payments) {
  const KeyPair ka = KeyPair::derive("bench/A"), kb = KeyPair::derive("bench/B");
  const Cid cid = fixed_from_hex<Cid>("00000000000000000000000000000000000000aa");
  NonceSource nonces(1, "bench");
  const Amount cap = static_cast<Amount>(payments) + 1;
  const SignedState s0 = sign_initial_state(cid, {cap, 0, 0}, nonces.next(), ka, kb);
  PartyLedger la(cid, Role::A, ka.public_key, kb.public_key, s0, 8);
  PartyLedger lb(cid, Role::B, ka.public_key, kb.public_key, s0, 8);
  Watchtower wt(KeyPair::derive("bench/WT"));
  wt.enroll(cid, ka.public_key, kb.public_key);

  std::mutex mu;
  std::condition_variable cv;
  std::queue<Bytes> q;
  bool done = false;
  std::size_t accepted = 0;

  const auto start = std::chrono::steady_clock::now();
  std::thread tower([&] {
    for (;;) {
      std::unique_lock lock(mu);
      cv.wait(lock, [&] { return done || !q.empty(); });
      if (q.empty()) return;
      Bytes w = std::move(q.front());
      q.pop();
      lock.unlock();
      if (wt.ingest_wire(w).accepted()) ++accepted;
    }
  });
  for (std::size_t i = 0; i < payments; ++i) {
    const auto p = propose_payment(la, ka, 1, nonces);
    const auto acc = accept_payment(lb, kb, decode_payment(encode(p)));
    complete_payment(la, decode_payment(encode(acc.reply)));
    {
      std::lock_guard lock(mu);
      q.push(encode(acc.submission));
    }
    cv.notify_one();
  }
  {
    std::lock_guard lock(mu);
    done = true;
  }
  cv.notify_one();
  tower.join();
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  nlohmann::json out{{"payments", payments},
                     {"accepted_by_watchtower", accepted},
                     {"total_ms", ms},
                     {"ms_per_exchange", payments ? ms / static_cast<double>(payments) : 0.0}};
  std::cout << out.dump(2) << "\n";
  return accepted == payments ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Payment channels with a fail-safe watchtower: simulator and tools"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a scenario file");
  std::string path, trace_out, metrics_out, snapshot;
  std::optional<std::uint64_t> seed;
  std::optional<Height> period, off_from, off_until;
  run->add_option("scenario", path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--trace", trace_out, "Write the JSONL trace here");
  run->add_option("--metrics", metrics_out, "Write the metrics report here");
  run->add_option("--period-blocks", period, "Watchtower update period in blocks");
  run->add_option("--offline-from", off_from, "Watchtower offline from this height");
  run->add_option("--offline-until", off_until, "Watchtower offline until this height (inclusive)");
  run->add_option("--snapshot-path", snapshot, "Watchtower state log");

  auto* formats = app.add_subcommand("verify-formats", "Check encoders against the golden vectors");
  bool print = false;
  formats->add_flag("--print", print, "Print the vectors built by this binary instead of checking");

  auto* bench = app.add_subcommand("bench-throughput", "Time off-chain payment exchanges");
  std::size_t payments = 1000;
  bench->add_option("--payments", payments, "Number of payments")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  if (*run) return cmd_run(path, seed, trace_out, metrics_out, period, off_from, off_until, snapshot);
  if (*formats) return cmd_verify_formats(print);
  return cmd_bench_throughput(payments);
}
