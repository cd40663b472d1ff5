// Serial vs OpenMP timings for the data-parallel kernels.

#include <benchmark/benchmark.h>

#include <random>

#include "paychan/kernels.hpp"
#include "paychan/scenario.hpp"

using namespace paychan;
using namespace paychan::kernels;

namespace {

struct SubmissionSet {
  KeyPair a = KeyPair::derive("bench/A");
  KeyPair b = KeyPair::derive("bench/B");
  std::vector<WatchtowerSubmission> subs;
  std::vector<SignatureCheck> checks;

  explicit SubmissionSet(std::size_t n) {
    NonceSource nonces(1);
    subs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      Cid cid;
      cid.bytes[18] = static_cast<std::uint8_t>(i >> 8);
      cid.bytes[19] = static_cast<std::uint8_t>(i);
      const ChannelState s{100, 0, i + 1};
      WatchtowerSubmission w{cid, hash_commit(s, nonces.next()), s.idx, {}, {}};
      w.sig_a = sign(a, w.signed_payload());
      w.sig_b = sign(b, w.signed_payload());
      subs.push_back(w);
    }
    for (const auto& s : subs) checks.push_back({&s, &a.public_key, &b.public_key});
  }
};

std::vector<DecisionCase> make_cases(std::size_t n) {
  NonceSource nonces(2);
  std::vector<DecisionCase> cases;
  for (std::size_t i = 0; i < n; ++i) {
    const ChannelState s{i, 2 * i, i};
    const Nonce r = nonces.next();
    cases.push_back({true, i - (i % 3 == 0 ? 1 : 0), hash_commit(s, r), s, r});
  }
  return cases;
}

std::vector<ScenarioConfig> make_scenarios(std::size_t n) {
  std::vector<ScenarioConfig> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto c = walkthrough_scenario(i % 2 ? std::optional<std::uint64_t>(1) : std::nullopt,
                                  i % 2 ? Strategy::StaleCloser : Strategy::None);
    c.seed = i;
    c.timeouts = {8, 32};
    c.record_trace = false;
    out.push_back(c);
  }
  return out;
}

void BM_verify_serial(benchmark::State& st) {
  SubmissionSet set(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(verify_submissions_serial(set.checks));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_verify_omp(benchmark::State& st) {
  SubmissionSet set(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(verify_submissions(set.checks));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_decide_serial(benchmark::State& st) {
  const auto cases = make_cases(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(decide_batch_serial(cases));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_decide_omp(benchmark::State& st) {
  const auto cases = make_cases(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(decide_batch(cases));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_scenarios_serial(benchmark::State& st) {
  const auto cfgs = make_scenarios(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(run_scenarios_serial(cfgs));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_scenarios_omp(benchmark::State& st) {
  const auto cfgs = make_scenarios(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(run_scenarios(cfgs));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

}  // namespace

BENCHMARK(BM_verify_serial)->Arg(64)->Arg(1024);
BENCHMARK(BM_verify_omp)->Arg(64)->Arg(1024);
BENCHMARK(BM_decide_serial)->Arg(1024)->Arg(16384);
BENCHMARK(BM_decide_omp)->Arg(1024)->Arg(16384);
BENCHMARK(BM_scenarios_serial)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_scenarios_omp)->Arg(16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
