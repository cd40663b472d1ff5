#include "paychan/kernels.hpp"

#include <cstddef>

namespace paychan::kernels {

namespace {
bool check_one(const SignatureCheck& c) {
  const auto payload = c.submission->signed_payload();
  return verify(*c.pk_a, payload, c.submission->sig_a) && verify(*c.pk_b, payload, c.submission->sig_b);
}
}  // namespace

std::vector<std::uint8_t> verify_submissions(std::span<const SignatureCheck> checks) {
  std::vector<std::uint8_t> out(checks.size(), 0);
  const auto n = static_cast<std::ptrdiff_t>(checks.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = check_one(checks[i]) ? 1 : 0;
  return out;
}

std::vector<std::uint8_t> verify_submissions_serial(std::span<const SignatureCheck> checks) {
  std::vector<std::uint8_t> out;
  out.reserve(checks.size());
  for (const auto& c : checks) out.push_back(check_one(c) ? 1 : 0);
  return out;
}

bool decide_one(const DecisionCase& c) {
  if (!c.known || c.state.idx != c.stored_idx) return false;
  return hash_commit(c.state, c.r) == c.stored_h;
}

std::vector<std::uint8_t> decide_batch(std::span<const DecisionCase> cases) {
  std::vector<std::uint8_t> out(cases.size(), 0);
  const auto n = static_cast<std::ptrdiff_t>(cases.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = decide_one(cases[i]) ? 1 : 0;
  return out;
}

std::vector<std::uint8_t> decide_batch_serial(std::span<const DecisionCase> cases) {
  std::vector<std::uint8_t> out;
  out.reserve(cases.size());
  for (const auto& c : cases) out.push_back(decide_one(c) ? 1 : 0);
  return out;
}

}  // namespace paychan::kernels
