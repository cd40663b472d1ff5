#pragma once

// Data-parallel hot loops. Each OpenMP kernel has a serial twin with identical output;
// tests compare them and the benchmark times them.

#include <cstdint>
#include <span>
#include <vector>

#include "paychan/wire.hpp"

namespace paychan::kernels {

/// One submission with the two party keys it must verify against.
struct SignatureCheck {
  const WatchtowerSubmission* submission = nullptr;
  const PublicKey* pk_a = nullptr;
  const PublicKey* pk_b = nullptr;
};

/// out[i] = 1 iff both signatures of check i verify.
std::vector<std::uint8_t> verify_submissions(std::span<const SignatureCheck> checks);
std::vector<std::uint8_t> verify_submissions_serial(std::span<const SignatureCheck> checks);

/// The watchtower's stored commitment for a channel next to the state a closure revealed.
struct DecisionCase {
  bool known = false;
  Index stored_idx = 0;
  Digest stored_h;
  ChannelState state;
  Nonce r;
};

/// Allow iff the revealed state has the stored index and opens the stored commitment.
bool decide_one(const DecisionCase& c);

std::vector<std::uint8_t> decide_batch(std::span<const DecisionCase> cases);
std::vector<std::uint8_t> decide_batch_serial(std::span<const DecisionCase> cases);

}  // namespace paychan::kernels
