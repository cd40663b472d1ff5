#include "paychan/wire.hpp"

#include <algorithm>
#include <cstring>
#include <string>

namespace paychan {

namespace {

constexpr auto tag_byte(SigTag t) { return static_cast<std::uint8_t>(t); }

void expect_size(ByteView wire, std::size_t n, const char* what) {
  if (wire.size() != n)
    throw DecodeError(std::string(what) + ": expected " + std::to_string(n) + " bytes, got " +
                      std::to_string(wire.size()));
}

void expect_tag(const Signature& sig, SigTag tag, const char* what) {
  if (sig.bytes[64] != tag_byte(tag)) throw DecodeError(std::string(what) + ": bad message tag");
}

}  // namespace

AssertionPayload assertion_payload(const Cid& cid, const ChannelState& s, const Digest& anchor) {
  AssertionPayload out{};
  out[0] = tag_byte(SigTag::Assertion);
  std::memcpy(out.data() + 1, cid.bytes.data(), 20);
  auto enc = encode_state(s);
  std::memcpy(out.data() + 21, enc.data(), enc.size());
  std::memcpy(out.data() + 69, anchor.bytes.data(), 32);
  return out;
}

Bytes encode(const PaymentProposal& m) {
  Bytes out;
  out.reserve(PaymentProposal::kWireSize);
  append(out, m.cid.view());
  append(out, encode_state(m.state));
  append(out, m.r.view());
  append(out, m.sig.view());
  return out;
}

Bytes encode(const WatchtowerSubmission& m) {
  Bytes out;
  out.reserve(WatchtowerSubmission::kWireSize);
  append(out, m.cid.view());
  append(out, m.h_s.view());
  append_u128(out, m.idx);
  append(out, m.sig_a.view());
  append(out, m.sig_b.view());
  return out;
}

Bytes encode(const WatchtowerReceipt& m) {
  Bytes out;
  out.reserve(WatchtowerReceipt::kWireSize);
  append(out, WatchtowerReceipt::kFraming);
  append(out, m.cid.view());
  append_u128(out, m.idx);
  append(out, m.h_s.view());
  append(out, m.sig_wt.view());
  out.resize(WatchtowerReceipt::kWireSize, 0);
  return out;
}

Bytes encode(const ShortLivedAssertion& m) {
  Bytes out;
  out.reserve(ShortLivedAssertion::kWireSize);
  append(out, assertion_payload(m.cid, m.state, m.anchor));
  append(out, m.sig_a.view());
  append(out, m.sig_b.view());
  return out;
}

PaymentProposal decode_payment(ByteView wire) {
  expect_size(wire, PaymentProposal::kWireSize, "payment message");
  ByteReader in(wire);
  PaymentProposal m;
  m.cid = in.fixed<Cid>();
  m.state = decode_state(in.take(48));
  m.r = in.fixed<Nonce>();
  m.sig = in.fixed<Signature>();
  expect_tag(m.sig, SigTag::Payment, "payment message");
  return m;
}

WatchtowerSubmission decode_submission(ByteView wire) {
  expect_size(wire, WatchtowerSubmission::kWireSize, "watchtower submission");
  ByteReader in(wire);
  WatchtowerSubmission m;
  m.cid = in.fixed<Cid>();
  m.h_s = in.fixed<Digest>();
  m.idx = in.u128_be();
  m.sig_a = in.fixed<Signature>();
  m.sig_b = in.fixed<Signature>();
  expect_tag(m.sig_a, SigTag::Payment, "watchtower submission");
  expect_tag(m.sig_b, SigTag::Payment, "watchtower submission");
  return m;
}

WatchtowerReceipt decode_receipt(ByteView wire) {
  expect_size(wire, WatchtowerReceipt::kWireSize, "watchtower receipt");
  ByteReader in(wire);
  auto framing = in.take(2);
  if (!std::equal(framing.begin(), framing.end(), WatchtowerReceipt::kFraming.begin()))
    throw DecodeError("watchtower receipt: bad framing");
  WatchtowerReceipt m;
  m.cid = in.fixed<Cid>();
  m.idx = in.u128_be();
  m.h_s = in.fixed<Digest>();
  m.sig_wt = in.fixed<Signature>();
  expect_tag(m.sig_wt, SigTag::Receipt, "watchtower receipt");
  auto reserved = in.take(WatchtowerReceipt::kReserved);
  if (std::any_of(reserved.begin(), reserved.end(), [](std::uint8_t b) { return b != 0; }))
    throw DecodeError("watchtower receipt: reserved bytes must be zero");
  return m;
}

ShortLivedAssertion decode_assertion(ByteView wire) {
  expect_size(wire, ShortLivedAssertion::kWireSize, "short-lived assertion");
  ByteReader in(wire);
  if (in.u8() != tag_byte(SigTag::Assertion)) throw DecodeError("short-lived assertion: bad tag");
  ShortLivedAssertion m;
  m.cid = in.fixed<Cid>();
  m.state = decode_state(in.take(48));
  m.anchor = in.fixed<Digest>();
  m.sig_a = in.fixed<Signature>();
  m.sig_b = in.fixed<Signature>();
  // A proposal travels with the payee's slot still empty.
  const Signature empty{};
  const bool a_empty = m.sig_a == empty, b_empty = m.sig_b == empty;
  if (a_empty && b_empty) throw DecodeError("short-lived assertion: unsigned");
  if (!a_empty) expect_tag(m.sig_a, SigTag::Assertion, "short-lived assertion");
  if (!b_empty) expect_tag(m.sig_b, SigTag::Assertion, "short-lived assertion");
  return m;
}

}  // namespace paychan
