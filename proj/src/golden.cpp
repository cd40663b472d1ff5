#include "paychan/golden.hpp"

#include "paychan/confirmation_set.hpp"
#include "paychan/wire.hpp"

namespace paychan {

namespace {

struct Inputs {
  KeyPair a = KeyPair::derive("golden/A");
  KeyPair b = KeyPair::derive("golden/B");
  KeyPair wt = KeyPair::derive("golden/WT");
  Cid cid = fixed_from_hex<Cid>("00112233445566778899aabbccddeeff00112233");
  ChannelState state{7, 3, 1};
  Nonce r = NonceSource(0, "golden").next();
  Digest anchor = hash(ByteView(reinterpret_cast<const std::uint8_t*>("golden/anchor"), 13));
};

}  // namespace

std::vector<GoldenVector> build_golden_vectors() {
  const Inputs in;
  std::vector<GoldenVector> out;

  PaymentProposal p{in.cid, in.state, in.r, {}};
  p.sig = sign(in.a, p.signed_payload());
  out.push_back({"payment", encode(p)});

  const Digest h = hash_commit(in.state, in.r);
  const auto payload = payment_payload(in.cid, in.state.idx, h);
  WatchtowerSubmission s{in.cid, h, in.state.idx, sign(in.a, payload), sign(in.b, payload)};
  out.push_back({"submission", encode(s)});

  WatchtowerReceipt rc{in.cid, in.state.idx, h, {}};
  rc.sig_wt = sign(in.wt, rc.signed_payload());
  out.push_back({"receipt", encode(rc)});

  const auto ap = assertion_payload(in.cid, in.state, in.anchor);
  ShortLivedAssertion as{in.cid, in.state, in.anchor, sign(in.a, ap), sign(in.b, ap)};
  out.push_back({"assertion", encode(as)});

  out.push_back({"confs", ConfirmationSet{1, 0, 1, 1, 0, 0, 0, 0, 1}.encode()});
  return out;
}

const std::vector<std::pair<std::string, std::string>>& frozen_golden_hex() {
  static const std::vector<std::pair<std::string, std::string>> v = {
      {"payment",
       "00112233445566778899aabbccddeeff00112233000000000000000000000000000000070000000000000000000000000000000300000000000000000000000000000001bd3e70e6170793ece11b693cbc9596755376b4295062f8919fff4b14bdc4e1c41f86b3d3fbbc9cfbb1d0f454a357837d866e0df79c5378565b0db7e2be05423070ca4f90fd57a22c2c944246b3ade3db469256b6bc12fabe711cccf76c1fb40401"},
      {"submission",
       "00112233445566778899aabbccddeeff00112233638d7e02d8081b971c337b73d3d2b4a6fd9fe3a2d9261d835cef94a5a03672ed000000000000000000000000000000011f86b3d3fbbc9cfbb1d0f454a357837d866e0df79c5378565b0db7e2be05423070ca4f90fd57a22c2c944246b3ade3db469256b6bc12fabe711cccf76c1fb4040121afe23dacaf19d9bbd2dd6f1c1c2429ac576619dde8eddf23e893ce2e92f8311eb86d7e31634908562ac3d0c7eae07d99456b41b17ad0d3626af5d588bc570201"},
      {"receipt",
       "570200112233445566778899aabbccddeeff0011223300000000000000000000000000000001638d7e02d8081b971c337b73d3d2b4a6fd9fe3a2d9261d835cef94a5a03672ed3468081b70309c78d1908945e5dafa7f28b9588804e069d7c03e6716b1d7bde77bb130ae3937ff7771a3f2888b79cc38d2b9e76c6225dd8ff0b2f7db5f02fe0a02000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000"},
      {"assertion",
       "0300112233445566778899aabbccddeeff00112233000000000000000000000000000000070000000000000000000000000000000300000000000000000000000000000001b9b2aad181f4e371fdba9a78941b044f65d7578d35159a90d104b9fac47b1ef54cdeaf2640d1ad6214cdae36a1fed4ca709188b5fedc0cc2cc5c9308438714daa24c6fa6c94da893338fa416c629d5c58e6446d3f280f4d6151e8b47da188a0303a444e673230a5265db7b88cb70440291787af3f3bdf968c2ddb37de3e36b4f5a489fc59e4e2dcf18151c8ba0b8d90a830c4f750891562c8eecf17c18abf80e0e03"},
      {"confs",
       "0009b080"},
  };
  return v;
}

std::vector<GoldenCheck> check_golden_vectors() {
  const auto built = build_golden_vectors();
  const auto& frozen = frozen_golden_hex();
  std::vector<GoldenCheck> out;
  for (std::size_t i = 0; i < built.size(); ++i) {
    const auto& g = built[i];
    GoldenCheck c{g.name, false, false, g.encoded.size()};
    c.encoding_matches = i < frozen.size() && frozen[i].first == g.name && frozen[i].second == to_hex(g.encoded);
    try {
      Bytes again;
      if (g.name == "payment")
        again = encode(decode_payment(g.encoded));
      else if (g.name == "submission")
        again = encode(decode_submission(g.encoded));
      else if (g.name == "receipt")
        again = encode(decode_receipt(g.encoded));
      else if (g.name == "assertion")
        again = encode(decode_assertion(g.encoded));
      else
        again = ConfirmationSet::decode(g.encoded).encode();
      c.roundtrips = again == g.encoded;
    } catch (const DecodeError&) {
      c.roundtrips = false;
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace paychan
