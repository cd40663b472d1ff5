#include "paychan/calls.hpp"

namespace paychan {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void put_state(Bytes& out, const ChannelState& s) { append(out, encode_state(s)); }

}  // namespace

std::string_view method_name(const Call& call) {
  return std::visit(
      overloaded{
          [](const calls::ChannelSetup&) { return "channel.setup"; },
          [](const calls::ChannelDeposit&) { return "channel.deposit"; },
          [](const calls::ChannelClose&) { return "channel.close"; },
          [](const calls::ChannelDispute&) { return "channel.dispute"; },
          [](const calls::ChannelPayout&) { return "channel.payout"; },
          [](const calls::ChannelChallenge&) { return "channel.challenge"; },
          [](const calls::TowerDeposit&) { return "tower.deposit"; },
          [](const calls::TowerWithdraw&) { return "tower.withdraw"; },
          [](const calls::TowerClose&) { return "tower.close"; },
          [](const calls::TowerUpdate&) { return "tower.update"; },
          [](const calls::AssertionSetup&) { return "assertion.setup"; },
          [](const calls::AssertionDeposit&) { return "assertion.deposit"; },
          [](const calls::AssertionClose&) { return "assertion.close"; },
          [](const calls::AssertionDispute&) { return "assertion.dispute"; },
          [](const calls::AssertionPayout&) { return "assertion.payout"; },
      },
      call);
}

Bytes encode_args(const Call& call) {
  Bytes out;
  std::visit(overloaded{
                 [&](const calls::ChannelSetup& c) {
                   append(out, c.tower.view());
                   append(out, c.wt_key.view());
                 },
                 [&](const calls::ChannelDeposit&) {},
                 [&](const calls::ChannelClose& c) {
                   put_state(out, c.state);
                   append(out, c.r.view());
                   append(out, c.sig_a.view());
                   append(out, c.sig_b.view());
                 },
                 [&](const calls::ChannelDispute& c) {
                   put_state(out, c.state);
                   append(out, c.r.view());
                   append(out, c.sig_a.view());
                   append(out, c.sig_b.view());
                 },
                 [&](const calls::ChannelPayout& c) {
                   put_state(out, c.state);
                   out.push_back(c.is_pay ? 1 : 0);
                 },
                 [&](const calls::ChannelChallenge& c) {
                   put_state(out, c.state);
                   append(out, c.r.view());
                   append(out, c.wt_sig.view());
                 },
                 [&](const calls::TowerDeposit& c) { append(out, c.cid.view()); },
                 [&](const calls::TowerWithdraw& c) {
                   append(out, c.cid.view());
                   append(out, c.victim.view());
                   append_u64(out, c.percentage.num);
                   append_u64(out, c.percentage.den);
                 },
                 [&](const calls::TowerClose& c) {
                   append(out, c.cid.view());
                   put_state(out, c.state);
                 },
                 [&](const calls::TowerUpdate& c) { append(out, c.confs.encode()); },
                 [&](const calls::AssertionSetup&) {},
                 [&](const calls::AssertionDeposit&) {},
                 [&](const calls::AssertionClose& c) { append(out, encode(c.assertion)); },
                 [&](const calls::AssertionDispute& c) { append(out, encode(c.assertion)); },
                 [&](const calls::AssertionPayout&) {},
             },
             call);
  return out;
}

}  // namespace paychan
