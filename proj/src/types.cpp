#include "paychan/types.hpp"

namespace paychan {

std::string to_string(const ChannelState& s) {
  return "(" + u128_to_string(s.bal_a) + "," + u128_to_string(s.bal_b) + "," + u128_to_string(s.idx) + ")";
}

Amount scale_floor(Amount amount, Fraction fraction) {
  if (fraction.den == 0 || fraction.at_least_one()) return amount;
  // amount = q*den + rem, so amount*num/den = q*num + rem*num/den with rem*num < den^2 < 2^128.
  const Amount den = fraction.den;
  const Amount q = amount / den;
  const Amount rem = amount % den;
  return q * fraction.num + (rem * fraction.num) / den;
}

std::string to_string(const Fraction& f) { return std::to_string(f.num) + "/" + std::to_string(f.den); }

}  // namespace paychan
