#pragma once

// Reference messages built from fixed keys and inputs. The frozen hex lives next to the
// builder so `paychan verify-formats` can detect any encoding drift.

#include <string>
#include <vector>

#include "paychan/bytes.hpp"

namespace paychan {

struct GoldenVector {
  std::string name;
  Bytes encoded;
};

/// Rebuilds every reference message from its fixed inputs.
std::vector<GoldenVector> build_golden_vectors();

/// name -> expected hex, as frozen when the formats were fixed.
const std::vector<std::pair<std::string, std::string>>& frozen_golden_hex();

struct GoldenCheck {
  std::string name;
  bool encoding_matches = false;
  bool roundtrips = false;
  std::size_t size = 0;
};

/// Compares rebuilt vectors with the frozen hex and decodes each one back.
std::vector<GoldenCheck> check_golden_vectors();

}  // namespace paychan
