#pragma once

#include "gkt/nat.hpp"

namespace gkt {

/// Miller-Rabin. Deterministic below 2^64 (first twelve prime bases);
/// above that, 40 rounds so the false-positive rate is below 2^-80.
/// Pure function of n.
bool is_probable_prime(const Nat& n);

}  // namespace gkt
