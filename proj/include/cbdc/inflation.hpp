#pragma once

#include <cstdint>

#include "cbdc/vm/types.hpp"

namespace cbdc {

struct Rational {
    uint64_t num = 0;
    uint64_t den = 1;

    auto operator<=>(const Rational&) const = default;
};

inline constexpr VirtualTime kSecondsPerYear = 365ull * 24 * 3600;

/// Issuance ceiling at a point in time: t_i0 · (1 + i_r)^k with
/// k = ⌊(now − created)/year⌋ + 1, floored to whole tokens. Exact
/// big-integer arithmetic; the same rule gates the enclave and the IPSC.
uint64_t allowed_issued(uint64_t t_i0, const Rational& rate, VirtualTime created_at, VirtualTime now);

} // namespace cbdc
