#pragma once

#include <array>
#include <compare>
#include <cstring>
#include <stdexcept>

#include "cbdc/bytes.hpp"

namespace cbdc {

/// 32-byte hash output. A zero digest doubles as the "unset" sentinel
/// (the ⊥ value of ledger roots before the first snapshot).
struct Digest {
    std::array<uint8_t, 32> bytes{};

    auto operator<=>(const Digest&) const = default;

    bool is_zero() const
    {
        for (auto b : bytes)
            if (b != 0)
                return false;
        return true;
    }

    ByteView view() const { return ByteView(bytes.data(), bytes.size()); }
    std::string hex() const { return to_hex(view()); }

    static Digest from_bytes(ByteView data)
    {
        Digest d;
        if (data.size() != 32)
            throw std::invalid_argument("Digest::from_bytes: need 32 bytes");
        std::memcpy(d.bytes.data(), data.data(), 32);
        return d;
    }
};

} // namespace cbdc
