#pragma once

#include "cbdc/digest.hpp"

namespace cbdc {

// Domain-separation prefixes. Tree-internal tags follow the usual
// leaf/node split; everything else hashes a tagged canonical encoding.
namespace hash_tag {
inline constexpr uint8_t merkle_leaf = 0x00;
inline constexpr uint8_t merkle_node = 0x01;
inline constexpr uint8_t empty_set = 0x02;
inline constexpr uint8_t object = 0x03;
inline constexpr uint8_t state = 0x04;
inline constexpr uint8_t key_seed = 0x05;
inline constexpr uint8_t seal_key = 0x06;
inline constexpr uint8_t measurement = 0x07;
inline constexpr uint8_t address = 0x08;
} // namespace hash_tag

/// Plain SHA-256; the artifact's instantiation of h(·).
Digest sha256(ByteView data);

/// SHA-256 over tag || data.
Digest sha256_tagged(uint8_t tag, ByteView data);

/// SHA-256 over tag || a || b (tree node combination).
Digest sha256_pair(uint8_t tag, const Digest& a, const Digest& b);

} // namespace cbdc
