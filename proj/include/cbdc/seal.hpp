#pragma once

#include <array>
#include <optional>

#include "cbdc/encoding.hpp"
#include "cbdc/rng.hpp"

namespace cbdc {

/// X25519 keypair used only for sealing censorship requests to the
/// enclave (and responses back to the client).
struct EncKeyPair {
    std::array<uint8_t, 32> sk{};
    std::array<uint8_t, 32> pk{};

    static EncKeyPair generate(Rng& rng);
    static EncKeyPair from_seed(ByteView seed32);
};

/// Ephemeral-key sealed box: X25519 agreement, SHA-256 KDF, AES-256-GCM.
struct SealedBox {
    std::array<uint8_t, 32> ephemeral_pk{};
    Bytes ciphertext;
    std::array<uint8_t, 16> auth_tag{};

    void encode(Encoder& e) const
    {
        e.put_tag(WireTag::sealed_box);
        e.put_fixed(ByteView(ephemeral_pk.data(), 32));
        e.put_var(ciphertext);
        e.put_fixed(ByteView(auth_tag.data(), 16));
    }

    static SealedBox decode(Decoder& d)
    {
        d.expect_tag(WireTag::sealed_box);
        SealedBox b;
        Bytes pk = d.fixed(32);
        std::copy(pk.begin(), pk.end(), b.ephemeral_pk.begin());
        b.ciphertext = d.var();
        Bytes t = d.fixed(16);
        std::copy(t.begin(), t.end(), b.auth_tag.begin());
        return b;
    }
};

SealedBox seal(const std::array<uint8_t, 32>& recipient_pk, ByteView plaintext, Rng& rng);

/// Returns nullopt on authentication failure.
std::optional<Bytes> open(const EncKeyPair& kp, const SealedBox& box);

} // namespace cbdc
