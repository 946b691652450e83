#pragma once

#include <array>

#include "cbdc/encoding.hpp"
#include "cbdc/hash.hpp"
#include "cbdc/rng.hpp"

namespace cbdc {

/// Σ_pb signs material verified on the public chain; Σ_tee signs
/// attestation-rooted material (access tickets, enclave identity).
/// The schemes are kept apart by a domain tag mixed into every signed
/// message, so a signature from one never verifies under the other.
enum class SigScheme : uint8_t {
    pb = 1,
    tee = 2,
};

struct PublicKey {
    SigScheme scheme = SigScheme::pb;
    std::array<uint8_t, 32> bytes{};

    auto operator<=>(const PublicKey&) const = default;

    void encode(Encoder& e) const
    {
        e.put_tag(WireTag::public_key);
        e.put_u8(static_cast<uint8_t>(scheme));
        e.put_fixed(ByteView(bytes.data(), bytes.size()));
    }

    static PublicKey decode(Decoder& d)
    {
        d.expect_tag(WireTag::public_key);
        PublicKey pk;
        uint8_t s = d.u8();
        if (s != 1 && s != 2)
            throw DecodeError("bad scheme");
        pk.scheme = static_cast<SigScheme>(s);
        Bytes b = d.fixed(32);
        std::copy(b.begin(), b.end(), pk.bytes.begin());
        return pk;
    }

    std::string hex() const { return to_hex(ByteView(bytes.data(), bytes.size())); }
};

struct SecretKey {
    SigScheme scheme = SigScheme::pb;
    std::array<uint8_t, 32> seed{}; // ed25519 raw private seed
};

struct Signature {
    SigScheme scheme = SigScheme::pb;
    std::array<uint8_t, 64> bytes{};

    auto operator<=>(const Signature&) const = default;

    void encode(Encoder& e) const
    {
        e.put_tag(WireTag::signature);
        e.put_u8(static_cast<uint8_t>(scheme));
        e.put_fixed(ByteView(bytes.data(), bytes.size()));
    }

    static Signature decode(Decoder& d)
    {
        d.expect_tag(WireTag::signature);
        Signature sig;
        uint8_t s = d.u8();
        if (s != 1 && s != 2)
            throw DecodeError("bad scheme");
        sig.scheme = static_cast<SigScheme>(s);
        Bytes b = d.fixed(64);
        std::copy(b.begin(), b.end(), sig.bytes.begin());
        return sig;
    }
};

struct KeyPair {
    SecretKey sk;
    PublicKey pk;
};

/// Deterministic keypair from a seed value (same seed, same keys).
KeyPair keygen(SigScheme scheme, uint64_t seed);

/// Keypair from explicit seed bytes.
KeyPair keygen_from_seed(SigScheme scheme, ByteView seed32);

Signature sign(const SecretKey& sk, ByteView msg);

/// Deterministic verification; false on any mismatch, including a
/// scheme mismatch between key and signature.
bool verify(const PublicKey& pk, ByteView msg, const Signature& sig);

} // namespace cbdc
