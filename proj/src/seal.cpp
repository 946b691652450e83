#include "cbdc/seal.hpp"

#include <openssl/evp.h>

#include <cstring>
#include <memory>
#include <stdexcept>

#include "cbdc/hash.hpp"

namespace cbdc {

namespace {

struct PkeyDeleter {
    void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct PctxDeleter {
    void operator()(EVP_PKEY_CTX* c) const { EVP_PKEY_CTX_free(c); }
};
struct CipherCtxDeleter {
    void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
};
using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;
using CipherPtr = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

std::array<uint8_t, 32> x25519_pub(const std::array<uint8_t, 32>& sk)
{
    PkeyPtr key(EVP_PKEY_new_raw_private_key(EVP_PKEY_X25519, nullptr, sk.data(), sk.size()));
    if (!key)
        throw std::runtime_error("x25519 key construction failed");
    std::array<uint8_t, 32> pk{};
    size_t len = 32;
    if (EVP_PKEY_get_raw_public_key(key.get(), pk.data(), &len) != 1 || len != 32)
        throw std::runtime_error("x25519 public derivation failed");
    return pk;
}

std::array<uint8_t, 32> x25519_shared(const std::array<uint8_t, 32>& sk, const std::array<uint8_t, 32>& peer_pk)
{
    PkeyPtr me(EVP_PKEY_new_raw_private_key(EVP_PKEY_X25519, nullptr, sk.data(), sk.size()));
    PkeyPtr peer(EVP_PKEY_new_raw_public_key(EVP_PKEY_X25519, nullptr, peer_pk.data(), peer_pk.size()));
    if (!me || !peer)
        throw std::runtime_error("x25519 key construction failed");
    std::unique_ptr<EVP_PKEY_CTX, PctxDeleter> ctx(EVP_PKEY_CTX_new(me.get(), nullptr));
    std::array<uint8_t, 32> shared{};
    size_t len = 32;
    if (!ctx || EVP_PKEY_derive_init(ctx.get()) != 1 || EVP_PKEY_derive_set_peer(ctx.get(), peer.get()) != 1 ||
        EVP_PKEY_derive(ctx.get(), shared.data(), &len) != 1 || len != 32)
        throw std::runtime_error("x25519 derive failed");
    return shared;
}

// key = SHA256(tag || eph_pk || recipient_pk || shared); fresh key per
// message, so a fixed zero nonce is safe.
std::array<uint8_t, 32> session_key(const std::array<uint8_t, 32>& eph_pk, const std::array<uint8_t, 32>& recip_pk,
                                    const std::array<uint8_t, 32>& shared)
{
    Bytes material;
    material.insert(material.end(), eph_pk.begin(), eph_pk.end());
    material.insert(material.end(), recip_pk.begin(), recip_pk.end());
    material.insert(material.end(), shared.begin(), shared.end());
    return sha256_tagged(hash_tag::seal_key, material).bytes;
}

const uint8_t kZeroNonce[12] = {};

} // namespace

EncKeyPair EncKeyPair::from_seed(ByteView seed32)
{
    if (seed32.size() != 32)
        throw std::invalid_argument("EncKeyPair: need 32 seed bytes");
    EncKeyPair kp;
    std::copy(seed32.begin(), seed32.end(), kp.sk.begin());
    kp.pk = x25519_pub(kp.sk);
    return kp;
}

EncKeyPair EncKeyPair::generate(Rng& rng)
{
    Bytes seed = rng.bytes(32);
    return from_seed(seed);
}

SealedBox seal(const std::array<uint8_t, 32>& recipient_pk, ByteView plaintext, Rng& rng)
{
    EncKeyPair eph = EncKeyPair::generate(rng);
    auto shared = x25519_shared(eph.sk, recipient_pk);
    auto key = session_key(eph.pk, recipient_pk, shared);

    SealedBox box;
    box.ephemeral_pk = eph.pk;
    box.ciphertext.resize(plaintext.size());

    CipherPtr ctx(EVP_CIPHER_CTX_new());
    int len = 0;
    if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), kZeroNonce) != 1 ||
        (!plaintext.empty() &&
         EVP_EncryptUpdate(ctx.get(), box.ciphertext.data(), &len, plaintext.data(), static_cast<int>(plaintext.size())) != 1))
        throw std::runtime_error("seal: encrypt failed");
    int fin = 0;
    if (EVP_EncryptFinal_ex(ctx.get(), box.ciphertext.data() + len, &fin) != 1 ||
        EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, 16, box.auth_tag.data()) != 1)
        throw std::runtime_error("seal: finalize failed");
    return box;
}

std::optional<Bytes> open(const EncKeyPair& kp, const SealedBox& box)
{
    std::array<uint8_t, 32> shared;
    try {
        shared = x25519_shared(kp.sk, box.ephemeral_pk);
    } catch (const std::exception&) {
        return std::nullopt;
    }
    auto key = session_key(box.ephemeral_pk, kp.pk, shared);

    Bytes plain(box.ciphertext.size());
    CipherPtr ctx(EVP_CIPHER_CTX_new());
    int len = 0;
    if (EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), kZeroNonce) != 1)
        return std::nullopt;
    if (!box.ciphertext.empty() &&
        EVP_DecryptUpdate(ctx.get(), plain.data(), &len, box.ciphertext.data(), static_cast<int>(box.ciphertext.size())) != 1)
        return std::nullopt;
    std::array<uint8_t, 16> tag = box.auth_tag;
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, 16, tag.data()) != 1)
        return std::nullopt;
    int fin = 0;
    if (EVP_DecryptFinal_ex(ctx.get(), plain.data() + len, &fin) != 1)
        return std::nullopt;
    return plain;
}

} // namespace cbdc
