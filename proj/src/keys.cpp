#include "cbdc/keys.hpp"

#include <openssl/evp.h>

#include <memory>
#include <stdexcept>

namespace cbdc {

namespace {

struct PkeyDeleter {
    void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct CtxDeleter {
    void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
};
using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, CtxDeleter>;

PkeyPtr private_key(const SecretKey& sk)
{
    PkeyPtr key(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, sk.seed.data(), sk.seed.size()));
    if (!key)
        throw std::runtime_error("ed25519 private key construction failed");
    return key;
}

PkeyPtr public_key(const PublicKey& pk)
{
    PkeyPtr key(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, pk.bytes.data(), pk.bytes.size()));
    if (!key)
        throw std::runtime_error("ed25519 public key construction failed");
    return key;
}

// Message actually passed to ed25519: scheme tag byte || msg.
Bytes tagged_message(SigScheme scheme, ByteView msg)
{
    Bytes m;
    m.reserve(msg.size() + 1);
    m.push_back(static_cast<uint8_t>(scheme));
    m.insert(m.end(), msg.begin(), msg.end());
    return m;
}

} // namespace

KeyPair keygen_from_seed(SigScheme scheme, ByteView seed32)
{
    if (seed32.size() != 32)
        throw std::invalid_argument("keygen: need 32 seed bytes");
    KeyPair kp;
    kp.sk.scheme = scheme;
    std::copy(seed32.begin(), seed32.end(), kp.sk.seed.begin());

    PkeyPtr key = private_key(kp.sk);
    size_t len = 32;
    kp.pk.scheme = scheme;
    if (EVP_PKEY_get_raw_public_key(key.get(), kp.pk.bytes.data(), &len) != 1 || len != 32)
        throw std::runtime_error("ed25519 public key derivation failed");
    return kp;
}

KeyPair keygen(SigScheme scheme, uint64_t seed)
{
    Bytes material;
    material.push_back(static_cast<uint8_t>(scheme));
    for (int i = 7; i >= 0; --i)
        material.push_back(static_cast<uint8_t>(seed >> (8 * i)));
    Digest d = sha256_tagged(hash_tag::key_seed, material);
    return keygen_from_seed(scheme, d.view());
}

Signature sign(const SecretKey& sk, ByteView msg)
{
    Bytes m = tagged_message(sk.scheme, msg);
    PkeyPtr key = private_key(sk);
    MdCtxPtr ctx(EVP_MD_CTX_new());
    Signature sig;
    sig.scheme = sk.scheme;
    size_t len = sig.bytes.size();
    if (EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1 ||
        EVP_DigestSign(ctx.get(), sig.bytes.data(), &len, m.data(), m.size()) != 1 || len != 64)
        throw std::runtime_error("ed25519 sign failed");
    return sig;
}

bool verify(const PublicKey& pk, ByteView msg, const Signature& sig)
{
    if (pk.scheme != sig.scheme)
        return false;
    Bytes m = tagged_message(pk.scheme, msg);
    PkeyPtr key;
    try {
        key = public_key(pk);
    } catch (const std::exception&) {
        return false;
    }
    MdCtxPtr ctx(EVP_MD_CTX_new());
    if (EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1)
        return false;
    return EVP_DigestVerify(ctx.get(), sig.bytes.data(), sig.bytes.size(), m.data(), m.size()) == 1;
}

} // namespace cbdc
