#include "cbdc/hash.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace cbdc {

std::string to_hex(ByteView data)
{
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (uint8_t b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

static int hex_nibble(char c)
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    throw std::invalid_argument("from_hex: bad character");
}

Bytes from_hex(const std::string& hex)
{
    if (hex.size() % 2 != 0)
        throw std::invalid_argument("from_hex: odd length");
    Bytes out(hex.size() / 2);
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<uint8_t>((hex_nibble(hex[2 * i]) << 4) | hex_nibble(hex[2 * i + 1]));
    return out;
}

static Digest digest_parts(std::initializer_list<ByteView> parts)
{
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx)
        throw std::runtime_error("sha256: ctx alloc failed");
    Digest d;
    unsigned int len = 0;
    bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1;
    for (const auto& p : parts)
        ok = ok && EVP_DigestUpdate(ctx, p.data(), p.size()) == 1;
    ok = ok && EVP_DigestFinal_ex(ctx, d.bytes.data(), &len) == 1 && len == 32;
    EVP_MD_CTX_free(ctx);
    if (!ok)
        throw std::runtime_error("sha256 failed");
    return d;
}

Digest sha256(ByteView data)
{
    return digest_parts({data});
}

Digest sha256_tagged(uint8_t tag, ByteView data)
{
    return digest_parts({ByteView(&tag, 1), data});
}

Digest sha256_pair(uint8_t tag, const Digest& a, const Digest& b)
{
    return digest_parts({ByteView(&tag, 1), a.view(), b.view()});
}

} // namespace cbdc
