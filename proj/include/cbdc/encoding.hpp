#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "cbdc/bytes.hpp"
#include "cbdc/digest.hpp"

namespace cbdc {

// Canonical encoding rules: fields in declaration order, unsigned integers
// big-endian fixed-width, variable-length fields u32-length-prefixed, lists
// u32-count-prefixed, optionals a single presence byte. Every top-level
// protocol object starts with its WireTag so encodings are injective across
// types.
enum class WireTag : uint8_t {
    micro_tx = 0x10,
    header = 0x11,
    receipt = 0x12,
    account_record = 0x13,
    locked_out = 0x14,
    locked_in = 0x15,
    partial_state = 0x16,
    event = 0x17,
    transition_pair = 0x20,
    access_ticket = 0x21,
    attestation_quote = 0x22,
    enclave_enc_keys = 0x23,
    chain_tx = 0x30,
    cens_payload = 0x31,
    sealed_box = 0x32,
    merkle_proof = 0x40,
    membership_proof = 0x41,
    incremental_proof = 0x42,
    commitment = 0x43,
    state_witness = 0x44,
    client_message = 0x50,
    node_response = 0x51,
    transfer_evidence = 0x52,
    phase_message = 0x53,
    public_key = 0x60,
    signature = 0x61,
};

class DecodeError : public std::runtime_error {
  public:
    explicit DecodeError(const std::string& what) : std::runtime_error("decode: " + what) {}
};

class Encoder {
  public:
    void put_u8(uint8_t v) { out_.push_back(v); }

    void put_bool(bool v) { out_.push_back(v ? 1 : 0); }

    void put_u16(uint16_t v)
    {
        out_.push_back(static_cast<uint8_t>(v >> 8));
        out_.push_back(static_cast<uint8_t>(v));
    }

    void put_u32(uint32_t v)
    {
        for (int i = 3; i >= 0; --i)
            out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }

    void put_u64(uint64_t v)
    {
        for (int i = 7; i >= 0; --i)
            out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }

    void put_tag(WireTag t) { put_u8(static_cast<uint8_t>(t)); }

    void put_digest(const Digest& d) { out_.insert(out_.end(), d.bytes.begin(), d.bytes.end()); }

    /// Fixed-width raw bytes (no length prefix); caller fixes the width.
    void put_fixed(ByteView data) { out_.insert(out_.end(), data.begin(), data.end()); }

    void put_var(ByteView data)
    {
        if (data.size() > 0xffffffffull)
            throw std::length_error("encode: field too large");
        put_u32(static_cast<uint32_t>(data.size()));
        out_.insert(out_.end(), data.begin(), data.end());
    }

    void put_string(const std::string& s) { put_var(ByteView(reinterpret_cast<const uint8_t*>(s.data()), s.size())); }

    template <typename T, typename Fn>
    void put_list(const std::vector<T>& items, Fn&& encode_one)
    {
        put_u32(static_cast<uint32_t>(items.size()));
        for (const auto& it : items)
            encode_one(*this, it);
    }

    const Bytes& bytes() const { return out_; }
    Bytes take() { return std::move(out_); }

  private:
    Bytes out_;
};

class Decoder {
  public:
    explicit Decoder(ByteView data) : data_(data) {}

    uint8_t u8()
    {
        need(1);
        return data_[pos_++];
    }

    bool boolean()
    {
        uint8_t v = u8();
        if (v > 1)
            throw DecodeError("bad bool");
        return v == 1;
    }

    uint16_t u16() { return static_cast<uint16_t>((static_cast<uint16_t>(u8()) << 8) | u8()); }

    uint32_t u32()
    {
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v = (v << 8) | u8();
        return v;
    }

    uint64_t u64()
    {
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v = (v << 8) | u8();
        return v;
    }

    void expect_tag(WireTag t)
    {
        if (u8() != static_cast<uint8_t>(t))
            throw DecodeError("wrong object tag");
    }

    Digest digest()
    {
        need(32);
        Digest d = Digest::from_bytes(data_.subspan(pos_, 32));
        pos_ += 32;
        return d;
    }

    Bytes fixed(size_t n)
    {
        need(n);
        Bytes out(data_.begin() + pos_, data_.begin() + pos_ + n);
        pos_ += n;
        return out;
    }

    Bytes var()
    {
        uint32_t n = u32();
        return fixed(n);
    }

    std::string string()
    {
        Bytes b = var();
        return std::string(b.begin(), b.end());
    }

    template <typename T, typename Fn>
    std::vector<T> list(Fn&& decode_one)
    {
        uint32_t n = u32();
        std::vector<T> out;
        out.reserve(std::min<uint32_t>(n, 4096));
        for (uint32_t i = 0; i < n; ++i)
            out.push_back(decode_one(*this));
        return out;
    }

    bool done() const { return pos_ == data_.size(); }

    void expect_end() const
    {
        if (!done())
            throw DecodeError("trailing bytes");
    }

  private:
    void need(size_t n) const
    {
        if (pos_ + n > data_.size())
            throw DecodeError("truncated input");
    }

    ByteView data_;
    size_t pos_ = 0;
};

/// Encode any object that exposes encode(Encoder&).
template <typename T>
Bytes encode_bytes(const T& obj)
{
    Encoder e;
    obj.encode(e);
    return e.take();
}

/// Decode a whole buffer; rejects trailing bytes.
template <typename T>
T decode_bytes(ByteView data)
{
    Decoder d(data);
    T obj = T::decode(d);
    d.expect_end();
    return obj;
}

} // namespace cbdc
