#pragma once

#include <random>

#include "cbdc/bytes.hpp"
#include "cbdc/digest.hpp"
#include "cbdc/hash.hpp"

namespace cbdc {

/// Deterministic RNG for scenario reproducibility. All randomness in a run
/// (key seeds, transfer secrets, fuzz choices) flows from one root seed.
class Rng {
  public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t u64() { return gen_(); }

    /// Uniform in [0, n). n must be > 0.
    uint64_t below(uint64_t n) { return gen_() % n; }

    void fill(uint8_t* out, size_t n)
    {
        for (size_t i = 0; i < n; ++i)
            out[i] = static_cast<uint8_t>(gen_() >> 24);
    }

    Bytes bytes(size_t n)
    {
        Bytes out(n);
        fill(out.data(), n);
        return out;
    }

    /// Independent child stream, labeled so unrelated consumers do not
    /// share a sequence.
    Rng fork(const std::string& label)
    {
        Bytes seed_material;
        uint64_t base = gen_();
        for (int i = 0; i < 8; ++i)
            seed_material.push_back(static_cast<uint8_t>(base >> (8 * i)));
        seed_material.insert(seed_material.end(), label.begin(), label.end());
        Digest d = sha256_tagged(hash_tag::key_seed, seed_material);
        uint64_t s = 0;
        for (int i = 0; i < 8; ++i)
            s = (s << 8) | d.bytes[i];
        return Rng(s);
    }

  private:
    std::mt19937_64 gen_;
};

} // namespace cbdc
