#pragma once

#include <vector>

#include "cbdc/encoding.hpp"
#include "cbdc/hash.hpp"

namespace cbdc {

/// Proof of membership in a flat Merkle tree. Odd-width levels duplicate
/// their last node, so |siblings| = ceil(log2 n) for n > 1.
struct MerkleProof {
    struct Sibling {
        Digest hash;
        bool sibling_on_right = false;
    };

    uint64_t leaf_index = 0;
    std::vector<Sibling> siblings;

    void encode(Encoder& e) const
    {
        e.put_tag(WireTag::merkle_proof);
        e.put_u64(leaf_index);
        e.put_list(siblings, [](Encoder& enc, const Sibling& s) {
            enc.put_digest(s.hash);
            enc.put_bool(s.sibling_on_right);
        });
    }

    static MerkleProof decode(Decoder& d)
    {
        d.expect_tag(WireTag::merkle_proof);
        MerkleProof p;
        p.leaf_index = d.u64();
        p.siblings = d.list<Sibling>([](Decoder& dec) {
            Sibling s;
            s.hash = dec.digest();
            s.sibling_on_right = dec.boolean();
            return s;
        });
        return p;
    }
};

inline Digest mk_leaf_hash(ByteView data)
{
    return sha256_tagged(hash_tag::merkle_leaf, data);
}

inline Digest mk_node_hash(const Digest& left, const Digest& right)
{
    return sha256_pair(hash_tag::merkle_node, left, right);
}

/// Root over a non-empty item list; throws on empty input.
Digest mk_root(const std::vector<Bytes>& items);

/// Designated sentinel committed by headers whose batch produced no
/// entries (mk_root itself rejects empty lists).
Digest empty_set_root();

/// Root that maps the empty list to the sentinel.
Digest mk_root_or_empty(const std::vector<Bytes>& items);

MerkleProof mk_proof(uint64_t index, const std::vector<Bytes>& items);

bool mk_verify(const MerkleProof& proof, ByteView item, const Digest& root);

} // namespace cbdc
