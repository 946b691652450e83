#include "cbdc/merkle.hpp"

#include <stdexcept>

namespace cbdc {

Digest empty_set_root()
{
    static const Digest d = sha256_tagged(hash_tag::empty_set, ByteView{});
    return d;
}

Digest mk_root_or_empty(const std::vector<Bytes>& items)
{
    return items.empty() ? empty_set_root() : mk_root(items);
}

static std::vector<Digest> leaf_level(const std::vector<Bytes>& items)
{
    std::vector<Digest> level;
    level.reserve(items.size());
    for (const auto& it : items)
        level.push_back(mk_leaf_hash(it));
    return level;
}

static std::vector<Digest> next_level(const std::vector<Digest>& level)
{
    std::vector<Digest> up;
    up.reserve((level.size() + 1) / 2);
    for (size_t i = 0; i < level.size(); i += 2) {
        const Digest& left = level[i];
        const Digest& right = (i + 1 < level.size()) ? level[i + 1] : level[i]; // duplicate last
        up.push_back(mk_node_hash(left, right));
    }
    return up;
}

Digest mk_root(const std::vector<Bytes>& items)
{
    if (items.empty())
        throw std::invalid_argument("mk_root: empty item list");
    std::vector<Digest> level = leaf_level(items);
    while (level.size() > 1)
        level = next_level(level);
    return level[0];
}

MerkleProof mk_proof(uint64_t index, const std::vector<Bytes>& items)
{
    if (index >= items.size())
        throw std::out_of_range("mk_proof: index out of range");
    MerkleProof proof;
    proof.leaf_index = index;

    std::vector<Digest> level = leaf_level(items);
    uint64_t pos = index;
    while (level.size() > 1) {
        uint64_t sib = (pos % 2 == 0) ? pos + 1 : pos - 1;
        if (sib >= level.size())
            sib = pos; // duplicated last node is its own sibling
        proof.siblings.push_back({level[sib], pos % 2 == 0});
        level = next_level(level);
        pos /= 2;
    }
    return proof;
}

bool mk_verify(const MerkleProof& proof, ByteView item, const Digest& root)
{
    Digest h = mk_leaf_hash(item);
    uint64_t pos = proof.leaf_index;
    for (const auto& s : proof.siblings) {
        // The recorded side must be consistent with the claimed index.
        if (s.sibling_on_right != (pos % 2 == 0))
            return false;
        h = s.sibling_on_right ? mk_node_hash(h, s.hash) : mk_node_hash(s.hash, h);
        pos /= 2;
    }
    return h == root;
}

} // namespace cbdc
