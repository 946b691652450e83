#include "cbdc/history_tree.hpp"

#include <algorithm>
#include <stdexcept>

namespace cbdc {

namespace {

uint64_t pow2_floor(uint64_t n)
{
    uint64_t p = 1;
    while (p * 2 <= n)
        p *= 2;
    return p;
}

uint64_t capacity_for(uint64_t n)
{
    uint64_t p = 1;
    while (p < n)
        p *= 2;
    return p;
}

uint8_t level_of(uint64_t size)
{
    uint8_t l = 0;
    while ((uint64_t(1) << l) < size)
        ++l;
    return l;
}

using NodeKey = std::pair<uint64_t, uint64_t>; // (start, size)

// Largest-first complete-subtree decomposition of [0, n).
void decomp_prefix(uint64_t n, std::vector<NodeKey>& out)
{
    uint64_t start = 0;
    while (start < n) {
        uint64_t size = pow2_floor(n - start);
        out.push_back({start, size});
        start += size;
    }
}

// Aligned decomposition of [from, to): each piece starts at a multiple of
// its size, so every piece is a node of the virtual tree.
void decomp_range(uint64_t from, uint64_t to, std::vector<NodeKey>& out)
{
    uint64_t pos = from;
    while (pos < to) {
        uint64_t align = pos & (~pos + 1); // largest power of two dividing pos
        uint64_t size = std::min(align, pow2_floor(to - pos));
        out.push_back({pos, size});
        pos += size;
    }
}

std::vector<NodeKey> canonical_inc_nodes(uint64_t from, uint64_t to)
{
    std::vector<NodeKey> keys;
    decomp_prefix(from, keys);
    decomp_range(from, to, keys);
    return keys;
}

Digest eval_from_map(uint64_t start, uint64_t size, uint64_t version, const std::map<NodeKey, Digest>& nodes,
                     const std::map<uint64_t, Digest>* leaves)
{
    if (start + size <= version) {
        auto it = nodes.find({start, size});
        if (it != nodes.end())
            return it->second;
    }
    if (size == 1) {
        if (leaves) {
            auto it = leaves->find(start);
            if (it != leaves->end())
                return it->second;
        }
        throw std::invalid_argument("tree eval: missing node data");
    }
    uint64_t half = size / 2;
    if (version <= start + half)
        return eval_from_map(start, half, version, nodes, leaves);
    return mk_node_hash(eval_from_map(start, half, version, nodes, leaves),
                        eval_from_map(start + half, half, version, nodes, leaves));
}

std::map<NodeKey, Digest> node_map(const std::vector<ProofNode>& nodes)
{
    std::map<NodeKey, Digest> m;
    for (const auto& n : nodes) {
        auto key = NodeKey{n.start, uint64_t(1) << n.level};
        if (!m.emplace(key, n.hash).second)
            throw std::invalid_argument("tree proof: duplicate node");
    }
    return m;
}

void encode_proof_node(Encoder& e, const ProofNode& n)
{
    e.put_u64(n.start);
    e.put_u8(n.level);
    e.put_digest(n.hash);
}

ProofNode decode_proof_node(Decoder& d)
{
    ProofNode n;
    n.start = d.u64();
    n.level = d.u8();
    if (n.level > 62)
        throw DecodeError("proof node level out of range");
    n.hash = d.digest();
    return n;
}

} // namespace

void IncrementalProof::encode(Encoder& e) const
{
    e.put_tag(WireTag::incremental_proof);
    e.put_u64(from_version);
    e.put_u64(to_version);
    e.put_list(nodes, encode_proof_node);
}

IncrementalProof IncrementalProof::decode(Decoder& d)
{
    d.expect_tag(WireTag::incremental_proof);
    IncrementalProof p;
    p.from_version = d.u64();
    p.to_version = d.u64();
    p.nodes = d.list<ProofNode>(decode_proof_node);
    return p;
}

void MembershipProof::encode(Encoder& e) const
{
    e.put_tag(WireTag::membership_proof);
    e.put_u64(ordinal);
    e.put_u64(version);
    e.put_list(path, [](Encoder& enc, const MerkleProof::Sibling& s) {
        enc.put_digest(s.hash);
        enc.put_bool(s.sibling_on_right);
    });
}

MembershipProof MembershipProof::decode(Decoder& d)
{
    d.expect_tag(WireTag::membership_proof);
    MembershipProof p;
    p.ordinal = d.u64();
    p.version = d.u64();
    p.path = d.list<MerkleProof::Sibling>([](Decoder& dec) {
        MerkleProof::Sibling s;
        s.hash = dec.digest();
        s.sibling_on_right = dec.boolean();
        return s;
    });
    return p;
}

void TreeWitness::encode(Encoder& e) const
{
    e.put_tag(WireTag::state_witness);
    e.put_u64(leaf_count);
    e.put_list(nodes, encode_proof_node);
}

TreeWitness TreeWitness::decode(Decoder& d)
{
    d.expect_tag(WireTag::state_witness);
    TreeWitness w;
    w.leaf_count = d.u64();
    w.nodes = d.list<ProofNode>(decode_proof_node);
    return w;
}

Commitment HistoryTree::add(ByteView record)
{
    return add_leaf_hash(mk_leaf_hash(record));
}

Commitment HistoryTree::add_leaf_hash(const Digest& leaf_hash)
{
    leaves_.push_back(leaf_hash);
    return commitment_at(leaves_.size());
}

Digest HistoryTree::eval(uint64_t start, uint64_t size, uint64_t version) const
{
    if (size == 1)
        return leaves_[start];
    bool complete = start + size <= version;
    if (complete) {
        auto it = frozen_.find({start, size});
        if (it != frozen_.end())
            return it->second;
    }
    uint64_t half = size / 2;
    Digest result;
    if (version <= start + half) {
        result = eval(start, half, version);
    } else {
        result = mk_node_hash(eval(start, half, version), eval(start + half, half, version));
        if (complete)
            frozen_.emplace(NodeKey{start, size}, result);
    }
    return result;
}

Digest HistoryTree::root_at(uint64_t version) const
{
    if (version == 0 || version > leaves_.size())
        throw std::out_of_range("history tree: version out of range");
    return eval(0, capacity_for(version), version);
}

Commitment HistoryTree::commitment_at(uint64_t version) const
{
    return Commitment{version, root_at(version)};
}

bool HistoryTree::produced(const Commitment& c) const
{
    if (c.version == 0 || c.version > leaves_.size())
        return false;
    return root_at(c.version) == c.root;
}

MembershipProof HistoryTree::mem_proof(uint64_t ordinal, uint64_t version) const
{
    if (version == 0 || version > leaves_.size())
        throw std::out_of_range("mem_proof: version out of range");
    if (ordinal == 0 || ordinal > version)
        throw std::out_of_range("mem_proof: record ordinal beyond version");

    MembershipProof proof;
    proof.ordinal = ordinal;
    proof.version = version;

    // Descend from the root; collect siblings bottom-up.
    uint64_t target = ordinal - 1;
    std::vector<MerkleProof::Sibling> path;
    uint64_t start = 0, size = capacity_for(version);
    std::vector<std::pair<uint64_t, uint64_t>> stack; // nodes where a sibling exists
    while (size > 1) {
        uint64_t half = size / 2;
        if (version <= start + half) {
            size = half; // pass-through, no sibling
            continue;
        }
        stack.push_back({start, size});
        if (target < start + half) {
            size = half;
        } else {
            start += half;
            size = half;
        }
    }
    for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
        uint64_t s = it->first, sz = it->second, half = sz / 2;
        if (target < s + half)
            path.push_back({eval(s + half, half, version), true});
        else
            path.push_back({eval(s, half, version), false});
    }
    proof.path = std::move(path);
    return proof;
}

MembershipProof HistoryTree::mem_proof(uint64_t ordinal, const Commitment& c) const
{
    if (!produced(c))
        throw std::invalid_argument("mem_proof: unknown commitment");
    return mem_proof(ordinal, c.version);
}

IncrementalProof HistoryTree::inc_proof(uint64_t from_version, uint64_t to_version) const
{
    if (from_version == 0 || from_version > to_version)
        throw std::invalid_argument("inc_proof: bad version range");
    if (to_version > leaves_.size())
        throw std::out_of_range("inc_proof: version beyond tree");

    IncrementalProof proof;
    proof.from_version = from_version;
    proof.to_version = to_version;
    for (const auto& [start, size] : canonical_inc_nodes(from_version, to_version))
        proof.nodes.push_back({start, level_of(size), eval(start, size, to_version)});
    return proof;
}

IncrementalProof HistoryTree::inc_proof(const Commitment& from, const Commitment& to) const
{
    if (from.version > to.version)
        throw std::invalid_argument("inc_proof: from > to");
    if (!produced(from) || !produced(to))
        throw std::invalid_argument("inc_proof: unknown commitment");
    return inc_proof(from.version, to.version);
}

bool mem_verify_leaf(const MembershipProof& proof, uint64_t ordinal, const Digest& leaf_hash, const Commitment& c)
{
    if (proof.ordinal != ordinal || proof.version != c.version)
        return false;
    if (ordinal == 0 || ordinal > c.version || c.version == 0)
        return false;

    // Recompute the expected sibling sides from (ordinal, version) so a
    // proof for one position cannot be replayed for another.
    uint64_t target = ordinal - 1;
    uint64_t start = 0, size = capacity_for(c.version);
    std::vector<bool> sides; // true = sibling on right, root-down
    while (size > 1) {
        uint64_t half = size / 2;
        if (c.version <= start + half) {
            size = half;
            continue;
        }
        if (target < start + half) {
            sides.push_back(true);
            size = half;
        } else {
            sides.push_back(false);
            start += half;
            size = half;
        }
    }
    std::reverse(sides.begin(), sides.end()); // leaf-up order
    if (sides.size() != proof.path.size())
        return false;

    Digest h = leaf_hash;
    for (size_t k = 0; k < sides.size(); ++k) {
        const auto& s = proof.path[k];
        if (s.sibling_on_right != sides[k])
            return false;
        h = s.sibling_on_right ? mk_node_hash(h, s.hash) : mk_node_hash(s.hash, h);
    }
    return h == c.root;
}

bool mem_verify(const MembershipProof& proof, uint64_t ordinal, ByteView record, const Commitment& c)
{
    return mem_verify_leaf(proof, ordinal, mk_leaf_hash(record), c);
}

bool inc_verify(const IncrementalProof& proof, const Commitment& from, const Commitment& to)
{
    if (proof.from_version != from.version || proof.to_version != to.version)
        return false;
    if (from.version == 0 || from.version > to.version)
        return false;
    try {
        auto expected = canonical_inc_nodes(from.version, to.version);
        auto nodes = node_map(proof.nodes);
        if (nodes.size() != expected.size())
            return false;
        for (const auto& key : expected)
            if (nodes.find(key) == nodes.end())
                return false;
        Digest root_from = eval_from_map(0, capacity_for(from.version), from.version, nodes, nullptr);
        Digest root_to = eval_from_map(0, capacity_for(to.version), to.version, nodes, nullptr);
        return root_from == from.root && root_to == to.root;
    } catch (const std::exception&) {
        return false;
    }
}

Commitment reduce_root(const IncrementalProof& proof)
{
    if (proof.from_version == 0 || proof.from_version > proof.to_version)
        throw std::invalid_argument("reduce_root: bad version range");
    auto expected = canonical_inc_nodes(proof.from_version, proof.to_version);
    auto nodes = node_map(proof.nodes);
    if (nodes.size() != expected.size())
        throw std::invalid_argument("reduce_root: malformed node set");
    for (const auto& key : expected)
        if (nodes.find(key) == nodes.end())
            throw std::invalid_argument("reduce_root: malformed node set");
    return Commitment{proof.to_version, eval_from_map(0, capacity_for(proof.to_version), proof.to_version, nodes, nullptr)};
}

void fh_update(FrozenHashCache& cache, const Digest& leaf_hash, uint64_t id)
{
    if (id != cache.count + 1)
        throw std::invalid_argument("fh_update: id must be count + 1");
    cache.entries.push_back(leaf_hash);
    for (uint64_t i = 2; i <= id; i *= 2) {
        if (id % i == 0) {
            size_t n = cache.entries.size();
            cache.entries[n - 2] = mk_node_hash(cache.entries[n - 2], cache.entries[n - 1]);
            cache.entries.pop_back();
        } else {
            break; // higher powers cannot divide id either
        }
    }
    cache.count = id;
}

Digest fh_reduce(const FrozenHashCache& cache)
{
    if (cache.count == 0 || cache.entries.empty())
        throw std::invalid_argument("fh_reduce: empty cache");
    Digest r = cache.entries.back();
    for (size_t k = cache.entries.size() - 1; k-- > 0;)
        r = mk_node_hash(cache.entries[k], r);
    return r;
}

TreeWitness build_tree_witness(const std::vector<Digest>& leaves, const std::set<uint64_t>& included)
{
    TreeWitness w;
    w.leaf_count = leaves.size();
    uint64_t n = leaves.size();

    // Emit maximal complete subtrees containing no included leaf.
    struct Collector {
        const std::vector<Digest>& leaves;
        const std::set<uint64_t>& included;
        uint64_t n;
        std::vector<ProofNode>& out;

        Digest eval(uint64_t start, uint64_t size) const
        {
            if (size == 1)
                return leaves[start];
            uint64_t half = size / 2;
            if (n <= start + half)
                return eval(start, half);
            return mk_node_hash(eval(start, half), eval(start + half, half));
        }

        void collect(uint64_t start, uint64_t size)
        {
            if (start >= n)
                return;
            bool complete = start + size <= n;
            auto lo = included.lower_bound(start);
            bool touched = lo != included.end() && *lo < start + size;
            if (complete && !touched) {
                out.push_back({start, level_of(size), eval(start, size)});
                return;
            }
            if (size == 1)
                return; // included leaf: supplied at eval time
            uint64_t half = size / 2;
            collect(start, half);
            collect(start + half, half);
        }
    };
    if (n > 0) {
        Collector c{leaves, included, n, w.nodes};
        c.collect(0, capacity_for(n));
    }
    return w;
}

Digest eval_tree_witness(const TreeWitness& witness, uint64_t leaf_count, const std::map<uint64_t, Digest>& known_leaves)
{
    if (leaf_count == 0)
        throw std::invalid_argument("eval_tree_witness: empty tree");
    auto nodes = node_map(witness.nodes);
    return eval_from_map(0, capacity_for(leaf_count), leaf_count, nodes, &known_leaves);
}

} // namespace cbdc
