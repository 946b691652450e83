#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cbdc/history_tree.hpp"
#include "cbdc/rng.hpp"

#include "tree_oracle.hpp"

using namespace cbdc;

static std::vector<Bytes> make_items(size_t n, uint64_t seed = 1)
{
    Rng rng(seed);
    std::vector<Bytes> items;
    for (size_t i = 0; i < n; ++i) {
        Bytes b = rng.bytes(8 + rng.below(24));
        b.push_back(static_cast<uint8_t>(i));
        items.push_back(b);
    }
    return items;
}

TEST_CASE("mk_root base cases")
{
    Bytes x = to_bytes("x"), y = to_bytes("y");
    CHECK(mk_root({x}) == mk_leaf_hash(x));
    CHECK(mk_root({x, y}) == mk_node_hash(mk_leaf_hash(x), mk_leaf_hash(y)));
    CHECK_THROWS(mk_root({}));
    CHECK(mk_root_or_empty({}) == empty_set_root());
}

TEST_CASE("mk_root matches naive reference builder")
{
    for (size_t n : {1, 2, 3, 4, 5, 6, 7, 8, 9, 15, 16, 17, 31, 33, 64}) {
        auto items = make_items(n, n);
        CHECK(mk_root(items) == oracle::naive_mk_root(items));
    }
}

TEST_CASE("mk proofs verify for every index and reject mismatches")
{
    for (size_t n = 1; n <= 32; ++n) {
        auto items = make_items(n, 100 + n);
        Digest root = mk_root(items);
        for (size_t i = 0; i < n; ++i) {
            MerkleProof p = mk_proof(i, items);
            CHECK(mk_verify(p, items[i], root));
            if (n > 1) {
                CHECK(p.siblings.size() == static_cast<size_t>(std::ceil(std::log2(double(n)))));
                // wrong item
                CHECK(!mk_verify(p, items[(i + 1) % n], root));
            } else {
                CHECK(p.siblings.empty());
            }
        }
        // wrong root
        MerkleProof p0 = mk_proof(0, items);
        Digest other = mk_root(make_items(n, 999 + n));
        CHECK(!mk_verify(p0, items[0], other));
    }
    CHECK_THROWS(mk_proof(5, make_items(5)));
}

TEST_CASE("history tree versions and roots match rebuild oracle")
{
    HistoryTree tree;
    auto items = make_items(64, 5);
    std::vector<Digest> leaf_hashes;
    for (size_t i = 0; i < items.size(); ++i) {
        Commitment c = tree.add(items[i]);
        CHECK(c.version == i + 1);
        leaf_hashes.push_back(mk_leaf_hash(items[i]));
        CHECK(c.root == oracle::naive_history_root(leaf_hashes, i + 1));
    }
    // historical roots stay reproducible
    for (uint64_t v = 1; v <= 64; ++v)
        CHECK(tree.root_at(v) == oracle::naive_history_root(leaf_hashes, v));
    CHECK(tree.root_at(1) == leaf_hashes[0]);
    CHECK_THROWS(tree.root_at(0));
    CHECK_THROWS(tree.root_at(65));
}

TEST_CASE("membership proofs: exhaustive for n <= 32")
{
    HistoryTree tree;
    auto items = make_items(32, 9);
    std::vector<Commitment> commits;
    for (auto& it : items)
        commits.push_back(tree.add(it));

    for (uint64_t j = 1; j <= 32; ++j) {
        for (uint64_t i = 1; i <= j; ++i) {
            MembershipProof p = tree.mem_proof(i, j);
            CHECK(mem_verify(p, i, items[i - 1], commits[j - 1]));
            // tampered record
            Bytes bad = items[i - 1];
            bad[0] ^= 0xff;
            CHECK(!mem_verify(p, i, bad, commits[j - 1]));
            // version mismatch: proof for version j against C_{j+1}
            if (j < 32)
                CHECK(!mem_verify(p, i, items[i - 1], commits[j]));
            // wrong ordinal
            if (i < j)
                CHECK(!mem_verify(p, i + 1, items[i], commits[j - 1]));
        }
        CHECK_THROWS(tree.mem_proof(j + 1, j));
    }
}

TEST_CASE("incremental proofs: exhaustive pairs for n <= 32")
{
    HistoryTree tree;
    auto items = make_items(32, 12);
    std::vector<Commitment> commits;
    for (auto& it : items)
        commits.push_back(tree.add(it));

    for (uint64_t i = 1; i <= 32; ++i) {
        for (uint64_t j = i; j <= 32; ++j) {
            IncrementalProof p = tree.inc_proof(commits[i - 1], commits[j - 1]);
            CHECK(inc_verify(p, commits[i - 1], commits[j - 1]));
            CHECK(reduce_root(p) == commits[j - 1]);
            // proof size bound
            CHECK(p.nodes.size() <= 2 * 6 + 1);
        }
    }
    // reflexive
    IncrementalProof r = tree.inc_proof(commits[4], commits[4]);
    CHECK(inc_verify(r, commits[4], commits[4]));
    CHECK_THROWS(tree.inc_proof(commits[5], commits[4]));
}

TEST_CASE("incremental proof rejects forked logs")
{
    auto items = make_items(16, 20);
    HistoryTree honest, fork;
    std::vector<Commitment> hc, fc;
    for (size_t i = 0; i < 16; ++i) {
        hc.push_back(honest.add(items[i]));
        Bytes alt = items[i];
        if (i >= 8)
            alt[0] ^= 0x55; // diverge after a shared prefix
        fc.push_back(fork.add(alt));
    }
    // Shared prefix commitments agree; divergent ones must not link.
    CHECK(hc[7] == fc[7]);
    IncrementalProof p = honest.inc_proof(hc[7], hc[15]);
    CHECK(inc_verify(p, hc[7], hc[15]));
    CHECK(!inc_verify(p, fc[9], hc[15]));
    CHECK(!inc_verify(p, hc[7], fc[15]));

    // A proof generated by the fork cannot link the honest prefix commitment
    // at a divergent version.
    IncrementalProof q = fork.inc_proof(fc[9], fc[15]);
    CHECK(inc_verify(q, fc[9], fc[15]));
    CHECK(!inc_verify(q, hc[9], fc[15]));
}

TEST_CASE("unknown commitments are rejected at proof generation")
{
    HistoryTree tree;
    auto items = make_items(8, 30);
    std::vector<Commitment> commits;
    for (auto& it : items)
        commits.push_back(tree.add(it));
    Commitment forged{4, sha256(to_bytes("nope"))};
    CHECK_THROWS(tree.inc_proof(forged, commits[7]));
    CHECK_THROWS(tree.mem_proof(2, forged));
    CHECK(tree.produced(commits[3]));
    CHECK(!tree.produced(forged));
}

TEST_CASE("reduce_root errors on malformed node sets")
{
    HistoryTree tree;
    auto items = make_items(12, 31);
    std::vector<Commitment> commits;
    for (auto& it : items)
        commits.push_back(tree.add(it));
    IncrementalProof p = tree.inc_proof(commits[4], commits[10]);
    CHECK(reduce_root(p) == commits[10]);

    IncrementalProof missing = p;
    missing.nodes.pop_back();
    CHECK_THROWS_AS(reduce_root(missing), std::invalid_argument);

    IncrementalProof extra = p;
    extra.nodes.push_back({63, 0, sha256(to_bytes("junk"))});
    CHECK_THROWS_AS(reduce_root(extra), std::invalid_argument);
}

TEST_CASE("frozen hash cache follows the append merge rule")
{
    Rng rng(40);
    FrozenHashCache cache;
    Digest h1 = sha256(rng.bytes(8));
    fh_update(cache, h1, 1);
    CHECK(cache.entries.size() == 1);
    CHECK(cache.entries[0] == h1);

    Digest h2 = sha256(rng.bytes(8));
    fh_update(cache, h2, 2);
    CHECK(cache.entries.size() == 1);
    CHECK(cache.entries[0] == mk_node_hash(h1, h2));

    CHECK_THROWS(fh_update(cache, h1, 2)); // id must be count+1

    // |entries| = popcount(id) for id up to 1024
    FrozenHashCache c2;
    for (uint64_t id = 1; id <= 1024; ++id) {
        fh_update(c2, sha256(rng.bytes(4)), id);
        CHECK(c2.entries.size() == static_cast<size_t>(__builtin_popcountll(id)));
    }
}

TEST_CASE("fh_reduce equals full rebuild at every version up to 1024")
{
    Rng rng(41);
    FrozenHashCache cache;
    HistoryTree tree;
    std::vector<Digest> leaf_hashes;
    for (uint64_t id = 1; id <= 1024; ++id) {
        Digest leaf = sha256(rng.bytes(16));
        leaf_hashes.push_back(leaf);
        fh_update(cache, leaf, id);
        Commitment c = tree.add_leaf_hash(leaf);
        Digest reduced = fh_reduce(cache);
        CHECK(reduced == c.root);
        if (id <= 64 || id % 97 == 0)
            CHECK(reduced == oracle::naive_history_root(leaf_hashes, id));
    }
    FrozenHashCache empty;
    CHECK_THROWS(fh_reduce(empty));
}

TEST_CASE("single-bit tampering flips verification (fuzzed)")
{
    HistoryTree tree;
    auto items = make_items(24, 50);
    std::vector<Commitment> commits;
    for (auto& it : items)
        commits.push_back(tree.add(it));
    Rng rng(51);

    int trials = 0;
    while (trials < 4000) {
        uint64_t j = 1 + rng.below(24);
        uint64_t i = 1 + rng.below(j);
        MembershipProof p = tree.mem_proof(i, j);
        // flip one bit somewhere in the proof path or commitment
        if (!p.path.empty() && rng.below(2) == 0) {
            auto& sib = p.path[rng.below(p.path.size())];
            sib.hash.bytes[rng.below(32)] ^= static_cast<uint8_t>(1u << rng.below(8));
            CHECK(!mem_verify(p, i, items[i - 1], commits[j - 1]));
        } else {
            Commitment c = commits[j - 1];
            c.root.bytes[rng.below(32)] ^= static_cast<uint8_t>(1u << rng.below(8));
            CHECK(!mem_verify(p, i, items[i - 1], c));
        }
        ++trials;
    }

    while (trials < 8000) {
        uint64_t i = 1 + rng.below(24);
        uint64_t j = i + rng.below(24 - i + 1);
        IncrementalProof p = tree.inc_proof(i, j);
        auto& node = p.nodes[rng.below(p.nodes.size())];
        node.hash.bytes[rng.below(32)] ^= static_cast<uint8_t>(1u << rng.below(8));
        CHECK(!inc_verify(p, commits[i - 1], commits[j - 1]));
        ++trials;
    }
}

TEST_CASE("tree witness recomputes roots across updates and appends")
{
    Rng rng(60);
    std::vector<Digest> leaves;
    for (int i = 0; i < 11; ++i)
        leaves.push_back(sha256(rng.bytes(8)));

    std::set<uint64_t> touched{0, 5, 10};
    TreeWitness w = build_tree_witness(leaves, touched);

    std::map<uint64_t, Digest> known;
    for (auto i : touched)
        known[i] = leaves[i];
    CHECK(eval_tree_witness(w, 11, known) == oracle::naive_history_root(leaves, 11));

    // update touched leaves and append two more
    auto updated = leaves;
    updated[5] = sha256(rng.bytes(8));
    known[5] = updated[5];
    updated.push_back(sha256(rng.bytes(8)));
    updated.push_back(sha256(rng.bytes(8)));
    known[11] = updated[11];
    known[12] = updated[12];
    CHECK(eval_tree_witness(w, 13, known) == oracle::naive_history_root(updated, 13));

    // missing leaf data must throw, not fabricate a root
    known.erase(5);
    CHECK_THROWS(eval_tree_witness(w, 13, known));
}

TEST_CASE("proof serialization round trips")
{
    HistoryTree tree;
    auto items = make_items(10, 70);
    std::vector<Commitment> commits;
    for (auto& it : items)
        commits.push_back(tree.add(it));

    MembershipProof mp = tree.mem_proof(3, 9);
    Bytes b = encode_bytes(mp);
    MembershipProof mp2 = decode_bytes<MembershipProof>(b);
    CHECK(mem_verify(mp2, 3, items[2], commits[8]));
    CHECK(encode_bytes(mp2) == b);

    IncrementalProof ip = tree.inc_proof(4, 10);
    Bytes b2 = encode_bytes(ip);
    IncrementalProof ip2 = decode_bytes<IncrementalProof>(b2);
    CHECK(inc_verify(ip2, commits[3], commits[9]));
}
