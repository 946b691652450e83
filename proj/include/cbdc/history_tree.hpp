#pragma once

#include <map>
#include <set>
#include <vector>

#include "cbdc/encoding.hpp"
#include "cbdc/merkle.hpp"

namespace cbdc {

/// Version j of the append-only log: the root over records r_1..r_j.
struct Commitment {
    uint64_t version = 0;
    Digest root;

    auto operator<=>(const Commitment&) const = default;

    void encode(Encoder& e) const
    {
        e.put_tag(WireTag::commitment);
        e.put_u64(version);
        e.put_digest(root);
    }

    static Commitment decode(Decoder& d)
    {
        d.expect_tag(WireTag::commitment);
        Commitment c;
        c.version = d.u64();
        c.root = d.digest();
        return c;
    }
};

/// A complete subtree (size 2^level starting at leaf `start`) together
/// with its hash. Complete subtrees are frozen: their hash never changes
/// as the log grows.
struct ProofNode {
    uint64_t start = 0;
    uint8_t level = 0;
    Digest hash;
};

/// Witnesses that the log fixed by the `to` commitment extends the log
/// fixed by `from`. Carries exactly the frozen subtrees decomposing
/// [0, from) plus the aligned decomposition of [from, to).
struct IncrementalProof {
    uint64_t from_version = 0;
    uint64_t to_version = 0;
    std::vector<ProofNode> nodes;

    void encode(Encoder& e) const;
    static IncrementalProof decode(Decoder& d);
};

/// Witnesses that a record is the i-th entry (1-based) of version j.
struct MembershipProof {
    uint64_t ordinal = 0; // 1-based record ordinal
    uint64_t version = 0;
    std::vector<MerkleProof::Sibling> path;

    void encode(Encoder& e) const;
    static MembershipProof decode(Decoder& d);
};

// The versioned hash layout: leaves fill a virtual power-of-two tree
// left to right; a parent whose right half is still empty takes its left
// child's hash unchanged, so the version-j root reduces to a right fold
// over the complete-subtree decomposition of j. That makes the frozen
// hash cache below equivalent to the full tree.

/// Append-only history tree over opaque records. One writer; proofs and
/// commitments are plain values.
class HistoryTree {
  public:
    /// Append a record; returns the new commitment (version = count).
    Commitment add(ByteView record);

    /// Append a pre-hashed leaf (already domain-tagged).
    Commitment add_leaf_hash(const Digest& leaf_hash);

    uint64_t version() const { return leaves_.size(); }

    /// Root at a historical version (1-based); throws if out of range.
    Digest root_at(uint64_t version) const;

    Commitment commitment_at(uint64_t version) const;

    /// True iff this tree produced the commitment.
    bool produced(const Commitment& c) const;

    MembershipProof mem_proof(uint64_t ordinal, uint64_t version) const;
    MembershipProof mem_proof(uint64_t ordinal, const Commitment& c) const;

    IncrementalProof inc_proof(uint64_t from_version, uint64_t to_version) const;
    IncrementalProof inc_proof(const Commitment& from, const Commitment& to) const;

  private:
    Digest eval(uint64_t start, uint64_t size, uint64_t version) const;

    std::vector<Digest> leaves_;
    mutable std::map<std::pair<uint64_t, uint64_t>, Digest> frozen_; // (start,size) -> hash
};

bool mem_verify(const MembershipProof& proof, uint64_t ordinal, ByteView record, const Commitment& c);

/// Variant for pre-hashed leaves.
bool mem_verify_leaf(const MembershipProof& proof, uint64_t ordinal, const Digest& leaf_hash, const Commitment& c);

bool inc_verify(const IncrementalProof& proof, const Commitment& from, const Commitment& to);

/// Recomputes the `to` commitment embedded in the proof; throws
/// std::invalid_argument on a malformed node set.
Commitment reduce_root(const IncrementalProof& proof);

/// The enclave's O(log n) log state: one hash per complete subtree of the
/// current version, |entries| = popcount(count).
struct FrozenHashCache {
    std::vector<Digest> entries;
    uint64_t count = 0;
};

/// Append leaf with 1-based id; requires id == cache.count + 1. Merges
/// trailing entries for every power of two dividing id.
void fh_update(FrozenHashCache& cache, const Digest& leaf_hash, uint64_t id);

/// Root at version cache.count; throws if the cache is empty.
Digest fh_reduce(const FrozenHashCache& cache);

/// Multiproof over a dense indexed Merkle accumulator (same layout as the
/// history tree): frozen subtrees covering every leaf outside `included`.
/// Evaluation accepts a possibly larger leaf count, so the same witness
/// recomputes the root after in-place updates and right-end appends.
struct TreeWitness {
    uint64_t leaf_count = 0;
    std::vector<ProofNode> nodes;

    void encode(Encoder& e) const;
    static TreeWitness decode(Decoder& d);
};

TreeWitness build_tree_witness(const std::vector<Digest>& leaves, const std::set<uint64_t>& included);

/// Root at `leaf_count` (>= witness.leaf_count) given leaf hashes for
/// every index not covered by witness nodes; throws DecodeError-style
/// std::invalid_argument when data is missing.
Digest eval_tree_witness(const TreeWitness& witness, uint64_t leaf_count, const std::map<uint64_t, Digest>& known_leaves);

} // namespace cbdc
