#pragma once

#include "cbdc/vm/types.hpp"

namespace cbdc {

/// Evidence that one µ-transaction executed and is fixed by a snapshotted
/// ledger version: the transaction, its receipt, the covering micro-block
/// header, the header's membership proof in the history tree, the receipt's
/// Merkle proof under the header, and the commitment the proofs target.
struct TransferEvidence {
    MicroTransaction mu_tx;
    Receipt receipt;
    Header hdr;
    MembershipProof hdr_proof;
    MerkleProof rcp_proof;
    Commitment lroot;

    void encode(Encoder& e) const;
    static TransferEvidence decode(Decoder& d);
};

/// Evidence carried across instances inside a commit µ-transaction:
/// the base package plus the incremental proof linking its commitment to
/// the counterparty IPSC's published snapshot.
struct ForeignEvidence {
    Digest ipsc_id; // the instance the evidence comes from
    TransferEvidence evidence;
    IncrementalProof inc_proof; // evidence.lroot -> snapshot
    Commitment snapshot;        // published LRoot_pb of that instance

    void encode(Encoder& e) const;
    static ForeignEvidence decode(Decoder& d);
};

/// Structural checks that need no external state: the receipt names the
/// transaction, the transaction signature holds, the receipt sits under the
/// header's receipt root, and the header sits in the claimed commitment.
bool evidence_wellformed(const TransferEvidence& ev);

struct SendCommitArgs {
    uint64_t transfer_id = 0;
    Bytes secret;
    uint64_t ext_transfer_id = 0;
    ForeignEvidence foreign;

    void encode(Encoder& e) const;
    static SendCommitArgs decode(Decoder& d);
};

struct ReceiveCommitArgs {
    uint64_t transfer_id = 0;
    Bytes secret;
    ForeignEvidence foreign;

    void encode(Encoder& e) const;
    static ReceiveCommitArgs decode(Decoder& d);
};

} // namespace cbdc
