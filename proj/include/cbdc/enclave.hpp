#pragma once

#include <functional>
#include <optional>

#include "cbdc/attest.hpp"
#include "cbdc/inflation.hpp"
#include "cbdc/seal.hpp"
#include "cbdc/vm/vm.hpp"

namespace cbdc {

struct InstanceParams {
    PublicKey operator_pk;
    uint64_t t_i0 = 0;        // tokens issued at genesis (credited to the operator)
    Rational inflation_rate;  // max yearly issuance growth
    bool issue_authority = false;
    VirtualTime created_at = 0;
    uint64_t htlc_timeout = 24 * 3600; // virtual seconds
};

/// Enclave-signed snapshot advancing the public view of the ledger:
/// (previous root, new root) extended with the supply counters.
struct VersionTransitionPair {
    Digest root_from; // zero digest = genesis (no prior snapshot)
    Digest root_to;
    uint64_t t_i = 0;
    uint64_t t_s = 0;
    Signature sig; // Σ_pb by the enclave

    Bytes signing_payload() const
    {
        Encoder e;
        e.put_tag(WireTag::transition_pair);
        e.put_digest(root_from);
        e.put_digest(root_to);
        e.put_u64(t_i);
        e.put_u64(t_s);
        return e.take();
    }

    void encode(Encoder& e) const
    {
        e.put_tag(WireTag::transition_pair);
        e.put_digest(root_from);
        e.put_digest(root_to);
        e.put_u64(t_i);
        e.put_u64(t_s);
        sig.encode(e);
    }

    static VersionTransitionPair decode(Decoder& d)
    {
        d.expect_tag(WireTag::transition_pair);
        VersionTransitionPair p;
        p.root_from = d.digest();
        p.root_to = d.digest();
        p.t_i = d.u64();
        p.t_s = d.u64();
        p.sig = Signature::decode(d);
        return p;
    }
};

/// Finalized chain reads the enclave's light client relies on.
class ChainReaderIface {
  public:
    struct IpscView {
        Digest lroot;
        uint64_t t_i = 0;
        uint64_t t_s = 0;
    };

    virtual ~ChainReaderIface() = default;
    virtual std::optional<IpscView> read_ipsc(const Digest& ipsc_id) const = 0;
    virtual bool instance_approved(const Digest& ipsc_id) const = 0;
};

/// Plaintext of an escalated read query: the incremental-proof request a
/// censored client routes through the public contract, plus the key the
/// response gets sealed to.
struct CensQuery {
    Commitment from;
    Commitment to;
    std::array<uint8_t, 32> reply_pk{};

    void encode(Encoder& e) const
    {
        e.put_tag(WireTag::cens_payload);
        from.encode(e);
        to.encode(e);
        e.put_fixed(ByteView(reply_pk.data(), 32));
    }

    static CensQuery decode(Decoder& d)
    {
        d.expect_tag(WireTag::cens_payload);
        CensQuery q;
        q.from = Commitment::decode(d);
        q.to = Commitment::decode(d);
        Bytes pk = d.fixed(32);
        std::copy(pk.begin(), pk.end(), q.reply_pk.begin());
        return q;
    }
};

/// Resolution status codes stored at the IPSC.
namespace cens_status {
inline constexpr uint8_t executed_ok = 1;
inline constexpr uint8_t executed_reverted = 2;
inline constexpr uint8_t rejected = 3;
} // namespace cens_status

/// The trusted program of one CBDC instance. Strictly single-threaded;
/// the operator serializes all calls. Ledger state beyond the O(log n)
/// frozen-hash cache lives outside and is re-authenticated per batch.
class Enclave final : public EnclaveHooks {
  public:
    struct InitOutput {
        PublicKey pk_tee;
        PublicKey pk_pb;
        std::array<uint8_t, 32> enc_pk{};
        Signature enc_binding; // Σ_tee over (enc_pk || pk_pb)
        AttestationQuote quote;
    };

    struct ExecOutput {
        VersionTransitionPair pair;
        PartialState st_new;
        Header hdr;
        std::vector<Receipt> receipts;
        std::vector<MicroTransaction> executed;
        std::vector<MicroTransaction> txs_er;
    };

    struct TxResolution {
        std::optional<ExecOutput> exec_out;
        uint8_t status = cens_status::rejected;
        Signature sig; // over (h(etx), status)
    };

    struct QryResolution {
        uint8_t status = cens_status::rejected;
        Bytes edata; // encoded SealedBox holding the proof, empty when rejected
        Signature sig; // over (h(equery), status, h(edata))
    };

    Enclave(InstanceParams params, uint64_t key_seed);

    /// Key generation + attestation; callable exactly once.
    InitOutput init();

    /// Ties the enclave to its deployed IPSC id and gives its light client
    /// access to the finalized public chain.
    void bind_instance(const Digest& own_ipsc, const ChainReaderIface* reader);

    ExecOutput exec(const std::vector<MicroTransaction>& txs, const PartialState& st_old, VirtualTime now);

    /// Shift the published-version marker; the operator calls this after
    /// the IPSC accepted the pair (the contract rejects non-chaining pairs,
    /// so a misordered flush only wedges the instance, never forks it).
    void flush();

    /// Ecall wrappers executing a single-transaction batch.
    ExecOutput register_client(const MicroTransaction& signed_register_tx, const PartialState& st_old, VirtualTime now);
    ExecOutput issue_tokens(const MicroTransaction& signed_issue_tx, const PartialState& st_old, VirtualTime now);

    /// Censorship resolution: decrypt-and-execute a relayed µ-etx.
    TxResolution resolve_censored_tx(const Bytes& etx_bytes, const PartialState& st_old, VirtualTime now);

    /// Censorship resolution for read queries: validate the operator-built
    /// proof for the commitments the client named and seal it back.
    using IncProofProvider = std::function<std::optional<IncrementalProof>(const Commitment&, const Commitment&)>;
    QryResolution resolve_censored_query(const Bytes& equery_bytes, const IncProofProvider& provider);

    /// Light-client check of a foreign instance's evidence chain: the
    /// incremental proof links the claimed commitment to that instance's
    /// published snapshot, the snapshot matches the tracked public value,
    /// the header sits in the claimed version, and the receipt sits under
    /// the header with OK status. Throws on an unknown/unapproved instance.
    bool verify_foreign_inclusion(const Digest& foreign_ipsc, const IncrementalProof& inc, const Commitment& lroot_claimed,
                                  const Commitment& lroot_pb_foreign, const MembershipProof& hdr_proof, const Header& hdr,
                                  const MerkleProof& rcp_proof, const Receipt& rcp);

    /// Replacement instance after enclave failure: fresh keys, same ledger
    /// continuation state (models sealed-state recovery). The returned
    /// enclave still needs init() and bind_instance().
    Enclave fork_replacement(uint64_t new_key_seed) const;

    static Digest code_measurement();

    // EnclaveHooks
    VirtualTime now() const override { return now_; }
    uint64_t htlc_timeout() const override { return params_.htlc_timeout; }
    Digest own_ipsc() const override { return own_ipsc_; }
    Address operator_address() const override { return address_of(params_.operator_pk); }
    void burn_supply(uint64_t amount) override;
    void mint_supply(uint64_t amount) override;
    bool try_issue(uint64_t amount) override;
    std::optional<AccessTicket> register_client(const PublicKey& pk) override;
    AccessTicket ensure_ticket(const PublicKey& pk, uint64_t min_validity) override;
    bool verify_foreign_package(const ForeignEvidence& foreign) override;

    // State accessors (what the operator could read off the interface).
    bool initialized() const { return inited_; }
    Digest lroot_cur() const { return lroot_cur_; }
    Digest lroot_pb() const { return lroot_pb_; }
    uint64_t id_cur() const { return id_cur_; }
    uint64_t t_i() const { return t_i_; }
    uint64_t t_s() const { return t_s_; }
    const InstanceParams& params() const { return params_; }
    PublicKey pk_pb() const { return pb_.pk; }
    PublicKey pk_tee() const { return tee_.pk; }
    const std::array<uint8_t, 32>& enc_pk() const { return enc_.pk; }
    std::optional<Header> hdr_last() const { return hdr_last_; }
    Digest genesis_state_root() const { return genesis_root_; }
    uint64_t default_ticket_validity() const { return 2 * params_.htlc_timeout; }

  private:
    Signature sign_pb(ByteView payload) const { return sign(pb_.sk, payload); }
    AccessTicket issue_ticket(const PublicKey& pk, VirtualTime expires_at);

    InstanceParams params_;
    uint64_t key_seed_;
    bool inited_ = false;

    KeyPair pb_;
    KeyPair tee_;
    EncKeyPair enc_;
    Rng rng_;

    std::optional<Header> hdr_last_;
    Digest lroot_pb_{};  // zero = ⊥
    Digest lroot_cur_{}; // zero = ⊥
    uint64_t id_cur_ = 1;
    FrozenHashCache fh_;
    uint64_t t_i_ = 0;
    uint64_t t_s_ = 0;
    Digest genesis_root_;

    std::map<std::array<uint8_t, 32>, VirtualTime> registered_; // client pk -> registration time
    std::map<std::array<uint8_t, 32>, AccessTicket> tickets_;   // latest ticket per pk
    std::map<Digest, Digest> light_roots_;                      // foreign ipsc -> tracked LRoot_pb

    Digest own_ipsc_{};
    const ChainReaderIface* reader_ = nullptr;
    VirtualTime now_ = 0;
};

/// Genesis account layout shared by the enclave and the operator's store:
/// operator treasury holding t_i0, then the two IOMC contract accounts.
std::vector<AccountRecord> genesis_accounts(const PublicKey& operator_pk, uint64_t t_i0);

/// Full-state root over a complete account list (no witness).
Digest account_tree_root(const std::vector<AccountRecord>& accounts);

} // namespace cbdc
