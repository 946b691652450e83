#pragma once

#include <memory>
#include <set>

#include "cbdc/enclave.hpp"
#include "cbdc/inflation.hpp"
#include "cbdc/ticket.hpp"

namespace cbdc {

// Contract method selectors.
namespace ipsc_method {
inline constexpr uint8_t snapshot_ledger = 1;
inline constexpr uint8_t submit_cens_tx = 2;
inline constexpr uint8_t resolve_cens_tx = 3;
inline constexpr uint8_t submit_cens_qry = 4;
inline constexpr uint8_t resolve_cens_qry = 5;
inline constexpr uint8_t replace_enclave = 6;
} // namespace ipsc_method

namespace imsc_method {
inline constexpr uint8_t new_join_request = 1;
inline constexpr uint8_t approve_join = 2;
inline constexpr uint8_t approve_delete = 3;
inline constexpr uint8_t add_instance = 4;
inline constexpr uint8_t del_instance = 5;
} // namespace imsc_method

struct ChainTx {
    PublicKey sender;
    Digest target; // contract id
    uint8_t method = 0;
    Bytes args;
    Signature sig;

    Bytes signing_payload() const
    {
        Encoder e;
        e.put_tag(WireTag::chain_tx);
        sender.encode(e);
        e.put_digest(target);
        e.put_u8(method);
        e.put_var(args);
        return e.take();
    }

    void encode(Encoder& e) const
    {
        e.put_tag(WireTag::chain_tx);
        sender.encode(e);
        e.put_digest(target);
        e.put_u8(method);
        e.put_var(args);
        sig.encode(e);
    }

    static ChainTx decode(Decoder& d)
    {
        d.expect_tag(WireTag::chain_tx);
        ChainTx tx;
        tx.sender = PublicKey::decode(d);
        tx.target = d.digest();
        tx.method = d.u8();
        tx.args = d.var();
        tx.sig = Signature::decode(d);
        return tx;
    }
};

ChainTx make_chain_tx(const KeyPair& sender, const Digest& target, uint8_t method, Bytes args);

/// One censorship-resolution slot: exactly one of etx/equery is set at
/// creation; status stays 0 until an enclave-signed resolution lands.
struct CensInfo {
    Bytes etx;    // encoded SealedBox, or empty
    Bytes equery; // encoded SealedBox, or empty
    uint8_t status = 0;
    Bytes edata; // encoded SealedBox (query responses)
};

struct IpscState {
    std::vector<PublicKey> pk_tee_hist;
    std::vector<PublicKey> pk_pb_hist;
    PublicKey pk_operator;
    Digest lroot{}; // zero = ⊥ until the first accepted snapshot
    std::vector<CensInfo> cens_reqs;
    uint64_t t_s = 0;
    uint64_t t_i = 0;
    uint64_t t_i0 = 0;     // issuance base for the inflation rule
    bool issue_authority = false;
    Rational i_r;
    VirtualTime created_at = 0;
    std::vector<std::pair<Digest, Digest>> transitions; // accepted (root_A -> root_B), in order
};

struct ImscInstanceInfo {
    PublicKey operator_pk;
    bool is_approved = false;
    std::set<std::array<uint8_t, 32>> approvals; // operator pks backing join/delete
};

struct ImscDecentralized {
    std::map<Digest, ImscInstanceInfo> instances;
};

struct ImscCentralized {
    Digest authority_ipsc;
    PublicKey authority_pk;
    std::map<Digest, PublicKey> instances;
};

struct ChainState {
    std::map<Digest, IpscState> ipscs;
    std::optional<ImscDecentralized> imsc_d;
    std::optional<ImscCentralized> imsc_c;
};

/// Whether the registry admits the instance. With no IMSC configured any
/// deployed IPSC counts (single-instance setups).
bool instance_approved(const ChainState& state, const Digest& ipsc_id);

struct TxOutcome {
    bool accepted = false;  // contract asserts passed
    bool applied = false;   // snapshot transitions: root actually advanced
    uint64_t ret = 0;       // e.g. censorship request index
    std::string error;
};

struct IpscInitParams {
    PublicKey pk_e_pb;
    PublicKey pk_e_tee;
    PublicKey pk_operator;
    uint64_t t_i0 = 0;
    Rational i_r;
    bool issue_authority = true;
};

/// Simulated consistency-favored public chain: deterministic ordering
/// (round-robin across submitters in first-arrival order), single-threaded
/// contract execution, reads served from the finalized height.
class Chain {
  public:
    explicit Chain(uint64_t finality_depth = 1);

    /// Queued contract deployment; the id is fixed immediately, the state
    /// materializes in the next block.
    Digest deploy_ipsc(const IpscInitParams& params);

    /// Genesis-time registry setup.
    void init_imsc_decentralized(const std::vector<std::pair<Digest, PublicKey>>& initial_instances);
    void init_imsc_centralized(const Digest& authority_ipsc, const PublicKey& authority_pk);

    uint64_t submit(const ChainTx& tx);

    void produce_block(VirtualTime now);

    uint64_t height() const { return states_.size() - 1; }
    uint64_t finalized_height() const;
    VirtualTime time_at(uint64_t height) const;

    const ChainState& at(uint64_t height) const { return *states_.at(height); }
    const ChainState& finalized() const { return at(finalized_height()); }
    const ChainState& latest() const { return *states_.back(); }

    /// Outcome once the enclosing block is finalized; nullopt before.
    std::optional<TxOutcome> outcome(uint64_t txid) const;

    uint64_t finality_depth() const { return finality_depth_; }

  private:
    struct PendingTx {
        uint64_t id;
        uint64_t arrival;
        ChainTx tx;
    };
    struct TxRecord {
        ChainTx tx;
        uint64_t block = 0; // 0 = still pending
        TxOutcome outcome;
    };
    struct PendingDeploy {
        Digest id;
        IpscInitParams params;
    };

    TxOutcome execute(ChainState& state, const ChainTx& tx, VirtualTime now) const;

    uint64_t finality_depth_;
    std::vector<std::shared_ptr<const ChainState>> states_; // index = height
    std::vector<VirtualTime> block_times_;
    std::vector<PendingTx> pending_;
    std::vector<PendingDeploy> pending_deploys_;
    std::vector<TxRecord> records_;
    uint64_t arrival_seq_ = 0;
    uint64_t deploy_seq_ = 0;
};

/// Adapter giving enclaves light-client access to the finalized chain view.
class FinalizedChainReader final : public ChainReaderIface {
  public:
    explicit FinalizedChainReader(const Chain& chain) : chain_(chain) {}

    std::optional<IpscView> read_ipsc(const Digest& ipsc_id) const override
    {
        const auto& state = chain_.finalized();
        auto it = state.ipscs.find(ipsc_id);
        if (it == state.ipscs.end())
            return std::nullopt;
        return IpscView{it->second.lroot, it->second.t_i, it->second.t_s};
    }

    bool instance_approved(const Digest& ipsc_id) const override
    {
        return cbdc::instance_approved(chain_.finalized(), ipsc_id);
    }

  private:
    const Chain& chain_;
};

// Argument codecs for contract calls.

struct SubmitCensArgs {
    Bytes payload; // encoded SealedBox
    AccessTicket ticket;

    void encode(Encoder& e) const
    {
        e.put_var(payload);
        ticket.encode(e);
    }
    static SubmitCensArgs decode(Decoder& d)
    {
        SubmitCensArgs a;
        a.payload = d.var();
        a.ticket = AccessTicket::decode(d);
        return a;
    }
};

struct ResolveCensTxArgs {
    uint64_t idx = 0;
    uint8_t status = 0;
    Signature sig; // enclave Σ_pb over (h(etx), status)

    void encode(Encoder& e) const
    {
        e.put_u64(idx);
        e.put_u8(status);
        sig.encode(e);
    }
    static ResolveCensTxArgs decode(Decoder& d)
    {
        ResolveCensTxArgs a;
        a.idx = d.u64();
        a.status = d.u8();
        a.sig = Signature::decode(d);
        return a;
    }
};

struct ResolveCensQryArgs {
    uint64_t idx = 0;
    uint8_t status = 0;
    Bytes edata;
    Signature sig; // enclave Σ_pb over (h(equery), status, h(edata))

    void encode(Encoder& e) const
    {
        e.put_u64(idx);
        e.put_u8(status);
        e.put_var(edata);
        sig.encode(e);
    }
    static ResolveCensQryArgs decode(Decoder& d)
    {
        ResolveCensQryArgs a;
        a.idx = d.u64();
        a.status = d.u8();
        a.edata = d.var();
        a.sig = Signature::decode(d);
        return a;
    }
};

struct ReplaceEncArgs {
    PublicKey pkn_pb;
    PublicKey pkn_tee;
    VersionTransitionPair pair;

    void encode(Encoder& e) const
    {
        pkn_pb.encode(e);
        pkn_tee.encode(e);
        pair.encode(e);
    }
    static ReplaceEncArgs decode(Decoder& d)
    {
        ReplaceEncArgs a;
        a.pkn_pb = PublicKey::decode(d);
        a.pkn_tee = PublicKey::decode(d);
        a.pair = VersionTransitionPair::decode(d);
        return a;
    }
};

struct ImscJoinArgs {
    Digest ipsc;

    void encode(Encoder& e) const { e.put_digest(ipsc); }
    static ImscJoinArgs decode(Decoder& d) { return ImscJoinArgs{d.digest()}; }
};

struct ImscVoteArgs {
    Digest my_ipsc;
    Digest target_ipsc;

    void encode(Encoder& e) const
    {
        e.put_digest(my_ipsc);
        e.put_digest(target_ipsc);
    }
    static ImscVoteArgs decode(Decoder& d)
    {
        ImscVoteArgs a;
        a.my_ipsc = d.digest();
        a.target_ipsc = d.digest();
        return a;
    }
};

struct ImscAddArgs {
    Digest ipsc;
    PublicKey operator_pk;

    void encode(Encoder& e) const
    {
        e.put_digest(ipsc);
        operator_pk.encode(e);
    }
    static ImscAddArgs decode(Decoder& d)
    {
        ImscAddArgs a;
        a.ipsc = d.digest();
        a.operator_pk = PublicKey::decode(d);
        return a;
    }
};

/// Well-known registry contract id (one IMSC per deployment).
Digest imsc_contract_id();

} // namespace cbdc
