#include "cbdc/enclave.hpp"

#include <stdexcept>

namespace cbdc {

std::vector<AccountRecord> genesis_accounts(const PublicKey& operator_pk, uint64_t t_i0)
{
    return {
        AccountRecord{address_of(operator_pk), Account{t_i0, 0}},
        AccountRecord{iomc_send_address(), Account{0, 0}},
        AccountRecord{iomc_recv_address(), Account{0, 0}},
    };
}

Digest account_tree_root(const std::vector<AccountRecord>& accounts)
{
    std::vector<Digest> leaves;
    leaves.reserve(accounts.size());
    for (const auto& r : accounts)
        leaves.push_back(account_leaf_hash(r));
    TreeWitness w = build_tree_witness(leaves, {});
    return eval_tree_witness(w, leaves.size(), {});
}

Digest Enclave::code_measurement()
{
    static const Digest m = sha256_tagged(hash_tag::measurement, to_bytes("cbdc-instance-enclave/1"));
    return m;
}

Enclave::Enclave(InstanceParams params, uint64_t key_seed)
    : params_(std::move(params)), key_seed_(key_seed), rng_(key_seed ^ 0x9e3779b97f4a7c15ull)
{
    t_i_ = params_.t_i0;
    t_s_ = params_.t_i0;
    genesis_root_ = compose_state_root(account_tree_root(genesis_accounts(params_.operator_pk, params_.t_i0)), {}, {});
}

Enclave::InitOutput Enclave::init()
{
    if (inited_)
        throw std::logic_error("enclave: double init");
    inited_ = true;

    Rng key_rng(key_seed_);
    pb_ = keygen(SigScheme::pb, key_rng.u64());
    tee_ = keygen(SigScheme::tee, key_rng.u64());
    Bytes enc_seed = key_rng.bytes(32);
    enc_ = EncKeyPair::from_seed(enc_seed);

    InitOutput out;
    out.pk_tee = tee_.pk;
    out.pk_pb = pb_.pk;
    out.enc_pk = enc_.pk;
    Encoder e;
    e.put_tag(WireTag::enclave_enc_keys);
    e.put_fixed(ByteView(enc_.pk.data(), 32));
    pb_.pk.encode(e);
    out.enc_binding = sign(tee_.sk, e.bytes());
    out.quote = attest(code_measurement(), tee_.pk);
    return out;
}

void Enclave::bind_instance(const Digest& own_ipsc, const ChainReaderIface* reader)
{
    own_ipsc_ = own_ipsc;
    reader_ = reader;
}

Enclave::ExecOutput Enclave::exec(const std::vector<MicroTransaction>& txs, const PartialState& st_old, VirtualTime now)
{
    if (!inited_)
        throw std::logic_error("enclave: exec before init");
    Digest expected = hdr_last_ ? hdr_last_->st_root : genesis_root_;
    if (st_old.root != expected)
        throw std::invalid_argument("enclave: stale partial state");

    now_ = now;
    ExecutionResult res = run_vm(txs, st_old, *this);

    std::vector<Bytes> tx_bytes, rcp_bytes;
    tx_bytes.reserve(res.executed.size());
    for (const auto& tx : res.executed)
        tx_bytes.push_back(encode_bytes(tx));
    rcp_bytes.reserve(res.receipts.size());
    for (const auto& r : res.receipts)
        rcp_bytes.push_back(encode_bytes(r));

    Header hdr;
    hdr.id = id_cur_;
    hdr.txs_root = mk_root_or_empty(tx_bytes);
    hdr.rcp_root = mk_root_or_empty(rcp_bytes);
    hdr.st_root = res.st_new.root;

    fh_update(fh_, mk_leaf_hash(encode_bytes(hdr)), id_cur_);
    lroot_cur_ = fh_reduce(fh_);
    hdr_last_ = hdr;
    ++id_cur_;

    ExecOutput out;
    out.pair.root_from = lroot_pb_;
    out.pair.root_to = lroot_cur_;
    out.pair.t_i = t_i_;
    out.pair.t_s = t_s_;
    out.pair.sig = sign_pb(out.pair.signing_payload());
    out.st_new = std::move(res.st_new);
    out.hdr = hdr;
    out.receipts = std::move(res.receipts);
    out.executed = std::move(res.executed);
    out.txs_er = std::move(res.txs_er);
    return out;
}

void Enclave::flush()
{
    lroot_pb_ = lroot_cur_;
}

Enclave::ExecOutput Enclave::register_client(const MicroTransaction& signed_register_tx, const PartialState& st_old,
                                             VirtualTime now)
{
    if (!std::holds_alternative<RegisterCall>(signed_register_tx.call))
        throw std::invalid_argument("register_client: not a registration transaction");
    return exec({signed_register_tx}, st_old, now);
}

Enclave::ExecOutput Enclave::issue_tokens(const MicroTransaction& signed_issue_tx, const PartialState& st_old,
                                          VirtualTime now)
{
    if (!std::holds_alternative<IssueCall>(signed_issue_tx.call))
        throw std::invalid_argument("issue_tokens: not an issuance transaction");
    return exec({signed_issue_tx}, st_old, now);
}

Enclave::TxResolution Enclave::resolve_censored_tx(const Bytes& etx_bytes, const PartialState& st_old, VirtualTime now)
{
    TxResolution res;
    std::optional<MicroTransaction> tx;
    try {
        SealedBox box = decode_bytes<SealedBox>(etx_bytes);
        auto plain = open(enc_, box);
        if (plain)
            tx = decode_bytes<MicroTransaction>(*plain);
    } catch (const std::exception&) {
        tx.reset();
    }

    if (tx) {
        ExecOutput out = exec({*tx}, st_old, now);
        if (out.receipts.size() == 1)
            res.status = out.receipts[0].status == TxStatus::ok ? cens_status::executed_ok : cens_status::executed_reverted;
        else
            res.status = cens_status::rejected; // filtered: bad signature or nonce
        res.exec_out = std::move(out);
    } else {
        res.status = cens_status::rejected;
    }

    Encoder e;
    e.put_digest(sha256(etx_bytes));
    e.put_u8(res.status);
    res.sig = sign_pb(e.bytes());
    return res;
}

Enclave::QryResolution Enclave::resolve_censored_query(const Bytes& equery_bytes, const IncProofProvider& provider)
{
    QryResolution res;
    try {
        SealedBox box = decode_bytes<SealedBox>(equery_bytes);
        auto plain = open(enc_, box);
        if (plain) {
            CensQuery q = decode_bytes<CensQuery>(*plain);
            auto proof = provider(q.from, q.to);
            if (proof && inc_verify(*proof, q.from, q.to)) {
                SealedBox reply = seal(q.reply_pk, encode_bytes(*proof), rng_);
                res.edata = encode_bytes(reply);
                res.status = cens_status::executed_ok;
            }
        }
    } catch (const std::exception&) {
        res.status = cens_status::rejected;
    }

    Encoder e;
    e.put_digest(sha256(equery_bytes));
    e.put_u8(res.status);
    e.put_digest(sha256(res.edata));
    res.sig = sign_pb(e.bytes());
    return res;
}

bool Enclave::verify_foreign_inclusion(const Digest& foreign_ipsc, const IncrementalProof& inc,
                                       const Commitment& lroot_claimed, const Commitment& lroot_pb_foreign,
                                       const MembershipProof& hdr_proof, const Header& hdr,
                                       const MerkleProof& rcp_proof, const Receipt& rcp)
{
    if (reader_ == nullptr)
        throw std::logic_error("enclave: light client not bound");
    if (!reader_->instance_approved(foreign_ipsc))
        throw std::invalid_argument("enclave: unknown foreign instance");
    auto view = reader_->read_ipsc(foreign_ipsc);
    if (!view)
        throw std::invalid_argument("enclave: unknown foreign instance");
    light_roots_[foreign_ipsc] = view->lroot;

    if (lroot_pb_foreign.root != view->lroot)
        return false; // evidence targets a snapshot the public chain does not show
    if (!inc_verify(inc, lroot_claimed, lroot_pb_foreign))
        return false;
    if (!mem_verify(hdr_proof, hdr.id, encode_bytes(hdr), lroot_claimed))
        return false;
    if (!mk_verify(rcp_proof, encode_bytes(rcp), hdr.rcp_root))
        return false;
    return rcp.status == TxStatus::ok;
}

Enclave Enclave::fork_replacement(uint64_t new_key_seed) const
{
    Enclave next(params_, new_key_seed);
    next.hdr_last_ = hdr_last_;
    next.lroot_pb_ = lroot_pb_;
    next.lroot_cur_ = lroot_cur_;
    next.id_cur_ = id_cur_;
    next.fh_ = fh_;
    next.t_i_ = t_i_;
    next.t_s_ = t_s_;
    next.registered_ = registered_;
    next.tickets_ = tickets_;
    next.light_roots_ = light_roots_;
    return next;
}

void Enclave::burn_supply(uint64_t amount)
{
    if (amount > t_s_)
        throw std::logic_error("enclave: burn exceeds supply");
    t_s_ -= amount;
}

void Enclave::mint_supply(uint64_t amount)
{
    t_s_ += amount;
}

bool Enclave::try_issue(uint64_t amount)
{
    if (!params_.issue_authority)
        return false;
    uint64_t cap = allowed_issued(params_.t_i0, params_.inflation_rate, params_.created_at, now_);
    if (amount > cap || t_i_ > cap - amount)
        return false;
    t_i_ += amount;
    t_s_ += amount;
    return true;
}

AccessTicket Enclave::issue_ticket(const PublicKey& pk, VirtualTime expires_at)
{
    AccessTicket t;
    t.client_pk = pk;
    t.issuing_ipsc = own_ipsc_;
    t.expires_at = expires_at;
    t.sig = sign(tee_.sk, t.signing_payload());
    tickets_[pk.bytes] = t;
    return t;
}

std::optional<AccessTicket> Enclave::register_client(const PublicKey& pk)
{
    if (registered_.count(pk.bytes))
        return std::nullopt;
    registered_[pk.bytes] = now_;
    return issue_ticket(pk, now_ + default_ticket_validity());
}

AccessTicket Enclave::ensure_ticket(const PublicKey& pk, uint64_t min_validity)
{
    auto it = tickets_.find(pk.bytes);
    if (it != tickets_.end() && it->second.expires_at >= now_ + min_validity)
        return it->second;
    return issue_ticket(pk, now_ + min_validity);
}

bool Enclave::verify_foreign_package(const ForeignEvidence& foreign)
{
    try {
        return verify_foreign_inclusion(foreign.ipsc_id, foreign.inc_proof, foreign.evidence.lroot, foreign.snapshot,
                                        foreign.evidence.hdr_proof, foreign.evidence.hdr, foreign.evidence.rcp_proof,
                                        foreign.evidence.receipt);
    } catch (const std::exception&) {
        return false;
    }
}

} // namespace cbdc
