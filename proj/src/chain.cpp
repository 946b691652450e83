#include "cbdc/chain/chain.hpp"

#include <algorithm>

namespace cbdc {

ChainTx make_chain_tx(const KeyPair& sender, const Digest& target, uint8_t method, Bytes args)
{
    ChainTx tx;
    tx.sender = sender.pk;
    tx.target = target;
    tx.method = method;
    tx.args = std::move(args);
    tx.sig = sign(sender.sk, tx.signing_payload());
    return tx;
}

Digest imsc_contract_id()
{
    static const Digest id = sha256_tagged(hash_tag::address, to_bytes("imsc"));
    return id;
}

bool instance_approved(const ChainState& state, const Digest& ipsc_id)
{
    if (state.imsc_d) {
        auto it = state.imsc_d->instances.find(ipsc_id);
        return it != state.imsc_d->instances.end() && it->second.is_approved;
    }
    if (state.imsc_c) {
        return ipsc_id == state.imsc_c->authority_ipsc || state.imsc_c->instances.count(ipsc_id) > 0;
    }
    return state.ipscs.count(ipsc_id) > 0;
}

Chain::Chain(uint64_t finality_depth) : finality_depth_(finality_depth == 0 ? 1 : finality_depth)
{
    states_.push_back(std::make_shared<ChainState>()); // genesis, height 0
    block_times_.push_back(0);
}

uint64_t Chain::finalized_height() const
{
    uint64_t h = height();
    return h + 1 >= finality_depth_ ? h + 1 - finality_depth_ : 0;
}

VirtualTime Chain::time_at(uint64_t h) const
{
    return block_times_.at(h);
}

Digest Chain::deploy_ipsc(const IpscInitParams& params)
{
    Encoder e;
    e.put_string("ipsc");
    e.put_u64(deploy_seq_++);
    params.pk_operator.encode(e);
    Digest id = sha256_tagged(hash_tag::address, e.bytes());
    pending_deploys_.push_back({id, params});
    return id;
}

void Chain::init_imsc_decentralized(const std::vector<std::pair<Digest, PublicKey>>& initial_instances)
{
    auto genesis = std::make_shared<ChainState>(*states_.at(0));
    ImscDecentralized imsc;
    for (const auto& [ipsc, op] : initial_instances)
        imsc.instances[ipsc] = ImscInstanceInfo{op, true, {}};
    genesis->imsc_d = std::move(imsc);
    states_[0] = genesis;
}

void Chain::init_imsc_centralized(const Digest& authority_ipsc, const PublicKey& authority_pk)
{
    auto genesis = std::make_shared<ChainState>(*states_.at(0));
    genesis->imsc_c = ImscCentralized{authority_ipsc, authority_pk, {}};
    states_[0] = genesis;
}

uint64_t Chain::submit(const ChainTx& tx)
{
    uint64_t id = records_.size();
    records_.push_back({tx, 0, {}});
    pending_.push_back({id, arrival_seq_++, tx});
    return id;
}

void Chain::produce_block(VirtualTime now)
{
    if (pending_.empty() && pending_deploys_.empty()) {
        // Empty block: finality still advances; state is shared, not copied.
        states_.push_back(states_.back());
        block_times_.push_back(now);
        return;
    }

    auto state = std::make_shared<ChainState>(*states_.back());

    for (const auto& dep : pending_deploys_) {
        IpscState ipsc;
        ipsc.pk_tee_hist.push_back(dep.params.pk_e_tee);
        ipsc.pk_pb_hist.push_back(dep.params.pk_e_pb);
        ipsc.pk_operator = dep.params.pk_operator;
        ipsc.t_i0 = dep.params.t_i0;
        ipsc.t_i = dep.params.t_i0;
        ipsc.t_s = dep.params.t_i0;
        ipsc.issue_authority = dep.params.issue_authority;
        ipsc.i_r = dep.params.i_r;
        ipsc.created_at = now;
        state->ipscs.emplace(dep.id, std::move(ipsc));
    }
    pending_deploys_.clear();

    // Round-robin across submitters in first-arrival order; FIFO per sender.
    std::vector<std::array<uint8_t, 32>> sender_order;
    std::map<std::array<uint8_t, 32>, std::vector<PendingTx>> by_sender;
    for (auto& p : pending_) {
        auto key = p.tx.sender.bytes;
        if (!by_sender.count(key))
            sender_order.push_back(key);
        by_sender[key].push_back(std::move(p));
    }
    pending_.clear();

    std::vector<PendingTx> ordered;
    for (size_t round = 0; !sender_order.empty(); ++round) {
        bool any = false;
        for (const auto& key : sender_order) {
            auto& q = by_sender[key];
            if (round < q.size()) {
                ordered.push_back(std::move(q[round]));
                any = true;
            }
        }
        if (!any)
            break;
    }

    for (const auto& p : ordered) {
        TxOutcome outcome;
        if (!verify(p.tx.sender, p.tx.signing_payload(), p.tx.sig)) {
            outcome.accepted = false;
            outcome.error = "bad signature";
        } else {
            outcome = execute(*state, p.tx, now);
        }
        records_[p.id].block = states_.size();
        records_[p.id].outcome = outcome;
    }

    states_.push_back(std::move(state));
    block_times_.push_back(now);
}

std::optional<TxOutcome> Chain::outcome(uint64_t txid) const
{
    const auto& rec = records_.at(txid);
    if (rec.block == 0 || rec.block > finalized_height())
        return std::nullopt;
    return rec.outcome;
}

namespace {

TxOutcome reject(const std::string& why)
{
    TxOutcome o;
    o.accepted = false;
    o.error = why;
    return o;
}

TxOutcome ok(uint64_t ret = 0, bool applied = true)
{
    TxOutcome o;
    o.accepted = true;
    o.applied = applied;
    o.ret = ret;
    return o;
}

// snapshotLedger: verify the enclave signature and supply rules, then
// advance the root only if the pair extends the current version. A stale
// pair is ignored, not reverted; its supply values are ignored with it.
TxOutcome ipsc_snapshot(IpscState& ipsc, const VersionTransitionPair& pair, VirtualTime now)
{
    if (ipsc.pk_pb_hist.empty() || !verify(ipsc.pk_pb_hist.back(), pair.signing_payload(), pair.sig))
        return reject("snapshot: bad enclave signature");

    if (ipsc.issue_authority) {
        if (pair.t_i > allowed_issued(ipsc.t_i0, ipsc.i_r, ipsc.created_at, now))
            return reject("snapshot: inflation bound violated");
    } else if (pair.t_i != ipsc.t_i) {
        return reject("snapshot: non-authority issuance change");
    }

    Digest current = ipsc.lroot;
    if (current != pair.root_from)
        return ok(0, false); // does not extend the last version: ignored

    ipsc.lroot = pair.root_to;
    ipsc.t_i = pair.t_i;
    ipsc.t_s = pair.t_s;
    if (pair.root_from != pair.root_to)
        ipsc.transitions.emplace_back(pair.root_from, pair.root_to);
    return ok(0, true);
}

bool access_control(const IpscState& ipsc, const Digest& self_id, const ChainTx& tx, const AccessTicket& ticket,
                    VirtualTime now)
{
    if (ticket.client_pk != tx.sender || ticket.issuing_ipsc != self_id)
        return false;
    if (ticket.expires_at < now)
        return false;
    // Tickets from any enclave generation of this instance stay valid.
    for (const auto& pk : ipsc.pk_tee_hist)
        if (verify(pk, ticket.signing_payload(), ticket.sig))
            return true;
    return false;
}

} // namespace

TxOutcome Chain::execute(ChainState& state, const ChainTx& tx, VirtualTime now) const
{
    try {
        if (tx.target == imsc_contract_id()) {
            if (state.imsc_d) {
                auto& imsc = *state.imsc_d;
                switch (tx.method) {
                case imsc_method::new_join_request: {
                    auto args = decode_bytes<ImscJoinArgs>(tx.args);
                    if (imsc.instances.count(args.ipsc))
                        return reject("imsc: instance already exists");
                    imsc.instances[args.ipsc] = ImscInstanceInfo{tx.sender, false, {}};
                    return ok();
                }
                case imsc_method::approve_join: {
                    auto args = decode_bytes<ImscVoteArgs>(tx.args);
                    auto my = imsc.instances.find(args.my_ipsc);
                    auto target = imsc.instances.find(args.target_ipsc);
                    if (my == imsc.instances.end() || my->second.operator_pk != tx.sender)
                        return reject("imsc: sender does not operate the voting instance");
                    if (!my->second.is_approved)
                        return reject("imsc: voting instance not approved");
                    if (target == imsc.instances.end())
                        return reject("imsc: unknown join request");
                    if (target->second.is_approved)
                        return reject("imsc: already approved");
                    if (args.my_ipsc == args.target_ipsc)
                        return reject("imsc: self-approval");
                    target->second.approvals.insert(tx.sender.bytes);
                    if (target->second.approvals.size() > imsc.instances.size() / 2) {
                        target->second.is_approved = true;
                        target->second.approvals.clear();
                    }
                    return ok();
                }
                case imsc_method::approve_delete: {
                    auto args = decode_bytes<ImscVoteArgs>(tx.args);
                    auto my = imsc.instances.find(args.my_ipsc);
                    auto target = imsc.instances.find(args.target_ipsc);
                    if (my == imsc.instances.end() || my->second.operator_pk != tx.sender)
                        return reject("imsc: sender does not operate the voting instance");
                    if (!my->second.is_approved)
                        return reject("imsc: voting instance not approved");
                    if (target == imsc.instances.end() || !target->second.is_approved)
                        return reject("imsc: target not an approved instance");
                    target->second.approvals.insert(tx.sender.bytes);
                    if (target->second.approvals.size() > imsc.instances.size() / 2)
                        imsc.instances.erase(target);
                    return ok();
                }
                default:
                    return reject("imsc: unknown method");
                }
            }
            if (state.imsc_c) {
                auto& imsc = *state.imsc_c;
                switch (tx.method) {
                case imsc_method::add_instance: {
                    if (tx.sender != imsc.authority_pk)
                        return reject("imsc: only the authority can add instances");
                    auto args = decode_bytes<ImscAddArgs>(tx.args);
                    if (args.ipsc == imsc.authority_ipsc || imsc.instances.count(args.ipsc))
                        return reject("imsc: instance already exists");
                    imsc.instances[args.ipsc] = args.operator_pk;
                    return ok();
                }
                case imsc_method::del_instance: {
                    if (tx.sender != imsc.authority_pk)
                        return reject("imsc: only the authority can delete instances");
                    auto args = decode_bytes<ImscJoinArgs>(tx.args);
                    imsc.instances.erase(args.ipsc);
                    return ok();
                }
                default:
                    return reject("imsc: unknown method");
                }
            }
            return reject("imsc: no registry deployed");
        }

        auto it = state.ipscs.find(tx.target);
        if (it == state.ipscs.end())
            return reject("unknown contract");
        IpscState& ipsc = it->second;

        switch (tx.method) {
        case ipsc_method::snapshot_ledger: {
            auto pair = decode_bytes<VersionTransitionPair>(tx.args);
            return ipsc_snapshot(ipsc, pair, now);
        }
        case ipsc_method::submit_cens_tx:
        case ipsc_method::submit_cens_qry: {
            auto args = decode_bytes<SubmitCensArgs>(tx.args);
            if (!access_control(ipsc, tx.target, tx, args.ticket, now))
                return reject("cens: access control failed");
            CensInfo info;
            if (tx.method == ipsc_method::submit_cens_tx)
                info.etx = args.payload;
            else
                info.equery = args.payload;
            ipsc.cens_reqs.push_back(std::move(info));
            return ok(ipsc.cens_reqs.size() - 1);
        }
        case ipsc_method::resolve_cens_tx: {
            auto args = decode_bytes<ResolveCensTxArgs>(tx.args);
            if (args.idx >= ipsc.cens_reqs.size())
                return reject("cens: index out of range");
            CensInfo& r = ipsc.cens_reqs[args.idx];
            if (r.etx.empty())
                return reject("cens: not a transaction request");
            if (r.status != 0)
                return reject("cens: already resolved");
            if (args.status == 0)
                return reject("cens: bad status");
            Encoder e;
            e.put_digest(sha256(r.etx));
            e.put_u8(args.status);
            if (ipsc.pk_pb_hist.empty() || !verify(ipsc.pk_pb_hist.back(), e.bytes(), args.sig))
                return reject("cens: bad enclave signature");
            r.status = args.status;
            return ok();
        }
        case ipsc_method::resolve_cens_qry: {
            auto args = decode_bytes<ResolveCensQryArgs>(tx.args);
            if (args.idx >= ipsc.cens_reqs.size())
                return reject("cens: index out of range");
            CensInfo& r = ipsc.cens_reqs[args.idx];
            if (r.equery.empty())
                return reject("cens: not a query request");
            if (r.status != 0)
                return reject("cens: already resolved");
            if (args.status == 0)
                return reject("cens: bad status");
            Encoder e;
            e.put_digest(sha256(r.equery));
            e.put_u8(args.status);
            e.put_digest(sha256(args.edata));
            if (ipsc.pk_pb_hist.empty() || !verify(ipsc.pk_pb_hist.back(), e.bytes(), args.sig))
                return reject("cens: bad enclave signature");
            r.status = args.status;
            r.edata = args.edata;
            return ok();
        }
        case ipsc_method::replace_enclave: {
            // Operator-authorized key rotation; the embedded snapshot must
            // fully apply or the whole call is rejected, keeping rotation
            // atomic with the ledger version it carries.
            auto args = decode_bytes<ReplaceEncArgs>(tx.args);
            if (tx.sender != ipsc.pk_operator)
                return reject("replace: sender is not the operator");
            IpscState scratch = ipsc;
            TxOutcome snap = ipsc_snapshot(scratch, args.pair, now);
            if (!snap.accepted || !snap.applied)
                return reject("replace: embedded snapshot not applicable");
            scratch.pk_pb_hist.push_back(args.pkn_pb);
            scratch.pk_tee_hist.push_back(args.pkn_tee);
            ipsc = std::move(scratch);
            return ok();
        }
        default:
            return reject("ipsc: unknown method");
        }
    } catch (const std::exception& ex) {
        return reject(std::string("execution error: ") + ex.what());
    }
}

} // namespace cbdc
