#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cbdc/chain/chain.hpp"

using namespace cbdc;

namespace {

struct ChainBench {
    KeyPair enclave_pb = keygen(SigScheme::pb, 100);
    KeyPair enclave_tee = keygen(SigScheme::tee, 101);
    KeyPair op = keygen(SigScheme::pb, 102);
    Chain chain;
    Digest ipsc;

    explicit ChainBench(uint64_t k = 1, uint64_t t_i0 = 1000, bool authority = true) : chain(k)
    {
        IpscInitParams p;
        p.pk_e_pb = enclave_pb.pk;
        p.pk_e_tee = enclave_tee.pk;
        p.pk_operator = op.pk;
        p.t_i0 = t_i0;
        p.i_r = Rational{1, 10};
        p.issue_authority = authority;
        ipsc = chain.deploy_ipsc(p);
        chain.produce_block(10);
    }

    VersionTransitionPair pair(const Digest& from, const Digest& to, uint64_t t_i, uint64_t t_s) const
    {
        VersionTransitionPair p;
        p.root_from = from;
        p.root_to = to;
        p.t_i = t_i;
        p.t_s = t_s;
        p.sig = sign(enclave_pb.sk, p.signing_payload());
        return p;
    }

    uint64_t submit_pair(const VersionTransitionPair& p)
    {
        return chain.submit(make_chain_tx(op, ipsc, ipsc_method::snapshot_ledger, encode_bytes(p)));
    }

    AccessTicket ticket_for(const KeyPair& client, VirtualTime expires) const
    {
        AccessTicket t;
        t.client_pk = client.pk;
        t.issuing_ipsc = ipsc;
        t.expires_at = expires;
        t.sig = sign(enclave_tee.sk, t.signing_payload());
        return t;
    }
};

Digest root_of(const char* label)
{
    return sha256(to_bytes(label));
}

} // namespace

TEST_CASE("deployment initializes supplies and the genesis root sentinel")
{
    ChainBench b;
    const auto& st = b.chain.finalized();
    REQUIRE(st.ipscs.count(b.ipsc));
    const IpscState& ipsc = st.ipscs.at(b.ipsc);
    CHECK(ipsc.t_i == 1000);
    CHECK(ipsc.t_s == 1000);
    CHECK(ipsc.lroot.is_zero());
    CHECK(ipsc.created_at == 10);
    CHECK(ipsc.pk_pb_hist.size() == 1);
}

TEST_CASE("finality depth gates reads")
{
    ChainBench b(2);
    // ipsc deployed in block 1; with k=2 it is final only after block 2
    CHECK(b.chain.height() == 1);
    CHECK(b.chain.finalized_height() == 0);
    CHECK(b.chain.finalized().ipscs.empty());
    b.chain.produce_block(20);
    CHECK(b.chain.finalized_height() == 1);
    CHECK(b.chain.finalized().ipscs.count(b.ipsc) == 1);
}

TEST_CASE("snapshot chain: genesis accept, extension, replay ignored")
{
    ChainBench b;
    Digest r1 = root_of("r1"), r2 = root_of("r2");

    auto id1 = b.submit_pair(b.pair({}, r1, 1000, 1000));
    b.chain.produce_block(20);
    auto o1 = b.chain.outcome(id1);
    REQUIRE(o1.has_value());
    CHECK(o1->accepted);
    CHECK(o1->applied);
    CHECK(b.chain.finalized().ipscs.at(b.ipsc).lroot == r1);

    auto id2 = b.submit_pair(b.pair(r1, r2, 1000, 1000));
    b.chain.produce_block(30);
    CHECK(b.chain.finalized().ipscs.at(b.ipsc).lroot == r2);
    CHECK(b.chain.outcome(id2)->applied);

    // replayed old pair: accepted but ignored, root unchanged
    auto id3 = b.submit_pair(b.pair({}, r1, 1000, 1000));
    b.chain.produce_block(40);
    CHECK(b.chain.outcome(id3)->accepted);
    CHECK(!b.chain.outcome(id3)->applied);
    CHECK(b.chain.finalized().ipscs.at(b.ipsc).lroot == r2);

    // transitions log stays a function on root_from
    const auto& transitions = b.chain.finalized().ipscs.at(b.ipsc).transitions;
    REQUIRE(transitions.size() == 2);
    CHECK(transitions[0] == std::make_pair(Digest{}, r1));
    CHECK(transitions[1] == std::make_pair(r1, r2));
}

TEST_CASE("equivocation: two signed successors of one root, exactly one applies")
{
    ChainBench b;
    Digest r1 = root_of("r1"), r1b = root_of("r1-other");
    auto ida = b.submit_pair(b.pair({}, r1, 1000, 1000));
    auto idb = b.submit_pair(b.pair({}, r1b, 1000, 1000));
    b.chain.produce_block(20);
    CHECK(b.chain.outcome(ida)->applied);
    CHECK(!b.chain.outcome(idb)->applied);
    CHECK(b.chain.finalized().ipscs.at(b.ipsc).lroot == r1);
    CHECK(b.chain.finalized().ipscs.at(b.ipsc).transitions.size() == 1);
}

TEST_CASE("snapshot signature and supply rules")
{
    ChainBench b;
    Digest r1 = root_of("r1");

    // forged signature rejected
    VersionTransitionPair forged = b.pair({}, r1, 1000, 1000);
    forged.sig.bytes[1] ^= 0x10;
    auto id = b.submit_pair(forged);
    b.chain.produce_block(20);
    CHECK(!b.chain.outcome(id)->accepted);

    // inflation bound enforced at the contract (cap = 1100 in year 0)
    auto id2 = b.submit_pair(b.pair({}, r1, 1101, 1101));
    b.chain.produce_block(30);
    CHECK(!b.chain.outcome(id2)->accepted);
    CHECK(b.chain.finalized().ipscs.at(b.ipsc).t_i == 1000);

    auto id3 = b.submit_pair(b.pair({}, r1, 1100, 1100));
    b.chain.produce_block(40);
    CHECK(b.chain.outcome(id3)->applied);
    CHECK(b.chain.finalized().ipscs.at(b.ipsc).t_i == 1100);
}

TEST_CASE("non-authority instance cannot change t_i")
{
    ChainBench b(1, 500, false);
    Digest r1 = root_of("r1");
    auto id = b.submit_pair(b.pair({}, r1, 501, 500));
    b.chain.produce_block(20);
    CHECK(!b.chain.outcome(id)->accepted);

    auto id2 = b.submit_pair(b.pair({}, r1, 500, 475));
    b.chain.produce_block(30);
    CHECK(b.chain.outcome(id2)->applied); // t_s may move (transfers), t_i may not
    CHECK(b.chain.finalized().ipscs.at(b.ipsc).t_s == 475);
}

TEST_CASE("censorship requests: ticket gate, resolution, forged resolution rejected")
{
    ChainBench b;
    KeyPair client = keygen(SigScheme::pb, 200);
    Bytes etx = to_bytes("sealed-micro-tx");

    // no valid ticket: rejected
    AccessTicket bad = b.ticket_for(client, 5); // expired at block time 20
    auto id0 = b.chain.submit(make_chain_tx(client, b.ipsc, ipsc_method::submit_cens_tx,
                                            encode_bytes(SubmitCensArgs{etx, bad})));
    b.chain.produce_block(20);
    CHECK(!b.chain.outcome(id0)->accepted);

    AccessTicket good = b.ticket_for(client, 1000);
    auto id1 = b.chain.submit(make_chain_tx(client, b.ipsc, ipsc_method::submit_cens_tx,
                                            encode_bytes(SubmitCensArgs{etx, good})));
    b.chain.produce_block(30);
    REQUIRE(b.chain.outcome(id1)->accepted);
    uint64_t idx = b.chain.outcome(id1)->ret;
    CHECK(b.chain.finalized().ipscs.at(b.ipsc).cens_reqs.at(idx).status == 0);

    // a ticket for someone else's key is refused
    KeyPair mallory = keygen(SigScheme::pb, 201);
    auto id2 = b.chain.submit(make_chain_tx(mallory, b.ipsc, ipsc_method::submit_cens_tx,
                                            encode_bytes(SubmitCensArgs{etx, good})));
    b.chain.produce_block(40);
    CHECK(!b.chain.outcome(id2)->accepted);

    // forged resolution signature leaves the standing request untouched
    ResolveCensTxArgs forged{idx, cens_status::executed_ok, sign(keygen(SigScheme::pb, 202).sk, to_bytes("x"))};
    auto id3 = b.chain.submit(make_chain_tx(b.op, b.ipsc, ipsc_method::resolve_cens_tx, encode_bytes(forged)));
    b.chain.produce_block(50);
    CHECK(!b.chain.outcome(id3)->accepted);
    CHECK(b.chain.finalized().ipscs.at(b.ipsc).cens_reqs.at(idx).status == 0);

    // enclave-signed resolution lands
    Encoder e;
    e.put_digest(sha256(etx));
    e.put_u8(cens_status::executed_ok);
    ResolveCensTxArgs res{idx, cens_status::executed_ok, sign(b.enclave_pb.sk, e.bytes())};
    auto id4 = b.chain.submit(make_chain_tx(b.op, b.ipsc, ipsc_method::resolve_cens_tx, encode_bytes(res)));
    b.chain.produce_block(60);
    CHECK(b.chain.outcome(id4)->accepted);
    CHECK(b.chain.finalized().ipscs.at(b.ipsc).cens_reqs.at(idx).status == cens_status::executed_ok);

    // resolve is set-once
    auto id5 = b.chain.submit(make_chain_tx(b.op, b.ipsc, ipsc_method::resolve_cens_tx, encode_bytes(res)));
    b.chain.produce_block(70);
    CHECK(!b.chain.outcome(id5)->accepted);
}

TEST_CASE("censored query resolution stores edata bound by the signature")
{
    ChainBench b;
    KeyPair client = keygen(SigScheme::pb, 210);
    Bytes equery = to_bytes("sealed-query");
    AccessTicket t = b.ticket_for(client, 1000);
    auto id = b.chain.submit(make_chain_tx(client, b.ipsc, ipsc_method::submit_cens_qry,
                                           encode_bytes(SubmitCensArgs{equery, t})));
    b.chain.produce_block(20);
    uint64_t idx = b.chain.outcome(id)->ret;

    Bytes edata = to_bytes("sealed-proof");
    Encoder e;
    e.put_digest(sha256(equery));
    e.put_u8(cens_status::executed_ok);
    e.put_digest(sha256(edata));
    Signature sig = sign(b.enclave_pb.sk, e.bytes());

    // wrong edata for the signed hash is rejected
    ResolveCensQryArgs wrong{idx, cens_status::executed_ok, to_bytes("other"), sig};
    auto idw = b.chain.submit(make_chain_tx(b.op, b.ipsc, ipsc_method::resolve_cens_qry, encode_bytes(wrong)));
    b.chain.produce_block(30);
    CHECK(!b.chain.outcome(idw)->accepted);

    ResolveCensQryArgs right{idx, cens_status::executed_ok, edata, sig};
    auto idr = b.chain.submit(make_chain_tx(b.op, b.ipsc, ipsc_method::resolve_cens_qry, encode_bytes(right)));
    b.chain.produce_block(40);
    CHECK(b.chain.outcome(idr)->accepted);
    CHECK(b.chain.finalized().ipscs.at(b.ipsc).cens_reqs.at(idx).edata == edata);
}

TEST_CASE("enclave replacement is atomic with its embedded snapshot")
{
    ChainBench b;
    Digest r1 = root_of("r1");
    b.submit_pair(b.pair({}, r1, 1000, 1000));
    b.chain.produce_block(20);

    KeyPair new_pb = keygen(SigScheme::pb, 300);
    KeyPair new_tee = keygen(SigScheme::tee, 301);

    // stale embedded snapshot: whole call rejected, keys unchanged
    ReplaceEncArgs stale{new_pb.pk, new_tee.pk, b.pair({}, r1, 1000, 1000)};
    auto id1 = b.chain.submit(make_chain_tx(b.op, b.ipsc, ipsc_method::replace_enclave, encode_bytes(stale)));
    b.chain.produce_block(30);
    CHECK(!b.chain.outcome(id1)->accepted);
    CHECK(b.chain.finalized().ipscs.at(b.ipsc).pk_pb_hist.size() == 1);

    // non-operator sender rejected
    ReplaceEncArgs good{new_pb.pk, new_tee.pk, b.pair(r1, r1, 1000, 1000)};
    auto id2 = b.chain.submit(make_chain_tx(keygen(SigScheme::pb, 302), b.ipsc, ipsc_method::replace_enclave,
                                            encode_bytes(good)));
    b.chain.produce_block(40);
    CHECK(!b.chain.outcome(id2)->accepted);

    // reflexive snapshot signed by the dying enclave rotates the keys
    auto id3 = b.chain.submit(make_chain_tx(b.op, b.ipsc, ipsc_method::replace_enclave, encode_bytes(good)));
    b.chain.produce_block(50);
    CHECK(b.chain.outcome(id3)->accepted);
    const auto& ipsc = b.chain.finalized().ipscs.at(b.ipsc);
    CHECK(ipsc.pk_pb_hist.size() == 2);
    CHECK(ipsc.pk_pb_hist.back() == new_pb.pk);

    // snapshots must now verify under the new key
    Digest r2 = root_of("r2");
    auto old_signed = b.submit_pair(b.pair(r1, r2, 1000, 1000));
    b.chain.produce_block(60);
    CHECK(!b.chain.outcome(old_signed)->accepted);

    VersionTransitionPair p2;
    p2.root_from = r1;
    p2.root_to = r2;
    p2.t_i = 1000;
    p2.t_s = 1000;
    p2.sig = sign(new_pb.sk, p2.signing_payload());
    auto new_signed = b.chain.submit(make_chain_tx(b.op, b.ipsc, ipsc_method::snapshot_ledger, encode_bytes(p2)));
    b.chain.produce_block(70);
    CHECK(b.chain.outcome(new_signed)->applied);
}

TEST_CASE("decentralized registry: join flips exactly at majority")
{
    Chain chain(1);
    std::vector<KeyPair> ops;
    std::vector<Digest> ids;
    std::vector<std::pair<Digest, PublicKey>> initial;
    for (int i = 0; i < 3; ++i) {
        ops.push_back(keygen(SigScheme::pb, 400 + i));
        ids.push_back(sha256(to_bytes("ipsc-" + std::to_string(i))));
        initial.emplace_back(ids[i], ops[i].pk);
    }
    chain.init_imsc_decentralized(initial);

    KeyPair new_op = keygen(SigScheme::pb, 410);
    Digest new_ipsc = sha256(to_bytes("ipsc-new"));
    chain.submit(make_chain_tx(new_op, imsc_contract_id(), imsc_method::new_join_request,
                               encode_bytes(ImscJoinArgs{new_ipsc})));
    chain.produce_block(10);
    CHECK(!instance_approved(chain.finalized(), new_ipsc));

    // duplicate join request rejected
    auto dup = chain.submit(make_chain_tx(new_op, imsc_contract_id(), imsc_method::new_join_request,
                                          encode_bytes(ImscJoinArgs{new_ipsc})));
    chain.produce_block(11);
    CHECK(!chain.outcome(dup)->accepted);

    // |instances| = 4 now, threshold floor(4/2) = 2, strict >: third vote flips
    auto vote = [&](int voter) {
        return chain.submit(make_chain_tx(ops[voter], imsc_contract_id(), imsc_method::approve_join,
                                          encode_bytes(ImscVoteArgs{ids[voter], new_ipsc})));
    };
    vote(0);
    chain.produce_block(12);
    CHECK(!instance_approved(chain.finalized(), new_ipsc));
    vote(1);
    chain.produce_block(13);
    CHECK(!instance_approved(chain.finalized(), new_ipsc)); // 2 votes: not > 2
    vote(2);
    chain.produce_block(14);
    CHECK(instance_approved(chain.finalized(), new_ipsc)); // 3 votes: flips

    // approvals reset after success
    CHECK(chain.finalized().imsc_d->instances.at(new_ipsc).approvals.empty());

    // self-approval is forbidden
    KeyPair other_op = keygen(SigScheme::pb, 411);
    Digest other_ipsc = sha256(to_bytes("ipsc-other"));
    chain.submit(make_chain_tx(other_op, imsc_contract_id(), imsc_method::new_join_request,
                               encode_bytes(ImscJoinArgs{other_ipsc})));
    chain.produce_block(15);
    auto self_vote = chain.submit(make_chain_tx(other_op, imsc_contract_id(), imsc_method::approve_join,
                                                encode_bytes(ImscVoteArgs{other_ipsc, other_ipsc})));
    chain.produce_block(16);
    CHECK(!chain.outcome(self_vote)->accepted);

    // vote from an unapproved instance rejected
    auto bad_vote = chain.submit(make_chain_tx(other_op, imsc_contract_id(), imsc_method::approve_join,
                                               encode_bytes(ImscVoteArgs{other_ipsc, new_ipsc})));
    chain.produce_block(17);
    CHECK(!chain.outcome(bad_vote)->accepted);
}

TEST_CASE("decentralized registry: deletion by majority")
{
    Chain chain(1);
    std::vector<KeyPair> ops;
    std::vector<Digest> ids;
    std::vector<std::pair<Digest, PublicKey>> initial;
    for (int i = 0; i < 3; ++i) {
        ops.push_back(keygen(SigScheme::pb, 420 + i));
        ids.push_back(sha256(to_bytes("del-ipsc-" + std::to_string(i))));
        initial.emplace_back(ids[i], ops[i].pk);
    }
    chain.init_imsc_decentralized(initial);

    auto vote_del = [&](int voter) {
        return chain.submit(make_chain_tx(ops[voter], imsc_contract_id(), imsc_method::approve_delete,
                                          encode_bytes(ImscVoteArgs{ids[voter], ids[2]})));
    };
    vote_del(0);
    chain.produce_block(10);
    CHECK(instance_approved(chain.finalized(), ids[2])); // 1 vote: not > 1
    vote_del(1);
    chain.produce_block(11);
    CHECK(!instance_approved(chain.finalized(), ids[2])); // 2 votes: deleted
    CHECK(chain.finalized().imsc_d->instances.count(ids[2]) == 0);
}

TEST_CASE("centralized registry: only the authority mutates")
{
    Chain chain(1);
    KeyPair authority = keygen(SigScheme::pb, 430);
    Digest authority_ipsc = sha256(to_bytes("central"));
    chain.init_imsc_centralized(authority_ipsc, authority.pk);

    KeyPair bank_op = keygen(SigScheme::pb, 431);
    Digest bank = sha256(to_bytes("bank-B"));

    auto add = chain.submit(make_chain_tx(authority, imsc_contract_id(), imsc_method::add_instance,
                                          encode_bytes(ImscAddArgs{bank, bank_op.pk})));
    chain.produce_block(10);
    CHECK(chain.outcome(add)->accepted);
    CHECK(instance_approved(chain.finalized(), bank));
    CHECK(instance_approved(chain.finalized(), authority_ipsc));

    auto bad_add = chain.submit(make_chain_tx(bank_op, imsc_contract_id(), imsc_method::add_instance,
                                              encode_bytes(ImscAddArgs{sha256(to_bytes("bank-C")), bank_op.pk})));
    chain.produce_block(11);
    CHECK(!chain.outcome(bad_add)->accepted);

    auto dup = chain.submit(make_chain_tx(authority, imsc_contract_id(), imsc_method::add_instance,
                                          encode_bytes(ImscAddArgs{bank, bank_op.pk})));
    chain.produce_block(12);
    CHECK(!chain.outcome(dup)->accepted);

    auto bad_del = chain.submit(make_chain_tx(bank_op, imsc_contract_id(), imsc_method::del_instance,
                                              encode_bytes(ImscJoinArgs{bank})));
    chain.produce_block(13);
    CHECK(!chain.outcome(bad_del)->accepted);

    auto del = chain.submit(make_chain_tx(authority, imsc_contract_id(), imsc_method::del_instance,
                                          encode_bytes(ImscJoinArgs{bank})));
    chain.produce_block(14);
    CHECK(chain.outcome(del)->accepted);
    CHECK(!instance_approved(chain.finalized(), bank));

    // delete then re-add the same id
    auto readd = chain.submit(make_chain_tx(authority, imsc_contract_id(), imsc_method::add_instance,
                                            encode_bytes(ImscAddArgs{bank, bank_op.pk})));
    chain.produce_block(15);
    CHECK(chain.outcome(readd)->accepted);
    CHECK(instance_approved(chain.finalized(), bank));
}

TEST_CASE("bad chain tx signature is rejected at the block boundary")
{
    ChainBench b;
    ChainTx tx = make_chain_tx(b.op, b.ipsc, ipsc_method::snapshot_ledger,
                               encode_bytes(b.pair({}, root_of("r"), 1000, 1000)));
    tx.sig.bytes[0] ^= 1;
    auto id = b.chain.submit(tx);
    b.chain.produce_block(20);
    CHECK(!b.chain.outcome(id)->accepted);
    CHECK(b.chain.finalized().ipscs.at(b.ipsc).lroot.is_zero());
}

TEST_CASE("identical submissions produce identical chains")
{
    auto run = []() {
        ChainBench b;
        b.submit_pair(b.pair({}, root_of("r1"), 1000, 1000));
        b.submit_pair(b.pair(root_of("r1"), root_of("r2"), 1000, 990));
        b.chain.produce_block(20);
        b.chain.produce_block(30);
        const auto& ipsc = b.chain.finalized().ipscs.at(b.ipsc);
        Encoder e;
        e.put_digest(ipsc.lroot);
        e.put_u64(ipsc.t_i);
        e.put_u64(ipsc.t_s);
        return e.take();
    };
    CHECK(run() == run());
}
