#include "cbdc/evidence.hpp"
#include "cbdc/vm/types.hpp"

namespace cbdc {

Address address_of(const PublicKey& pk)
{
    return sha256_tagged(hash_tag::address, encode_bytes(pk));
}

Address iomc_send_address()
{
    static const Address a = sha256_tagged(hash_tag::address, to_bytes("iomc/send"));
    return a;
}

Address iomc_recv_address()
{
    static const Address a = sha256_tagged(hash_tag::address, to_bytes("iomc/receive"));
    return a;
}

// --- MicroTransaction ------------------------------------------------------

namespace {

void encode_call(Encoder& e, const CallData& call)
{
    if (const auto* t = std::get_if<TransferCall>(&call)) {
        e.put_u8(1);
        e.put_digest(t->to);
        e.put_u64(t->amount);
    } else if (const auto* c = std::get_if<IomcCall>(&call)) {
        e.put_u8(2);
        e.put_u8(static_cast<uint8_t>(c->contract));
        e.put_u8(static_cast<uint8_t>(c->method));
        e.put_var(c->args);
    } else if (std::holds_alternative<RegisterCall>(call)) {
        e.put_u8(3);
    } else {
        const auto& i = std::get<IssueCall>(call);
        e.put_u8(4);
        e.put_digest(i.to);
        e.put_u64(i.amount);
    }
}

CallData decode_call(Decoder& d)
{
    switch (d.u8()) {
    case 1: {
        TransferCall t;
        t.to = d.digest();
        t.amount = d.u64();
        return t;
    }
    case 2: {
        IomcCall c;
        uint8_t contract = d.u8();
        uint8_t method = d.u8();
        if (contract != 1 && contract != 2)
            throw DecodeError("bad iomc contract");
        if (method < 1 || method > 4)
            throw DecodeError("bad iomc method");
        c.contract = static_cast<IomcContract>(contract);
        c.method = static_cast<IomcMethod>(method);
        c.args = d.var();
        return c;
    }
    case 3:
        return RegisterCall{};
    case 4: {
        IssueCall i;
        i.to = d.digest();
        i.amount = d.u64();
        return i;
    }
    default:
        throw DecodeError("bad call kind");
    }
}

} // namespace

Bytes MicroTransaction::signing_payload() const
{
    Encoder e;
    e.put_tag(WireTag::micro_tx);
    sender_pk.encode(e);
    e.put_u64(nonce);
    encode_call(e, call);
    e.put_u64(value);
    return e.take();
}

Digest MicroTransaction::hash() const
{
    return sha256_tagged(hash_tag::object, encode_bytes(*this));
}

void MicroTransaction::encode(Encoder& e) const
{
    e.put_tag(WireTag::micro_tx);
    sender_pk.encode(e);
    e.put_u64(nonce);
    encode_call(e, call);
    e.put_u64(value);
    sig.encode(e);
}

MicroTransaction MicroTransaction::decode(Decoder& d)
{
    d.expect_tag(WireTag::micro_tx);
    MicroTransaction tx;
    tx.sender_pk = PublicKey::decode(d);
    tx.nonce = d.u64();
    tx.call = decode_call(d);
    tx.value = d.u64();
    tx.sig = Signature::decode(d);
    return tx;
}

MicroTransaction make_signed_tx(const KeyPair& sender, uint64_t nonce, CallData call, uint64_t value)
{
    MicroTransaction tx;
    tx.sender_pk = sender.pk;
    tx.nonce = nonce;
    tx.call = std::move(call);
    tx.value = value;
    tx.sig = sign(sender.sk, tx.signing_payload());
    return tx;
}

// --- Receipt / events ------------------------------------------------------

void Receipt::encode(Encoder& e) const
{
    e.put_tag(WireTag::receipt);
    e.put_digest(tx_hash);
    e.put_u8(static_cast<uint8_t>(status));
    e.put_list(events, [](Encoder& enc, const Event& ev) { ev.encode(enc); });
    e.put_u64(gas);
}

Receipt Receipt::decode(Decoder& d)
{
    d.expect_tag(WireTag::receipt);
    Receipt r;
    r.tx_hash = d.digest();
    uint8_t s = d.u8();
    if (s != 1 && s != 2)
        throw DecodeError("bad receipt status");
    r.status = static_cast<TxStatus>(s);
    r.events = d.list<Event>([](Decoder& dec) { return Event::decode(dec); });
    r.gas = d.u64();
    return r;
}

Event make_event_u64(EventKind kind, uint64_t id)
{
    Encoder e;
    e.put_u64(id);
    return Event{kind, e.take()};
}

Event make_event_ticket(const AccessTicket& t)
{
    return Event{EventKind::ticket_issued, encode_bytes(t)};
}

Event make_event_issued(const Address& to, uint64_t amount)
{
    Encoder e;
    e.put_digest(to);
    e.put_u64(amount);
    return Event{EventKind::issued, e.take()};
}

Event make_event_send_committed(const SendCommittedInfo& info)
{
    Encoder e;
    e.put_u64(info.transfer_id);
    e.put_u64(info.ext_transfer_id);
    info.receiver.encode(e);
    e.put_digest(info.receiver_ipsc);
    e.put_u64(info.amount);
    return Event{EventKind::send_committed, e.take()};
}

std::optional<uint64_t> event_u64(const Receipt& r, EventKind kind)
{
    for (const auto& ev : r.events) {
        if (ev.kind == kind) {
            Decoder d(ev.payload);
            uint64_t v = d.u64();
            d.expect_end();
            return v;
        }
    }
    return std::nullopt;
}

std::optional<AccessTicket> event_ticket(const Receipt& r)
{
    for (const auto& ev : r.events) {
        if (ev.kind == EventKind::ticket_issued)
            return decode_bytes<AccessTicket>(ev.payload);
    }
    return std::nullopt;
}

std::optional<SendCommittedInfo> event_send_committed(const Receipt& r)
{
    for (const auto& ev : r.events) {
        if (ev.kind == EventKind::send_committed) {
            Decoder d(ev.payload);
            SendCommittedInfo info;
            info.transfer_id = d.u64();
            info.ext_transfer_id = d.u64();
            info.receiver = PublicKey::decode(d);
            info.receiver_ipsc = d.digest();
            info.amount = d.u64();
            d.expect_end();
            return info;
        }
    }
    return std::nullopt;
}

// --- IOMC storage records --------------------------------------------------

void LockedTransferOut::encode(Encoder& e) const
{
    e.put_tag(WireTag::locked_out);
    e.put_digest(sender);
    receiver.encode(e);
    e.put_digest(receiver_ipsc);
    e.put_u64(amount);
    e.put_digest(hashlock);
    e.put_u64(timelock);
    e.put_bool(is_completed);
    e.put_bool(is_reverted);
}

LockedTransferOut LockedTransferOut::decode(Decoder& d)
{
    d.expect_tag(WireTag::locked_out);
    LockedTransferOut t;
    t.sender = d.digest();
    t.receiver = PublicKey::decode(d);
    t.receiver_ipsc = d.digest();
    t.amount = d.u64();
    t.hashlock = d.digest();
    t.timelock = d.u64();
    t.is_completed = d.boolean();
    t.is_reverted = d.boolean();
    return t;
}

void LockedTransferIn::encode(Encoder& e) const
{
    e.put_tag(WireTag::locked_in);
    sender.encode(e);
    e.put_digest(sender_ipsc);
    e.put_digest(receiver);
    e.put_u64(amount);
    e.put_digest(hashlock);
    e.put_bool(is_completed);
}

LockedTransferIn LockedTransferIn::decode(Decoder& d)
{
    d.expect_tag(WireTag::locked_in);
    LockedTransferIn t;
    t.sender = PublicKey::decode(d);
    t.sender_ipsc = d.digest();
    t.receiver = d.digest();
    t.amount = d.u64();
    t.hashlock = d.digest();
    t.is_completed = d.boolean();
    return t;
}

// --- Partial state ---------------------------------------------------------

void PartialState::encode(Encoder& e) const
{
    e.put_tag(WireTag::partial_state);
    e.put_u64(account_count);
    e.put_u32(static_cast<uint32_t>(touched.size()));
    for (const auto& [idx, rec] : touched) {
        e.put_u64(idx);
        rec.encode(e);
    }
    e.put_list(iomc_send, [](Encoder& enc, const LockedTransferOut& t) { t.encode(enc); });
    e.put_list(iomc_recv, [](Encoder& enc, const LockedTransferIn& t) { t.encode(enc); });
    witness.encode(e);
    e.put_digest(root);
}

PartialState PartialState::decode(Decoder& d)
{
    d.expect_tag(WireTag::partial_state);
    PartialState st;
    st.account_count = d.u64();
    uint32_t n = d.u32();
    for (uint32_t i = 0; i < n; ++i) {
        uint64_t idx = d.u64();
        st.touched.emplace(idx, AccountRecord::decode(d));
    }
    st.iomc_send = d.list<LockedTransferOut>([](Decoder& dec) { return LockedTransferOut::decode(dec); });
    st.iomc_recv = d.list<LockedTransferIn>([](Decoder& dec) { return LockedTransferIn::decode(dec); });
    st.witness = TreeWitness::decode(d);
    st.root = d.digest();
    return st;
}

Digest account_leaf_hash(const AccountRecord& r)
{
    return mk_leaf_hash(encode_bytes(r));
}

Digest compose_state_root(const Digest& account_root, const std::vector<LockedTransferOut>& iomc_send,
                          const std::vector<LockedTransferIn>& iomc_recv)
{
    Encoder se;
    se.put_list(iomc_send, [](Encoder& enc, const LockedTransferOut& t) { t.encode(enc); });
    Encoder re;
    re.put_list(iomc_recv, [](Encoder& enc, const LockedTransferIn& t) { t.encode(enc); });

    Encoder e;
    e.put_digest(account_root);
    e.put_digest(sha256_tagged(hash_tag::object, se.bytes()));
    e.put_digest(sha256_tagged(hash_tag::object, re.bytes()));
    return sha256_tagged(hash_tag::state, e.bytes());
}

// --- IOMC argument structs --------------------------------------------------

void SendInitArgs::encode(Encoder& e) const
{
    receiver.encode(e);
    e.put_digest(receiver_ipsc);
    e.put_digest(hashlock);
}

SendInitArgs SendInitArgs::decode(Decoder& d)
{
    SendInitArgs a;
    a.receiver = PublicKey::decode(d);
    a.receiver_ipsc = d.digest();
    a.hashlock = d.digest();
    return a;
}

void SendRevertArgs::encode(Encoder& e) const
{
    e.put_u64(transfer_id);
}

SendRevertArgs SendRevertArgs::decode(Decoder& d)
{
    SendRevertArgs a;
    a.transfer_id = d.u64();
    return a;
}

void ReceiveInitArgs::encode(Encoder& e) const
{
    sender.encode(e);
    e.put_digest(sender_ipsc);
    e.put_digest(hashlock);
    e.put_u64(amount);
}

ReceiveInitArgs ReceiveInitArgs::decode(Decoder& d)
{
    ReceiveInitArgs a;
    a.sender = PublicKey::decode(d);
    a.sender_ipsc = d.digest();
    a.hashlock = d.digest();
    a.amount = d.u64();
    return a;
}

void FundArgs::encode(Encoder&) const {}

FundArgs FundArgs::decode(Decoder&)
{
    return FundArgs{};
}

// --- Evidence ----------------------------------------------------------------

void TransferEvidence::encode(Encoder& e) const
{
    e.put_tag(WireTag::transfer_evidence);
    mu_tx.encode(e);
    receipt.encode(e);
    hdr.encode(e);
    hdr_proof.encode(e);
    rcp_proof.encode(e);
    lroot.encode(e);
}

TransferEvidence TransferEvidence::decode(Decoder& d)
{
    d.expect_tag(WireTag::transfer_evidence);
    TransferEvidence ev;
    ev.mu_tx = MicroTransaction::decode(d);
    ev.receipt = Receipt::decode(d);
    ev.hdr = Header::decode(d);
    ev.hdr_proof = MembershipProof::decode(d);
    ev.rcp_proof = MerkleProof::decode(d);
    ev.lroot = Commitment::decode(d);
    return ev;
}

void ForeignEvidence::encode(Encoder& e) const
{
    e.put_digest(ipsc_id);
    evidence.encode(e);
    inc_proof.encode(e);
    snapshot.encode(e);
}

ForeignEvidence ForeignEvidence::decode(Decoder& d)
{
    ForeignEvidence f;
    f.ipsc_id = d.digest();
    f.evidence = TransferEvidence::decode(d);
    f.inc_proof = IncrementalProof::decode(d);
    f.snapshot = Commitment::decode(d);
    return f;
}

bool evidence_wellformed(const TransferEvidence& ev)
{
    if (ev.receipt.tx_hash != ev.mu_tx.hash())
        return false;
    if (!verify(ev.mu_tx.sender_pk, ev.mu_tx.signing_payload(), ev.mu_tx.sig))
        return false;
    if (!mk_verify(ev.rcp_proof, encode_bytes(ev.receipt), ev.hdr.rcp_root))
        return false;
    if (!mem_verify(ev.hdr_proof, ev.hdr.id, encode_bytes(ev.hdr), ev.lroot))
        return false;
    return true;
}

void SendCommitArgs::encode(Encoder& e) const
{
    e.put_u64(transfer_id);
    e.put_var(secret);
    e.put_u64(ext_transfer_id);
    foreign.encode(e);
}

SendCommitArgs SendCommitArgs::decode(Decoder& d)
{
    SendCommitArgs a;
    a.transfer_id = d.u64();
    a.secret = d.var();
    a.ext_transfer_id = d.u64();
    a.foreign = ForeignEvidence::decode(d);
    return a;
}

void ReceiveCommitArgs::encode(Encoder& e) const
{
    e.put_u64(transfer_id);
    e.put_var(secret);
    foreign.encode(e);
}

ReceiveCommitArgs ReceiveCommitArgs::decode(Decoder& d)
{
    ReceiveCommitArgs a;
    a.transfer_id = d.u64();
    a.secret = d.var();
    a.foreign = ForeignEvidence::decode(d);
    return a;
}

} // namespace cbdc
