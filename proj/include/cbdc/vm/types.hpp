#pragma once

#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "cbdc/history_tree.hpp"
#include "cbdc/keys.hpp"
#include "cbdc/ticket.hpp"

namespace cbdc {

using Address = Digest;
using VirtualTime = uint64_t; // virtual seconds; wall clock is never consulted

Address address_of(const PublicKey& pk);
Address iomc_send_address();
Address iomc_recv_address();

struct Account {
    uint64_t balance = 0;
    uint64_t nonce = 0;

    auto operator<=>(const Account&) const = default;
};

struct AccountRecord {
    Address address;
    Account account;

    void encode(Encoder& e) const
    {
        e.put_tag(WireTag::account_record);
        e.put_digest(address);
        e.put_u64(account.balance);
        e.put_u64(account.nonce);
    }

    static AccountRecord decode(Decoder& d)
    {
        d.expect_tag(WireTag::account_record);
        AccountRecord r;
        r.address = d.digest();
        r.account.balance = d.u64();
        r.account.nonce = d.u64();
        return r;
    }
};

// ---------------------------------------------------------------------------
// Micro-transactions

enum class IomcContract : uint8_t {
    send = 1,
    receive = 2,
};

enum class IomcMethod : uint8_t {
    init = 1,
    commit = 2,
    revert_transfer = 3,
    fund = 4, // receive-side faucet, test use
};

struct TransferCall {
    Address to;
    uint64_t amount = 0;
};

struct IomcCall {
    IomcContract contract = IomcContract::send;
    IomcMethod method = IomcMethod::init;
    Bytes args; // canonical encoding of the method's argument struct
};

struct RegisterCall {}; // registering key is the transaction sender

struct IssueCall {
    Address to;
    uint64_t amount = 0;
};

using CallData = std::variant<TransferCall, IomcCall, RegisterCall, IssueCall>;

struct MicroTransaction {
    PublicKey sender_pk;
    uint64_t nonce = 0;
    CallData call = RegisterCall{};
    uint64_t value = 0; // tokens attached (escrowed by payable IOMC methods)
    Signature sig;

    Bytes signing_payload() const;
    Digest hash() const;

    void encode(Encoder& e) const;
    static MicroTransaction decode(Decoder& d);
};

MicroTransaction make_signed_tx(const KeyPair& sender, uint64_t nonce, CallData call, uint64_t value);

// ---------------------------------------------------------------------------
// Receipts and events

enum class TxStatus : uint8_t {
    ok = 1,
    reverted = 2,
};

enum class EventKind : uint8_t {
    registered = 1,
    ticket_issued = 2,
    issued = 3,
    send_initialized = 4,
    send_committed = 5,
    send_reverted = 6,
    receive_initialized = 7,
    receive_committed = 8,
    funded = 9,
};

struct Event {
    EventKind kind = EventKind::registered;
    Bytes payload;

    void encode(Encoder& e) const
    {
        e.put_tag(WireTag::event);
        e.put_u8(static_cast<uint8_t>(kind));
        e.put_var(payload);
    }

    static Event decode(Decoder& d)
    {
        d.expect_tag(WireTag::event);
        Event ev;
        ev.kind = static_cast<EventKind>(d.u8());
        ev.payload = d.var();
        return ev;
    }
};

struct Receipt {
    Digest tx_hash;
    TxStatus status = TxStatus::ok;
    std::vector<Event> events;
    uint64_t gas = 0; // not modeled

    void encode(Encoder& e) const;
    static Receipt decode(Decoder& d);
};

/// Typed event payloads.
struct SendCommittedInfo {
    uint64_t transfer_id = 0;
    uint64_t ext_transfer_id = 0;
    PublicKey receiver;
    Digest receiver_ipsc;
    uint64_t amount = 0;
};

Event make_event_u64(EventKind kind, uint64_t id);
Event make_event_ticket(const AccessTicket& t);
Event make_event_issued(const Address& to, uint64_t amount);
Event make_event_send_committed(const SendCommittedInfo& info);

std::optional<uint64_t> event_u64(const Receipt& r, EventKind kind);
std::optional<AccessTicket> event_ticket(const Receipt& r);
std::optional<SendCommittedInfo> event_send_committed(const Receipt& r);

// ---------------------------------------------------------------------------
// Micro-block header

struct Header {
    uint64_t id = 0; // 1-based version this header creates
    Digest txs_root;
    Digest rcp_root;
    Digest st_root;

    auto operator<=>(const Header&) const = default;

    void encode(Encoder& e) const
    {
        e.put_tag(WireTag::header);
        e.put_u64(id);
        e.put_digest(txs_root);
        e.put_digest(rcp_root);
        e.put_digest(st_root);
    }

    static Header decode(Decoder& d)
    {
        d.expect_tag(WireTag::header);
        Header h;
        h.id = d.u64();
        h.txs_root = d.digest();
        h.rcp_root = d.digest();
        h.st_root = d.digest();
        return h;
    }
};

// ---------------------------------------------------------------------------
// IOMC storage records

struct LockedTransferOut {
    Address sender;             // local client escrowing the tokens
    PublicKey receiver;         // external client
    Digest receiver_ipsc;       // receiver's instance
    uint64_t amount = 0;
    Digest hashlock;
    VirtualTime timelock = 0;   // end of validity; revert allowed from here
    bool is_completed = false;
    bool is_reverted = false;

    void encode(Encoder& e) const;
    static LockedTransferOut decode(Decoder& d);
};

struct LockedTransferIn {
    PublicKey sender;           // external client
    Digest sender_ipsc;
    Address receiver;           // local client to credit
    uint64_t amount = 0;
    Digest hashlock;
    bool is_completed = false;

    void encode(Encoder& e) const;
    static LockedTransferIn decode(Decoder& d);
};

// ---------------------------------------------------------------------------
// Partial state

/// State slice handed to the enclave: the touched accounts with a frozen-
/// subtree witness tying them to the full-state commitment, plus the IOMC
/// contract storage carried whole.
struct PartialState {
    uint64_t account_count = 0;
    std::map<uint64_t, AccountRecord> touched; // account index -> record
    std::vector<LockedTransferOut> iomc_send;
    std::vector<LockedTransferIn> iomc_recv;
    TreeWitness witness;
    Digest root;

    void encode(Encoder& e) const;
    static PartialState decode(Decoder& d);
};

Digest account_leaf_hash(const AccountRecord& r);

/// Full-state commitment from its three components.
Digest compose_state_root(const Digest& account_root, const std::vector<LockedTransferOut>& iomc_send,
                          const std::vector<LockedTransferIn>& iomc_recv);

// ---------------------------------------------------------------------------
// IOMC method argument structs

struct SendInitArgs {
    PublicKey receiver;
    Digest receiver_ipsc;
    Digest hashlock;

    void encode(Encoder& e) const;
    static SendInitArgs decode(Decoder& d);
};

struct SendRevertArgs {
    uint64_t transfer_id = 0;

    void encode(Encoder& e) const;
    static SendRevertArgs decode(Decoder& d);
};

struct ReceiveInitArgs {
    PublicKey sender;
    Digest sender_ipsc;
    Digest hashlock;
    uint64_t amount = 0;

    void encode(Encoder& e) const;
    static ReceiveInitArgs decode(Decoder& d);
};

struct FundArgs {
    void encode(Encoder& e) const;
    static FundArgs decode(Decoder& d);
};

// Commit args live in evidence.hpp: they embed cross-instance evidence.

} // namespace cbdc
