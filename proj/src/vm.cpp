#include "cbdc/vm/vm.hpp"

#include <stdexcept>

namespace cbdc {

namespace {

// Working copy of the state slice during a batch.
struct WorkingState {
    uint64_t count = 0;
    std::map<uint64_t, AccountRecord> accounts; // index -> record
    std::map<Address, uint64_t> index;
    std::vector<LockedTransferOut> iomc_send;
    std::vector<LockedTransferIn> iomc_recv;

    Account* find(const Address& a)
    {
        auto it = index.find(a);
        if (it == index.end())
            return nullptr;
        return &accounts.at(it->second).account;
    }

    void append_account(const Address& a, Account acct)
    {
        accounts[count] = AccountRecord{a, acct};
        index[a] = count;
        ++count;
    }
};

struct Reverted : std::runtime_error {
    Reverted() : std::runtime_error("reverted") {}
};

void require(bool cond)
{
    if (!cond)
        throw Reverted{};
}

Account& account_or_revert(WorkingState& st, const Address& a)
{
    Account* acct = st.find(a);
    require(acct != nullptr);
    return *acct;
}

void move_tokens(WorkingState& st, const Address& from, const Address& to, uint64_t amount)
{
    Account& src = account_or_revert(st, from);
    Account& dst = account_or_revert(st, to);
    require(src.balance >= amount);
    src.balance -= amount;
    dst.balance += amount;
}

template <typename T>
T decode_args_or_revert(const Bytes& args)
{
    try {
        return decode_bytes<T>(args);
    } catch (const std::exception&) {
        throw Reverted{};
    }
}

std::vector<Event> exec_send(const IomcCall& call, const MicroTransaction& tx, WorkingState& st, EnclaveHooks& hooks)
{
    std::vector<Event> events;
    switch (call.method) {
    case IomcMethod::init: {
        auto args = decode_args_or_revert<SendInitArgs>(call.args);
        require(tx.value > 0);
        Address sender = address_of(tx.sender_pk);
        require(st.find(sender) != nullptr && st.find(sender)->balance >= tx.value);
        require(st.find(iomc_send_address()) != nullptr);
        // The external receiver needs a ticket covering the whole HTLC
        // window so it can escalate at this instance's IPSC.
        AccessTicket ticket = hooks.ensure_ticket(args.receiver, 2 * hooks.htlc_timeout());
        move_tokens(st, sender, iomc_send_address(), tx.value);
        LockedTransferOut t;
        t.sender = sender;
        t.receiver = args.receiver;
        t.receiver_ipsc = args.receiver_ipsc;
        t.amount = tx.value;
        t.hashlock = args.hashlock;
        t.timelock = hooks.now() + hooks.htlc_timeout();
        st.iomc_send.push_back(t);
        events.push_back(make_event_u64(EventKind::send_initialized, st.iomc_send.size() - 1));
        events.push_back(make_event_ticket(ticket));
        return events;
    }
    case IomcMethod::commit: {
        auto args = decode_args_or_revert<SendCommitArgs>(call.args);
        require(tx.value == 0);
        require(args.transfer_id < st.iomc_send.size());
        LockedTransferOut& t = st.iomc_send[args.transfer_id];
        require(t.hashlock == sha256(args.secret));
        require(!t.is_completed && !t.is_reverted);

        // The counterpart receiveInit must name this exact transfer.
        require(args.foreign.ipsc_id == t.receiver_ipsc);
        require(evidence_wellformed(args.foreign.evidence));
        require(args.foreign.evidence.receipt.status == TxStatus::ok);
        auto ext_id = event_u64(args.foreign.evidence.receipt, EventKind::receive_initialized);
        require(ext_id.has_value() && *ext_id == args.ext_transfer_id);
        const auto* recv_call = std::get_if<IomcCall>(&args.foreign.evidence.mu_tx.call);
        require(recv_call != nullptr && recv_call->contract == IomcContract::receive &&
                recv_call->method == IomcMethod::init);
        auto init_args = decode_args_or_revert<ReceiveInitArgs>(recv_call->args);
        require(address_of(init_args.sender) == t.sender);
        require(init_args.sender_ipsc == hooks.own_ipsc());
        require(init_args.hashlock == t.hashlock);
        require(init_args.amount == t.amount);
        require(address_of(args.foreign.evidence.mu_tx.sender_pk) == address_of(t.receiver));
        require(hooks.verify_foreign_package(args.foreign));

        t.is_completed = true;
        // Burn the escrow and deduct the instance supply.
        Account& escrow = account_or_revert(st, iomc_send_address());
        require(escrow.balance >= t.amount);
        escrow.balance -= t.amount;
        hooks.burn_supply(t.amount);
        events.push_back(make_event_send_committed(
            {args.transfer_id, args.ext_transfer_id, t.receiver, t.receiver_ipsc, t.amount}));
        return events;
    }
    case IomcMethod::revert_transfer: {
        auto args = decode_args_or_revert<SendRevertArgs>(call.args);
        require(tx.value == 0);
        require(args.transfer_id < st.iomc_send.size());
        LockedTransferOut& t = st.iomc_send[args.transfer_id];
        require(!t.is_completed && !t.is_reverted);
        require(t.timelock <= hooks.now());
        move_tokens(st, iomc_send_address(), t.sender, t.amount);
        t.is_reverted = true;
        events.push_back(make_event_u64(EventKind::send_reverted, args.transfer_id));
        return events;
    }
    default:
        throw Reverted{}; // fund is not a sending-contract method
    }
}

std::vector<Event> exec_receive(const IomcCall& call, const MicroTransaction& tx, WorkingState& st, EnclaveHooks& hooks)
{
    std::vector<Event> events;
    switch (call.method) {
    case IomcMethod::init: {
        auto args = decode_args_or_revert<ReceiveInitArgs>(call.args);
        require(tx.value == 0);
        require(args.amount > 0);
        // The external sender gets a ticket for this instance's IPSC.
        AccessTicket ticket = hooks.ensure_ticket(args.sender, 2 * hooks.htlc_timeout());
        LockedTransferIn t;
        t.sender = args.sender;
        t.sender_ipsc = args.sender_ipsc;
        t.receiver = address_of(tx.sender_pk);
        t.amount = args.amount;
        t.hashlock = args.hashlock;
        st.iomc_recv.push_back(t);
        events.push_back(make_event_u64(EventKind::receive_initialized, st.iomc_recv.size() - 1));
        events.push_back(make_event_ticket(ticket));
        return events;
    }
    case IomcMethod::commit: {
        auto args = decode_args_or_revert<ReceiveCommitArgs>(call.args);
        require(tx.value == 0);
        require(args.transfer_id < st.iomc_recv.size());
        LockedTransferIn& t = st.iomc_recv[args.transfer_id];
        require(t.hashlock == sha256(args.secret));
        require(!t.is_completed);
        require(st.find(t.receiver) != nullptr);

        // Deduction evidence: the sending instance burned the amount for
        // this very transfer (its sendCommitted names us as ext id).
        require(args.foreign.ipsc_id == t.sender_ipsc);
        require(evidence_wellformed(args.foreign.evidence));
        require(args.foreign.evidence.receipt.status == TxStatus::ok);
        auto commit_info = event_send_committed(args.foreign.evidence.receipt);
        require(commit_info.has_value());
        require(commit_info->ext_transfer_id == args.transfer_id);
        require(commit_info->receiver_ipsc == hooks.own_ipsc());
        require(address_of(commit_info->receiver) == t.receiver);
        require(commit_info->amount == t.amount);
        require(hooks.verify_foreign_package(args.foreign));

        // Mint on the receiving contract and credit the recipient.
        hooks.mint_supply(t.amount);
        account_or_revert(st, t.receiver).balance += t.amount;
        t.is_completed = true;
        events.push_back(make_event_u64(EventKind::receive_committed, args.transfer_id));
        return events;
    }
    case IomcMethod::fund: {
        decode_args_or_revert<FundArgs>(call.args);
        require(tx.value > 0);
        move_tokens(st, address_of(tx.sender_pk), iomc_recv_address(), tx.value);
        events.push_back(make_event_u64(EventKind::funded, tx.value));
        return events;
    }
    default:
        throw Reverted{};
    }
}

std::vector<Event> exec_call(const MicroTransaction& tx, WorkingState& st, EnclaveHooks& hooks)
{
    if (const auto* t = std::get_if<TransferCall>(&tx.call)) {
        require(tx.value == 0);
        move_tokens(st, address_of(tx.sender_pk), t->to, t->amount);
        return {};
    }
    if (std::holds_alternative<RegisterCall>(tx.call)) {
        require(tx.value == 0);
        auto ticket = hooks.register_client(tx.sender_pk);
        require(ticket.has_value()); // duplicate registration reverts
        Encoder e;
        tx.sender_pk.encode(e);
        std::vector<Event> events{Event{EventKind::registered, e.take()}, make_event_ticket(*ticket)};
        return events;
    }
    if (const auto* i = std::get_if<IssueCall>(&tx.call)) {
        require(tx.value == 0);
        require(address_of(tx.sender_pk) == hooks.operator_address());
        require(st.find(i->to) != nullptr);
        require(hooks.try_issue(i->amount));
        account_or_revert(st, i->to).balance += i->amount;
        return {make_event_issued(i->to, i->amount)};
    }
    const auto& c = std::get<IomcCall>(tx.call);
    return c.contract == IomcContract::send ? exec_send(c, tx, st, hooks) : exec_receive(c, tx, st, hooks);
}

} // namespace

ExecutionResult run_vm(const std::vector<MicroTransaction>& txs, const PartialState& st_old, EnclaveHooks& hooks)
{
    // Tie every touched account to the claimed full-state root before
    // executing anything.
    if (st_old.witness.leaf_count > st_old.account_count)
        throw std::invalid_argument("partial state: witness ahead of account count");
    std::map<uint64_t, Digest> touched_hashes;
    for (const auto& [idx, rec] : st_old.touched) {
        if (idx >= st_old.account_count)
            throw std::invalid_argument("partial state: touched index out of range");
        touched_hashes[idx] = account_leaf_hash(rec);
    }
    Digest acct_root = eval_tree_witness(st_old.witness, st_old.account_count, touched_hashes);
    if (compose_state_root(acct_root, st_old.iomc_send, st_old.iomc_recv) != st_old.root)
        throw std::invalid_argument("partial state: witness does not match root");

    WorkingState st;
    st.count = st_old.account_count;
    st.accounts = st_old.touched;
    for (const auto& [idx, rec] : st.accounts)
        st.index[rec.address] = idx;
    st.iomc_send = st_old.iomc_send;
    st.iomc_recv = st_old.iomc_recv;

    ExecutionResult result;

    for (const auto& tx : txs) {
        if (!verify(tx.sender_pk, tx.signing_payload(), tx.sig)) {
            result.txs_er.push_back(tx);
            continue;
        }
        Address sender = address_of(tx.sender_pk);
        Account* acct = st.find(sender);
        bool registering = std::holds_alternative<RegisterCall>(tx.call);
        if (acct == nullptr) {
            // Only a first registration may come from an unknown account.
            if (!registering || tx.nonce != 0) {
                result.txs_er.push_back(tx);
                continue;
            }
        } else if (tx.nonce != acct->nonce) {
            result.txs_er.push_back(tx);
            continue;
        }

        // The nonce advances for every executed transaction, reverted ones
        // included; only filtered transactions can be resubmitted.
        if (acct != nullptr)
            ++acct->nonce;

        Receipt receipt;
        receipt.tx_hash = tx.hash();
        WorkingState scratch = st;
        try {
            receipt.events = exec_call(tx, scratch, hooks);
            if (acct == nullptr) {
                // Registration: account appears with the first nonce spent.
                scratch.append_account(sender, Account{0, 1});
            }
            receipt.status = TxStatus::ok;
            st = std::move(scratch);
        } catch (const Reverted&) {
            receipt.status = TxStatus::reverted;
            receipt.events.clear();
        }
        result.executed.push_back(tx);
        result.receipts.push_back(receipt);
    }

    // Recompute the new full-state root through the same witness.
    std::map<uint64_t, Digest> new_hashes;
    for (const auto& [idx, rec] : st.accounts)
        new_hashes[idx] = account_leaf_hash(rec);
    Digest new_acct_root = eval_tree_witness(st_old.witness, st.count, new_hashes);

    result.st_new.account_count = st.count;
    result.st_new.touched = st.accounts;
    result.st_new.iomc_send = st.iomc_send;
    result.st_new.iomc_recv = st.iomc_recv;
    result.st_new.witness = st_old.witness;
    result.st_new.root = compose_state_root(new_acct_root, st.iomc_send, st.iomc_recv);
    return result;
}

} // namespace cbdc
