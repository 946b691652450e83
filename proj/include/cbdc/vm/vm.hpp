#pragma once

#include "cbdc/evidence.hpp"
#include "cbdc/vm/types.hpp"

namespace cbdc {

/// Enclave services the VM calls into. IOMC contracts are the only code
/// with access to the supply counters and ticket issuance; everything here
/// is invoked only after a method's asserts have all passed.
class EnclaveHooks {
  public:
    virtual ~EnclaveHooks() = default;

    virtual VirtualTime now() const = 0;
    virtual uint64_t htlc_timeout() const = 0;
    virtual Digest own_ipsc() const = 0;
    virtual Address operator_address() const = 0;

    virtual void burn_supply(uint64_t amount) = 0;
    virtual void mint_supply(uint64_t amount) = 0;

    /// Issue-authority and inflation-cap gate; on success t_i and t_s are
    /// already incremented.
    virtual bool try_issue(uint64_t amount) = 0;

    /// Creates the registration entry and its access ticket; nullopt on a
    /// duplicate key.
    virtual std::optional<AccessTicket> register_client(const PublicKey& pk) = 0;

    /// Returns a ticket for pk valid at least until now + min_validity,
    /// issuing or extending as needed.
    virtual AccessTicket ensure_ticket(const PublicKey& pk, uint64_t min_validity) = 0;

    /// Light-client verification of a foreign instance's evidence chain.
    virtual bool verify_foreign_package(const ForeignEvidence& foreign) = 0;
};

struct ExecutionResult {
    PartialState st_new;
    std::vector<Receipt> receipts;             // one per executed tx, in order
    std::vector<MicroTransaction> executed;    // txs \ txs_er, in order
    std::vector<MicroTransaction> txs_er;      // parse/signature/nonce failures
};

/// Deterministic batch execution against a partial state. Throws
/// std::invalid_argument when the witness does not tie the touched
/// accounts to st_old.root (the whole batch is rejected).
ExecutionResult run_vm(const std::vector<MicroTransaction>& txs, const PartialState& st_old, EnclaveHooks& hooks);

} // namespace cbdc
