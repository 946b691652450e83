#pragma once

#include "cbdc/keys.hpp"

namespace cbdc {

/// Simulated attestation quote: a well-known platform key signs the
/// binding of an enclave code measurement to the enclave's Σ_tee key.
/// Stands in for the SGX/IAS machinery the trust model assumes sound.
struct AttestationQuote {
    Digest measurement;
    PublicKey enclave_pk; // Σ_tee
    Signature platform_sig;

    void encode(Encoder& e) const
    {
        e.put_tag(WireTag::attestation_quote);
        e.put_digest(measurement);
        enclave_pk.encode(e);
        platform_sig.encode(e);
    }

    static AttestationQuote decode(Decoder& d)
    {
        d.expect_tag(WireTag::attestation_quote);
        AttestationQuote q;
        q.measurement = d.digest();
        q.enclave_pk = PublicKey::decode(d);
        q.platform_sig = Signature::decode(d);
        return q;
    }
};

/// The simulated platform's signing keypair (fixed, publicly known).
const KeyPair& platform_keypair();

AttestationQuote attest(const Digest& enclave_code_id, const PublicKey& enclave_pk);

bool verify_quote(const AttestationQuote& quote, const Digest& expected_measurement);

} // namespace cbdc
