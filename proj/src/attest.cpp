#include "cbdc/attest.hpp"

namespace cbdc {

namespace {

Bytes quote_payload(const Digest& measurement, const PublicKey& enclave_pk)
{
    Encoder e;
    e.put_digest(measurement);
    enclave_pk.encode(e);
    return e.take();
}

} // namespace

const KeyPair& platform_keypair()
{
    // Fixed seed: every participant in the simulation knows the platform key.
    static const KeyPair kp = keygen(SigScheme::tee, 0x7ee0'5160'a77e'57ull);
    return kp;
}

AttestationQuote attest(const Digest& enclave_code_id, const PublicKey& enclave_pk)
{
    AttestationQuote q;
    q.measurement = enclave_code_id;
    q.enclave_pk = enclave_pk;
    q.platform_sig = sign(platform_keypair().sk, quote_payload(q.measurement, q.enclave_pk));
    return q;
}

bool verify_quote(const AttestationQuote& quote, const Digest& expected_measurement)
{
    if (quote.measurement != expected_measurement)
        return false;
    return verify(platform_keypair().pk, quote_payload(quote.measurement, quote.enclave_pk), quote.platform_sig);
}

} // namespace cbdc
