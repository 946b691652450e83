#pragma once

#include "cbdc/keys.hpp"

namespace cbdc {

/// Enclave-signed client capability: lets the holder file censorship
/// requests at the issuing instance's public contract. Expiry must cover
/// at least the HTLC window of the transfer it was issued for.
struct AccessTicket {
    PublicKey client_pk;
    Digest issuing_ipsc;
    uint64_t expires_at = 0;
    Signature sig; // Σ_tee by the issuing enclave

    Bytes signing_payload() const
    {
        Encoder e;
        e.put_tag(WireTag::access_ticket);
        client_pk.encode(e);
        e.put_digest(issuing_ipsc);
        e.put_u64(expires_at);
        return e.take();
    }

    void encode(Encoder& e) const
    {
        e.put_tag(WireTag::access_ticket);
        client_pk.encode(e);
        e.put_digest(issuing_ipsc);
        e.put_u64(expires_at);
        sig.encode(e);
    }

    static AccessTicket decode(Decoder& d)
    {
        d.expect_tag(WireTag::access_ticket);
        AccessTicket t;
        t.client_pk = PublicKey::decode(d);
        t.issuing_ipsc = d.digest();
        t.expires_at = d.u64();
        t.sig = Signature::decode(d);
        return t;
    }
};

inline bool ticket_valid(const AccessTicket& t, const PublicKey& enclave_tee_pk, uint64_t now)
{
    return t.expires_at >= now && verify(enclave_tee_pk, t.signing_payload(), t.sig);
}

} // namespace cbdc
