#include "cbdc/inflation.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>

namespace cbdc {

uint64_t allowed_issued(uint64_t t_i0, const Rational& rate, VirtualTime created_at, VirtualTime now)
{
    if (rate.den == 0)
        throw std::invalid_argument("inflation rate: zero denominator");

    // Year index: 1 throughout the first year, 2 during the second, ...
    uint64_t elapsed = now >= created_at ? now - created_at : 0;
    uint64_t k = elapsed / kSecondsPerYear + 1;

    using boost::multiprecision::cpp_int;
    // floor(t_i0 * (den + num)^k / den^k), binary exponentiation.
    cpp_int grow = cpp_int(rate.den) + cpp_int(rate.num);
    cpp_int num = 1, den = 1, g = grow, d = rate.den;
    uint64_t e = k;
    while (e > 0) {
        if (e & 1) {
            num *= g;
            den *= d;
        }
        g *= g;
        d *= d;
        e >>= 1;
    }
    cpp_int cap = cpp_int(t_i0) * num / den;
    if (cap > std::numeric_limits<uint64_t>::max())
        return std::numeric_limits<uint64_t>::max();
    return cap.convert_to<uint64_t>();
}

} // namespace cbdc
