#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <string>

namespace hwpc {

// Exact rational arithmetic for rates and throughputs. All scheduling math
// stays in rationals; floating point never enters the scheduler.
using Rat = boost::rational<std::int64_t>;

inline std::int64_t rat_floor(const Rat& r) {
    std::int64_t q = r.numerator() / r.denominator();
    if (r.numerator() % r.denominator() != 0 && r.numerator() < 0) --q;
    return q;
}

inline std::int64_t rat_ceil(const Rat& r) {
    std::int64_t q = r.numerator() / r.denominator();
    if (r.numerator() % r.denominator() != 0 && r.numerator() > 0) ++q;
    return q;
}

inline bool is_integer(const Rat& r) { return r.denominator() == 1; }

inline std::string to_string(const Rat& r) {
    if (r.denominator() == 1) return std::to_string(r.numerator());
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

} // namespace hwpc
