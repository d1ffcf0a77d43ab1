#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

#include "chiralflat/errors.hpp"

namespace chiralflat {

// Arbitrary-precision integers and rationals. The exact engine must never
// overflow, so fixed-width integers are not an option here.
using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline double to_double(const Rat& r) { return r.template convert_to<double>(); }

/// Renders "n" or "n/d" with d > 0.
inline std::string rat_to_string(const Rat& r) {
    const Int num = boost::multiprecision::numerator(r);
    const Int den = boost::multiprecision::denominator(r);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

/// Parses "n" or "n/d" (optional sign, arbitrary size).
inline Rat rat_from_string(const std::string& s) {
    const auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rat(Int(s));
        const Int num(s.substr(0, slash));
        const Int den(s.substr(slash + 1));
        if (den == 0) throw parse_error("rational with zero denominator: " + s);
        return Rat(num, den);
    } catch (const std::runtime_error& e) {
        throw parse_error("bad rational '" + s + "': " + e.what());
    }
}

} // namespace chiralflat
