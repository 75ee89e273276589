#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string>

#include "gclaim/errors.hpp"

namespace gclaim {

/// Exact rational number used by the oracle suites and `--mode rational`.
/// Expression templates are off so values behave like ordinary numbers in
/// templated code.
using BigInt = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>,
                                             boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<
    boost::multiprecision::backends::rational_adaptor<
        boost::multiprecision::cpp_int_backend<>>,
    boost::multiprecision::et_off>;

/// Comparison policy per numeric mode. double carries a fixed absolute
/// tolerance; Rational compares exactly.
template <typename N>
struct NumTraits;

template <>
struct NumTraits<double> {
    static constexpr bool exact = false;
    static constexpr double tolerance = 1e-9;
    static bool eq(double a, double b) { return std::fabs(a - b) <= tolerance; }
    static bool le(double a, double b) { return a <= b + tolerance; }
    static bool lt(double a, double b) { return a < b - tolerance; }
    static const char* mode_name() { return "float"; }
};

template <>
struct NumTraits<Rational> {
    static constexpr bool exact = true;
    static bool eq(const Rational& a, const Rational& b) { return a == b; }
    static bool le(const Rational& a, const Rational& b) { return a <= b; }
    static bool lt(const Rational& a, const Rational& b) { return a < b; }
    static const char* mode_name() { return "rational"; }
};

template <typename N>
bool num_eq(const N& a, const N& b) {
    return NumTraits<N>::eq(a, b);
}
template <typename N>
bool num_le(const N& a, const N& b) {
    return NumTraits<N>::le(a, b);
}
template <typename N>
bool num_lt(const N& a, const N& b) {
    return NumTraits<N>::lt(a, b);
}

inline Rational pow_rational(const Rational& base, int exp) {
    if (exp < 0) {
        if (base == 0) throw DomainError("zero base with negative exponent");
        return 1 / pow_rational(base, -exp);
    }
    Rational r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

template <typename N>
N num_pow(const N& base, int exp);

template <>
inline double num_pow<double>(const double& base, int exp) {
    return std::pow(base, exp);
}
template <>
inline Rational num_pow<Rational>(const Rational& base, int exp) {
    return pow_rational(base, exp);
}

/// Parses "3", "-1.25", "7/3" into an exact rational. Decimal digits become
/// powers of ten; no scientific notation.
inline Rational parse_rational(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s.empty()) throw ParseError("empty number");

    auto slash = s.find('/');
    if (slash != std::string::npos) {
        std::string num = s.substr(0, slash);
        std::string den = s.substr(slash + 1);
        if (num.empty() || den.empty()) throw ParseError("malformed fraction: " + text);
        try {
            Rational d{BigInt(den)};
            if (d == 0) throw ParseError("zero denominator: " + text);
            return Rational(BigInt(num)) / d;
        } catch (const std::runtime_error&) {
            throw ParseError("malformed fraction: " + text);
        }
    }

    bool negative = false;
    std::size_t i = 0;
    if (s[0] == '+' || s[0] == '-') {
        negative = (s[0] == '-');
        i = 1;
    }
    std::string digits;
    int frac_digits = 0;
    bool seen_dot = false, seen_digit = false;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (c == '.') {
            if (seen_dot) throw ParseError("malformed number: " + text);
            seen_dot = true;
        } else if (c >= '0' && c <= '9') {
            digits.push_back(c);
            seen_digit = true;
            if (seen_dot) ++frac_digits;
        } else {
            throw ParseError("malformed number: " + text);
        }
    }
    if (!seen_digit) throw ParseError("malformed number: " + text);
    Rational value{BigInt(digits)};
    value /= pow_rational(10, frac_digits);
    return negative ? -value : value;
}

/// Converts the parsed rational into the active numeric mode.
template <typename N>
N num_from_string(const std::string& text);

template <>
inline double num_from_string<double>(const std::string& text) {
    return parse_rational(text).convert_to<double>();
}
template <>
inline Rational num_from_string<Rational>(const std::string& text) {
    return parse_rational(text);
}

template <typename N>
std::string num_to_string(const N& v);

template <>
inline std::string num_to_string<double>(const double& v) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(10);
    os << v;
    return os.str();
}
template <>
inline std::string num_to_string<Rational>(const Rational& v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

template <typename N>
double num_to_double(const N& v);

template <>
inline double num_to_double<double>(const double& v) {
    return v;
}
template <>
inline double num_to_double<Rational>(const Rational& v) {
    return v.convert_to<double>();
}

} // namespace gclaim
