#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "synergy/errors.hpp"

namespace synergy {

// Exact rational for the mixing coefficient lambda. Only the collision
// structure of sums a + lambda*c matters, so lambda must never go through
// floating point.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n, std::int64_t d = 1) : num(n), den(d) {
        if (den == 0) throw usage_error("Rational: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
    }

    bool positive() const { return num > 0; }
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num == b.num && a.den == b.den;
    }
    friend bool operator<(const Rational& a, const Rational& b) {
        return a.num * b.den < b.num * a.den;  // operands stay small here
    }

    std::string str() const {
        if (den == 1) return std::to_string(num);
        return std::to_string(num) + "/" + std::to_string(den);
    }
};

namespace detail {
inline std::int64_t parse_int64_exact(const std::string& text, const std::string& whole) {
    try {
        std::size_t used = 0;
        const std::int64_t v = std::stoll(text, &used);
        if (used != text.size()) throw usage_error("parse_rational: cannot parse '" + whole + "'");
        return v;
    } catch (const usage_error&) {
        throw;
    } catch (const std::exception&) {
        throw usage_error("parse_rational: cannot parse '" + whole + "'");
    }
}
}  // namespace detail

// Accepts "3", "-3", "3/4". No decimals: a decimal would hide the exactness
// requirement from the caller.
inline Rational parse_rational(const std::string& text) {
    const auto slash = text.find('/');
    if (slash == std::string::npos) return Rational(detail::parse_int64_exact(text, text));
    return Rational(detail::parse_int64_exact(text.substr(0, slash), text),
                    detail::parse_int64_exact(text.substr(slash + 1), text));
}

}  // namespace synergy
