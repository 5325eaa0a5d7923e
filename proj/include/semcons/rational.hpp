#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace semcons {

// Exact rational on 64-bit integers, reduced after every operation.
// Consistency values and category means have small denominators
// (n(n-1) and multiples), so 64 bits leave ample headroom; comparisons
// cross-multiply in 128 bits to stay exact.
struct Rational {
    long long num = 0;
    long long den = 1;

    Rational() = default;

    Rational(long long n, long long d) : num(n), den(d) {
        if (den == 0) throw std::invalid_argument("rational with zero denominator");
        if (den < 0) { num = -num; den = -den; }
        reduce();
    }

    void reduce() {
        long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
        if (num == 0) den = 1;
    }

    Rational operator+(const Rational& o) const {
        return Rational(num * o.den + o.num * den, den * o.den);
    }

    Rational operator-(const Rational& o) const {
        return Rational(num * o.den - o.num * den, den * o.den);
    }

    Rational divided_by(long long k) const { return Rational(num, den * k); }

    int compare(const Rational& o) const {
        __int128 lhs = static_cast<__int128>(num) * o.den;
        __int128 rhs = static_cast<__int128>(o.num) * den;
        if (lhs < rhs) return -1;
        if (lhs > rhs) return 1;
        return 0;
    }

    bool operator==(const Rational& o) const { return compare(o) == 0; }
    bool operator!=(const Rational& o) const { return compare(o) != 0; }
    bool operator<(const Rational& o) const { return compare(o) < 0; }
    bool operator<=(const Rational& o) const { return compare(o) <= 0; }
    bool operator>(const Rational& o) const { return compare(o) > 0; }
    bool operator>=(const Rational& o) const { return compare(o) >= 0; }

    bool is_zero() const { return num == 0; }

    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

    std::string to_string() const { return std::to_string(num) + "/" + std::to_string(den); }

    // Parses "num/den" (or a bare integer).
    static Rational parse(const std::string& s) {
        std::size_t slash = s.find('/');
        if (slash == std::string::npos) return Rational(std::stoll(s), 1);
        return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    }
};

} // namespace semcons
