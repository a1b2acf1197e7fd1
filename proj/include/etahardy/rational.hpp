#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>

namespace etahardy {

// Exact rational with 64-bit numerator/denominator. Intermediate products use
// 128-bit integers; a result that does not fit after reduction throws.
class Rational {
public:
    constexpr Rational() = default;
    Rational(long long n); // NOLINT: implicit on purpose, integers are rationals
    Rational(long long n, long long d);

    static Rational from_double(double x);
    static Rational parse(std::string_view text);
    static Rational pow2(int e);

    long long num() const { return num_; }
    long long den() const { return den_; }

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
    std::string str() const;

    bool is_zero() const { return num_ == 0; }
    bool is_integer() const { return den_ == 1; }
    int sign() const { return (num_ > 0) - (num_ < 0); }

    long long floor() const;
    long long ceil() const;

    // Smallest level l with value * 2^l an integer; nullopt for zero or a non-dyadic value.
    std::optional<int> dyadic_level() const;

    Rational operator-() const;
    Rational& operator+=(const Rational& o);
    Rational& operator-=(const Rational& o);
    Rational& operator*=(const Rational& o);
    Rational& operator/=(const Rational& o);

    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

    friend bool operator==(const Rational& a, const Rational& b) { return a.num_ == b.num_ && a.den_ == b.den_; }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

private:
    static Rational from_wide(__int128 n, __int128 d);

    long long num_ = 0;
    long long den_ = 1;
};

Rational abs(const Rational& r);
Rational min(const Rational& a, const Rational& b);
Rational max(const Rational& a, const Rational& b);

// A payload value: exact rational or double. Arithmetic between two exact
// values stays exact, anything touching a double is done in double.
class Scalar {
public:
    Scalar() : v_(Rational{}) {}
    Scalar(const Rational& q) : v_(q) {} // NOLINT
    Scalar(long long n) : v_(Rational(n)) {} // NOLINT
    Scalar(int n) : v_(Rational(n)) {} // NOLINT
    Scalar(double x) : v_(x) {} // NOLINT

    bool is_exact() const { return std::holds_alternative<Rational>(v_); }
    const Rational& exact() const { return std::get<Rational>(v_); }
    double to_double() const;
    bool is_zero() const;
    int sign() const;
    std::string str() const;

    Scalar operator-() const;
    friend Scalar operator+(const Scalar& a, const Scalar& b);
    friend Scalar operator-(const Scalar& a, const Scalar& b);
    friend Scalar operator*(const Scalar& a, const Scalar& b);
    friend Scalar operator/(const Scalar& a, const Scalar& b);
    Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
    Scalar& operator-=(const Scalar& o) { return *this = *this - o; }
    Scalar& operator*=(const Scalar& o) { return *this = *this * o; }

    // Structural equality: an exact value never equals a double.
    friend bool operator==(const Scalar& a, const Scalar& b) { return a.v_ == b.v_; }
    friend bool less(const Scalar& a, const Scalar& b);

    friend std::ostream& operator<<(std::ostream& os, const Scalar& s) { return os << s.str(); }

private:
    std::variant<Rational, double> v_;
};

Scalar abs(const Scalar& s);
Scalar to_float(const Scalar& s);

struct RationalHash {
    std::size_t operator()(const Rational& r) const noexcept
    {
        std::size_t h = std::hash<long long>{}(r.num());
        return h ^ (std::hash<long long>{}(r.den()) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
    }
};

} // namespace etahardy
