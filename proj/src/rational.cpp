#include "etahardy/rational.hpp"

#include "etahardy/error.hpp"

#include <charconv>
#include <cmath>
#include <limits>

namespace etahardy {

namespace {

using i128 = __int128;

i128 gcd128(i128 a, i128 b)
{
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        i128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

constexpr i128 kMax = std::numeric_limits<long long>::max();

long long parse_ll(std::string_view s)
{
    long long v = 0;
    const char* first = s.data();
    if (!s.empty() && s.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw Error(ErrorCode::parse_error, "bad rational component '" + std::string(s) + "'");
    return v;
}

} // namespace

Rational Rational::from_wide(i128 n, i128 d)
{
    if (d == 0) throw Error(ErrorCode::invalid_argument, "rational with zero denominator");
    if (d < 0) {
        n = -n;
        d = -d;
    }
    i128 g = gcd128(n, d);
    if (g > 1) {
        n /= g;
        d /= g;
    }
    if (n > kMax || n < -kMax || d > kMax)
        throw Error(ErrorCode::overflow, "rational arithmetic exceeds 64-bit range");
    Rational r;
    r.num_ = static_cast<long long>(n);
    r.den_ = static_cast<long long>(d);
    return r;
}

Rational::Rational(long long n) : num_(n), den_(1) {}

Rational::Rational(long long n, long long d) { *this = from_wide(n, d); }

Rational Rational::from_double(double x)
{
    if (!std::isfinite(x)) throw Error(ErrorCode::invalid_argument, "non-finite value cannot be exact");
    if (x == 0.0) return Rational{};
    int exp = 0;
    double mant = std::frexp(x, &exp); // x = mant * 2^exp, |mant| in [0.5, 1)
    auto m = static_cast<long long>(std::ldexp(mant, 53));
    exp -= 53;
    while (m % 2 == 0) {
        m /= 2;
        ++exp;
    }
    if (exp >= 0) {
        if (exp > 62) throw Error(ErrorCode::overflow, "double too large for exact conversion");
        return from_wide(static_cast<i128>(m) << exp, 1);
    }
    if (-exp > 62) throw Error(ErrorCode::overflow, "double too fine for exact conversion");
    return from_wide(m, static_cast<i128>(1) << (-exp));
}

Rational Rational::parse(std::string_view text)
{
    auto slash = text.find('/');
    if (slash == std::string_view::npos) return Rational(parse_ll(text));
    return Rational(parse_ll(text.substr(0, slash)), parse_ll(text.substr(slash + 1)));
}

Rational Rational::pow2(int e)
{
    if (e >= 0) {
        if (e > 62) throw Error(ErrorCode::overflow, "2^e out of range");
        return Rational(1LL << e);
    }
    if (-e > 62) throw Error(ErrorCode::overflow, "2^e out of range");
    return Rational(1, 1LL << (-e));
}

std::string Rational::str() const
{
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

long long Rational::floor() const
{
    long long q = num_ / den_;
    if (num_ % den_ != 0 && num_ < 0) --q;
    return q;
}

long long Rational::ceil() const
{
    long long q = num_ / den_;
    if (num_ % den_ != 0 && num_ > 0) ++q;
    return q;
}

std::optional<int> Rational::dyadic_level() const
{
    if (num_ == 0) return std::nullopt;
    long long d = den_;
    int level = 0;
    while (d % 2 == 0) {
        d /= 2;
        ++level;
    }
    if (d != 1) return std::nullopt;
    if (level > 0) return level;
    long long n = num_;
    while (n % 2 == 0) {
        n /= 2;
        --level;
    }
    return level;
}

Rational Rational::operator-() const
{
    Rational r = *this;
    r.num_ = -r.num_;
    return r;
}

Rational& Rational::operator+=(const Rational& o)
{
    if (den_ == o.den_) return *this = from_wide(static_cast<i128>(num_) + o.num_, den_);
    return *this = from_wide(static_cast<i128>(num_) * o.den_ + static_cast<i128>(o.num_) * den_,
                             static_cast<i128>(den_) * o.den_);
}

Rational& Rational::operator-=(const Rational& o) { return *this += -o; }

Rational& Rational::operator*=(const Rational& o)
{
    return *this = from_wide(static_cast<i128>(num_) * o.num_, static_cast<i128>(den_) * o.den_);
}

Rational& Rational::operator/=(const Rational& o)
{
    if (o.num_ == 0) throw Error(ErrorCode::invalid_argument, "division by zero");
    return *this = from_wide(static_cast<i128>(num_) * o.den_, static_cast<i128>(den_) * o.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b)
{
    i128 l = static_cast<i128>(a.num_) * b.den_;
    i128 r = static_cast<i128>(b.num_) * a.den_;
    if (l < r) return std::strong_ordering::less;
    if (l > r) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

Rational abs(const Rational& r) { return r.sign() < 0 ? -r : r; }
Rational min(const Rational& a, const Rational& b) { return b < a ? b : a; }
Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

double Scalar::to_double() const
{
    if (auto* q = std::get_if<Rational>(&v_)) return q->to_double();
    return std::get<double>(v_);
}

bool Scalar::is_zero() const
{
    if (auto* q = std::get_if<Rational>(&v_)) return q->is_zero();
    return std::get<double>(v_) == 0.0;
}

int Scalar::sign() const
{
    if (auto* q = std::get_if<Rational>(&v_)) return q->sign();
    double x = std::get<double>(v_);
    return (x > 0) - (x < 0);
}

std::string Scalar::str() const
{
    if (auto* q = std::get_if<Rational>(&v_)) return q->str();
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, std::get<double>(v_));
    return std::string(buf, ptr);
}

Scalar Scalar::operator-() const
{
    if (auto* q = std::get_if<Rational>(&v_)) return Scalar(-*q);
    return Scalar(-std::get<double>(v_));
}

Scalar operator+(const Scalar& a, const Scalar& b)
{
    if (a.is_exact() && b.is_exact()) return Scalar(a.exact() + b.exact());
    return Scalar(a.to_double() + b.to_double());
}

Scalar operator-(const Scalar& a, const Scalar& b)
{
    if (a.is_exact() && b.is_exact()) return Scalar(a.exact() - b.exact());
    return Scalar(a.to_double() - b.to_double());
}

Scalar operator*(const Scalar& a, const Scalar& b)
{
    if (a.is_exact() && b.is_exact()) return Scalar(a.exact() * b.exact());
    return Scalar(a.to_double() * b.to_double());
}

Scalar operator/(const Scalar& a, const Scalar& b)
{
    if (a.is_exact() && b.is_exact()) return Scalar(a.exact() / b.exact());
    return Scalar(a.to_double() / b.to_double());
}

bool less(const Scalar& a, const Scalar& b)
{
    if (a.is_exact() && b.is_exact()) return a.exact() < b.exact();
    return a.to_double() < b.to_double();
}

Scalar abs(const Scalar& s) { return s.sign() < 0 ? -s : s; }

Scalar to_float(const Scalar& s) { return Scalar(s.to_double()); }

} // namespace etahardy
