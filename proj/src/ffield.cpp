#include "fqdist/ffield.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fqdist/util.hpp"

namespace fqdist {
namespace {

constexpr std::uint32_t kTableMaxQ = 1024;
constexpr std::uint32_t kChiTableMaxP = 4096;

// ---- polynomial helpers over F_p, digits low degree first ----

using Poly = std::vector<std::uint32_t>;

int degree(const Poly& f) {
    for (int i = static_cast<int>(f.size()) - 1; i >= 0; --i)
        if (f[static_cast<std::size_t>(i)] != 0) return i;
    return -1;
}

// f mod g, g monic with degree >= 1
Poly poly_mod(Poly f, const Poly& g, std::uint32_t p) {
    int dg = degree(g);
    for (int i = degree(f); i >= dg; --i) {
        std::uint64_t c = f[static_cast<std::size_t>(i)];
        if (c == 0) continue;
        for (int j = 0; j <= dg; ++j) {
            std::uint64_t sub = c * g[static_cast<std::size_t>(j)] % p;
            std::uint64_t cur = f[static_cast<std::size_t>(i - dg + j)];
            f[static_cast<std::size_t>(i - dg + j)] =
                static_cast<std::uint32_t>((cur + p - sub) % p);
        }
    }
    f.resize(static_cast<std::size_t>(dg), 0);
    return f;
}

bool is_zero_poly(const Poly& f) { return degree(f) < 0; }

// Exhaustive factor check: no monic divisor of degree 1..k/2.
bool is_irreducible(const Poly& f, std::uint32_t p, std::uint32_t k) {
    if (k == 1) return true;
    Poly g;
    for (std::uint32_t e = 1; e <= k / 2; ++e) {
        std::uint64_t count = 1;
        for (std::uint32_t i = 0; i < e; ++i) count *= p;
        g.assign(e + 1, 0);
        g[e] = 1;
        for (std::uint64_t c = 0; c < count; ++c) {
            std::uint64_t v = c;
            for (std::uint32_t i = 0; i < e; ++i) {
                g[i] = static_cast<std::uint32_t>(v % p);
                v /= p;
            }
            if (is_zero_poly(poly_mod(f, g, p))) return false;
        }
    }
    return true;
}

std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(static_cast<u128>(a) * b % m);
}

std::uint64_t powmod_u64(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
    std::uint64_t r = 1 % m;
    a %= m;
    while (e) {
        if (e & 1) r = mulmod_u64(r, a, m);
        a = mulmod_u64(a, a, m);
        e >>= 1;
    }
    return r;
}

} // namespace

bool is_prime_u64(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t s : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n % s == 0) return n == s;
    }
    // deterministic Miller-Rabin for 64-bit inputs
    std::uint64_t d = n - 1;
    int r = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++r;
    }
    for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        std::uint64_t x = powmod_u64(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 1; i < r; ++i) {
            x = mulmod_u64(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

std::vector<std::uint32_t> modulus_digits_from_value(std::uint32_t p, std::uint32_t k,
                                                     std::uint64_t value) {
    std::vector<std::uint32_t> digits(k + 1, 0);
    for (std::uint32_t i = 0; i <= k; ++i) {
        digits[i] = static_cast<std::uint32_t>(value % p);
        value /= p;
    }
    if (value != 0) throw FqError(Errc::BadModulus, "modulus value out of range");
    return digits;
}

Field Field::make(std::uint32_t p, std::uint32_t k) {
    if (!is_prime_u64(p)) throw FqError(Errc::NonPrime, "p=" + std::to_string(p));
    if (k < 1 || k > kMaxK)
        throw FqError(Errc::DegreeOutOfRange, "k=" + std::to_string(k));
    std::uint64_t q = 1;
    for (std::uint32_t i = 0; i < k; ++i) {
        q *= p;
        if (q > kMaxQ)
            throw FqError(Errc::FieldTooLarge,
                          "p^k exceeds cap 2^20 (p=" + std::to_string(p) + ", k=" + std::to_string(k) + ")");
    }
    // canonical modulus: first irreducible in the integer-encoding order
    Poly f(k + 1, 0);
    f[k] = 1;
    for (std::uint64_t c = 0; c < q; ++c) {
        std::uint64_t v = c;
        for (std::uint32_t i = 0; i < k; ++i) {
            f[i] = static_cast<std::uint32_t>(v % p);
            v /= p;
        }
        if (is_irreducible(f, p, k)) {
            std::vector<std::uint32_t> digits(f.begin(), f.end());
            return Field(p, k, std::move(digits));
        }
    }
    throw FqError(Errc::BadModulus, "no irreducible polynomial found"); // unreachable
}

Field::Field(std::uint32_t p, std::uint32_t k, std::vector<std::uint32_t> modulus) {
    if (!is_prime_u64(p)) throw FqError(Errc::NonPrime, "p=" + std::to_string(p));
    if (k < 1 || k > kMaxK)
        throw FqError(Errc::DegreeOutOfRange, "k=" + std::to_string(k));
    std::uint64_t q = 1;
    for (std::uint32_t i = 0; i < k; ++i) {
        q *= p;
        if (q > kMaxQ) throw FqError(Errc::FieldTooLarge, "p^k exceeds cap 2^20");
    }
    if (modulus.size() != k + 1)
        throw FqError(Errc::BadModulus, "modulus must have k+1 digits");
    for (std::uint32_t c : modulus)
        if (c >= p) throw FqError(Errc::BadModulus, "modulus digit out of range");
    if (modulus[k] != 1) throw FqError(Errc::BadModulus, "modulus must be monic");
    Poly f(modulus.begin(), modulus.end());
    if (!is_irreducible(f, p, k))
        throw FqError(Errc::BadModulus, "modulus is reducible over F_p");

    p_ = p;
    k_ = k;
    q_ = static_cast<std::uint32_t>(q);
    modulus_ = std::move(modulus);
    init_tables();
}

std::uint64_t Field::modulus_value() const {
    std::uint64_t v = 0;
    for (std::uint32_t i = k_ + 1; i-- > 0;) v = v * p_ + modulus_[i];
    return v;
}

std::string Field::modulus_string() const {
    std::string s;
    for (std::uint32_t i = k_ + 1; i-- > 0;) {
        std::uint32_t c = modulus_[i];
        if (c == 0) continue;
        if (!s.empty()) s += "+";
        if (i == 0) {
            s += std::to_string(c);
        } else {
            if (c != 1) s += std::to_string(c) + "*";
            s += (i == 1) ? "x" : "x^" + std::to_string(i);
        }
    }
    return s.empty() ? "0" : s;
}

Fe Field::add_generic(Fe a, Fe b) const {
    Fe r = 0, mult = 1;
    for (std::uint32_t i = 0; i < k_; ++i) {
        Fe da = a % p_, db = b % p_;
        a /= p_;
        b /= p_;
        r += ((da + db) % p_) * mult;
        mult *= p_;
    }
    return r;
}

Fe Field::mul_generic(Fe a, Fe b) const {
    // schoolbook product of the digit polynomials, then reduce by the modulus
    std::uint32_t da[kMaxK], db[kMaxK];
    std::uint64_t prod[2 * kMaxK - 1] = {0};
    for (std::uint32_t i = 0; i < k_; ++i) {
        da[i] = a % p_;
        a /= p_;
        db[i] = b % p_;
        b /= p_;
    }
    for (std::uint32_t i = 0; i < k_; ++i) {
        if (da[i] == 0) continue;
        for (std::uint32_t j = 0; j < k_; ++j)
            prod[i + j] += static_cast<std::uint64_t>(da[i]) * db[j];
    }
    for (std::uint32_t i = 2 * k_ - 1; i-- > k_;) {
        std::uint64_t c = prod[i] % p_;
        if (c == 0) continue;
        // x^i = x^{i-k} * (x^k mod modulus) = -x^{i-k} * (low part)
        for (std::uint32_t j = 0; j < k_; ++j) {
            std::uint64_t sub = c * modulus_[j] % p_;
            prod[i - k_ + j] += p_ - sub;
        }
        prod[i] = 0;
    }
    Fe r = 0, mult = 1;
    for (std::uint32_t i = 0; i < k_; ++i) {
        r += static_cast<Fe>(prod[i] % p_) * mult;
        mult *= p_;
    }
    return r;
}

void Field::init_tables() {
    if (k_ >= 2 && q_ <= kTableMaxQ) {
        add_tab_.resize(static_cast<std::size_t>(q_) * q_);
        mul_tab_.resize(static_cast<std::size_t>(q_) * q_);
        for (Fe a = 0; a < q_; ++a)
            for (Fe b = 0; b < q_; ++b) {
                add_tab_[static_cast<std::size_t>(a) * q_ + b] = add_generic(a, b);
                mul_tab_[static_cast<std::size_t>(a) * q_ + b] = mul_generic(a, b);
            }
        neg_tab_.resize(q_);
        for (Fe a = 0; a < q_; ++a) {
            Fe r = 0, mult = 1, v = a;
            for (std::uint32_t i = 0; i < k_; ++i) {
                Fe d = v % p_;
                v /= p_;
                r += ((p_ - d) % p_) * mult;
                mult *= p_;
            }
            neg_tab_[a] = r;
        }
        inv_tab_.assign(q_, 0);
        for (Fe a = 1; a < q_; ++a) inv_tab_[a] = pow(a, q_ - 2);
    }
    if (k_ >= 2 && q_ <= kTableMaxQ) {
        trace_tab_.resize(q_);
        for (Fe a = 0; a < q_; ++a) {
            Fe t = a, acc = a;
            for (std::uint32_t i = 1; i < k_; ++i) {
                t = pow(t, p_);
                acc = add(acc, t);
            }
            // a prime-subfield element has all digits above the constant zero
            trace_tab_[a] = acc;
        }
    }
    if (p_ <= kChiTableMaxP) {
        chi_roots_.resize(p_);
        for (std::uint32_t r = 0; r < p_; ++r) {
            double ang = 2.0 * std::numbers::pi * r / p_;
            chi_roots_[r] = {std::cos(ang), std::sin(ang)};
        }
    }
}

Fe Field::add(Fe a, Fe b) const {
    if (k_ == 1) {
        Fe s = a + b;
        return s >= q_ ? s - q_ : s;
    }
    if (!add_tab_.empty()) return add_tab_[static_cast<std::size_t>(a) * q_ + b];
    return add_generic(a, b);
}

Fe Field::neg(Fe a) const {
    if (k_ == 1) return a == 0 ? 0 : q_ - a;
    if (!neg_tab_.empty()) return neg_tab_[a];
    Fe r = 0, mult = 1;
    for (std::uint32_t i = 0; i < k_; ++i) {
        Fe d = a % p_;
        a /= p_;
        r += ((p_ - d) % p_) * mult;
        mult *= p_;
    }
    return r;
}

Fe Field::sub(Fe a, Fe b) const { return add(a, neg(b)); }

Fe Field::mul(Fe a, Fe b) const {
    if (k_ == 1)
        return static_cast<Fe>(static_cast<std::uint64_t>(a) * b % q_);
    if (!mul_tab_.empty()) return mul_tab_[static_cast<std::size_t>(a) * q_ + b];
    return mul_generic(a, b);
}

Fe Field::inv(Fe a) const {
    if (a == 0) throw FqError(Errc::DivisionByZero, "inverse of zero");
    if (!inv_tab_.empty()) return inv_tab_[a];
    return pow(a, q_ - 2);
}

Fe Field::pow(Fe a, std::uint64_t e) const {
    Fe r = 1;
    while (e) {
        if (e & 1) r = mul(r, a);
        a = mul(a, a);
        e >>= 1;
    }
    return r;
}

std::uint32_t Field::trace(Fe a) const {
    if (k_ == 1) return a;
    Fe acc;
    if (!trace_tab_.empty()) {
        acc = trace_tab_[a];
    } else {
        Fe t = a;
        acc = a;
        for (std::uint32_t i = 1; i < k_; ++i) {
            t = pow(t, p_);
            acc = add(acc, t);
        }
    }
    return acc % p_; // constant digit; higher digits are zero for trace values
}

std::complex<double> Field::chi(Fe a) const {
    std::uint32_t t = trace(a);
    if (!chi_roots_.empty()) return chi_roots_[t];
    double ang = 2.0 * std::numbers::pi * t / p_;
    return {std::cos(ang), std::sin(ang)};
}

std::optional<Fe> Field::sqrt_minus_one() const {
    Fe minus_one = neg(1);
    for (Fe a = 0; a < q_; ++a)
        if (mul(a, a) == minus_one) return a;
    return std::nullopt;
}

FieldRef make_field(std::uint32_t p, std::uint32_t k) {
    return std::make_shared<const Field>(Field::make(p, k));
}

FieldRef make_field_with_modulus(std::uint32_t p, std::uint32_t k,
                                 std::vector<std::uint32_t> modulus) {
    return std::make_shared<const Field>(p, k, std::move(modulus));
}

} // namespace fqdist
