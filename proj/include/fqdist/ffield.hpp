#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "fqdist/errors.hpp"

namespace fqdist {

/// Canonical field element value in [0, q). The encoding is base-p digits =
/// polynomial coefficients, low degree first; it is the wire format everywhere.
using Fe = std::uint32_t;

/// Exact arithmetic in F_q, q = p^k, behind a canonical monic irreducible
/// modulus. Immutable after construction and safe to share across threads;
/// all operations are pure.
class Field {
public:
    static constexpr std::uint64_t kMaxQ = 1ull << 20;
    static constexpr std::uint32_t kMaxK = 20;

    /// Canonical field: the modulus is the first irreducible among monic
    /// degree-k polynomials ordered by their integer encoding sum c_i p^i.
    static Field make(std::uint32_t p, std::uint32_t k);

    /// Explicit modulus (k+1 digits in [0,p), low degree first, monic).
    /// Validates primality, range and irreducibility; used by file loads.
    Field(std::uint32_t p, std::uint32_t k, std::vector<std::uint32_t> modulus);

    std::uint32_t p() const { return p_; }
    std::uint32_t k() const { return k_; }
    std::uint32_t q() const { return q_; }
    const std::vector<std::uint32_t>& modulus() const { return modulus_; }
    /// Modulus packed as sum c_i p^i (includes the monic leading digit).
    std::uint64_t modulus_value() const;
    /// Human form, e.g. "x^2+1".
    std::string modulus_string() const;

    bool operator==(const Field& o) const {
        return p_ == o.p_ && k_ == o.k_ && modulus_ == o.modulus_;
    }
    bool operator!=(const Field& o) const { return !(*this == o); }

    Fe add(Fe a, Fe b) const;
    Fe sub(Fe a, Fe b) const;
    Fe neg(Fe a) const;
    Fe mul(Fe a, Fe b) const;
    Fe inv(Fe a) const; // throws DivisionByZero on a == 0
    Fe pow(Fe a, std::uint64_t e) const;

    /// Trace to the prime subfield: sum of a^(p^i) for i < k, as an integer
    /// in [0, p). Identity when k = 1.
    std::uint32_t trace(Fe a) const;

    /// Principal additive character chi(a) = exp(2 pi i trace(a) / p).
    std::complex<double> chi(Fe a) const;

    /// Smallest canonical value i with i*i = -1, if one exists.
    std::optional<Fe> sqrt_minus_one() const;

    bool element_ok(Fe a) const { return a < q_; }

private:
    Field() = default;
    void init_tables();
    Fe mul_generic(Fe a, Fe b) const;
    Fe add_generic(Fe a, Fe b) const;

    std::uint32_t p_ = 0, k_ = 0, q_ = 0;
    std::vector<std::uint32_t> modulus_;
    // dense op tables for small extension fields; empty on the generic path
    std::vector<Fe> add_tab_, mul_tab_, neg_tab_, inv_tab_;
    std::vector<std::uint32_t> trace_tab_;
    std::vector<std::complex<double>> chi_roots_; // p-th roots of unity
};

using FieldRef = std::shared_ptr<const Field>;

FieldRef make_field(std::uint32_t p, std::uint32_t k);
FieldRef make_field_with_modulus(std::uint32_t p, std::uint32_t k,
                                 std::vector<std::uint32_t> modulus);

bool is_prime_u64(std::uint64_t n);

/// Digits of the packed modulus value, low degree first (k+1 of them).
std::vector<std::uint32_t> modulus_digits_from_value(std::uint32_t p, std::uint32_t k,
                                                     std::uint64_t value);

} // namespace fqdist
