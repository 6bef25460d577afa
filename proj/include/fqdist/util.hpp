#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace fqdist {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

std::string u128_to_string(u128 v);

/// Exact nonnegative rational; den > 0, not necessarily reduced.
struct Rational {
    u128 num = 0;
    u128 den = 1;

    double as_double() const;
    std::string str() const; // "num/den"
};

/// true iff lhs >= num/den, evaluated exactly.
bool int_ge_rational(u128 lhs, const Rational& r);

u64 fnv1a64(const std::string& s);

/// floor(sqrt(n)) for 64-bit n, exact.
u64 isqrt_u64(u64 n);

/// Worker count: FQDIST_THREADS if set, else hardware concurrency, at least 1.
unsigned num_threads();

/// Splits [0, n) into contiguous chunks and runs fn(begin, end) on a pool.
/// fn must only touch disjoint state per chunk; results must not depend on
/// interleaving (all callers accumulate into per-chunk buffers).
void parallel_for(u64 n, const std::function<void(u64, u64)>& fn);

/// Shortest round-trip formatting for doubles ("%.17g" trimmed).
std::string double_to_string(double v);

std::vector<std::string> split_ws(const std::string& line);
std::vector<std::string> split_char(const std::string& line, char sep);

} // namespace fqdist
