#include "fqdist/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>

#include "fqdist/util.hpp"

namespace fqdist {
namespace {

void require_compatible(const PointSet& F, const PointSet& E) {
    if (*F.field() != *E.field() || F.d() != E.d())
        throw FqError(Errc::FieldMismatch, "operand sets live in different spaces");
}

// flat coordinate matrix: row i = decoded point i of S
std::vector<Fe> decode_all(const PointSet& S) {
    std::vector<Fe> coords;
    coords.reserve(S.size() * S.d());
    const Field& f = *S.field();
    std::uint32_t d = S.d();
    S.for_each_index([&](u64 idx) {
        for (std::uint32_t i = 0; i < d; ++i) {
            coords.push_back(static_cast<Fe>(idx % f.q()));
            idx /= f.q();
        }
    });
    return coords;
}

// ---- exact NTT over (Z_p)^m ----------------------------------------------

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(static_cast<u128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
    std::uint64_t r = 1;
    a %= m;
    while (e) {
        if (e & 1) r = mulmod(r, a, m);
        a = mulmod(a, a, m);
        e >>= 1;
    }
    return r;
}

struct NttPlan {
    std::uint64_t mod;               // prime, mod = 1 (mod p), mod > 2^45
    std::vector<std::uint64_t> root_pow;     // w^0..w^{p-1}, w of order p
    std::vector<std::uint64_t> root_inv_pow; // w^{-0}..w^{-(p-1)}
    std::uint64_t inv_p;
};

NttPlan make_plan(std::uint32_t p) {
    NttPlan plan;
    // smallest prime m = a*p + 1 above 2^45; counts stay below 2^44 < m
    std::uint64_t a = (1ull << 45) / p + 1;
    while (!is_prime_u64(a * p + 1)) ++a;
    std::uint64_t m = a * p + 1;
    plan.mod = m;
    // element of exact multiplicative order p
    std::uint64_t w = 1;
    for (std::uint64_t h = 2;; ++h) {
        w = powmod(h, (m - 1) / p, m);
        if (w != 1) break;
    }
    plan.root_pow.resize(p);
    plan.root_inv_pow.resize(p);
    std::uint64_t winv = powmod(w, p - 1, m);
    std::uint64_t f = 1, g = 1;
    for (std::uint32_t i = 0; i < p; ++i) {
        plan.root_pow[i] = f;
        plan.root_inv_pow[i] = g;
        f = mulmod(f, w, m);
        g = mulmod(g, winv, m);
    }
    plan.inv_p = powmod(p, m - 2, m);
    return plan;
}

// length-p naive DFT along every base-p axis of a[0..n), n = p^m_axes
void ntt_all_axes(std::vector<std::uint64_t>& a, std::uint32_t p, const NttPlan& plan,
                  bool inverse) {
    const std::vector<std::uint64_t>& pow = inverse ? plan.root_inv_pow : plan.root_pow;
    const std::uint64_t mod = plan.mod;
    u64 n = a.size();
    std::vector<std::uint64_t> fiber(p), out(p);
    for (u64 stride = 1; stride < n; stride *= p) {
        for (u64 block = 0; block < n; block += stride * p) {
            for (u64 off = 0; off < stride; ++off) {
                u64 base = block + off;
                for (std::uint32_t t = 0; t < p; ++t) fiber[t] = a[base + t * stride];
                for (std::uint32_t r = 0; r < p; ++r) {
                    u128 acc = 0;
                    std::uint64_t rt = 0;
                    for (std::uint32_t t = 0; t < p; ++t) {
                        acc += static_cast<u128>(fiber[t]) * pow[rt];
                        rt += r;
                        if (rt >= p) rt -= p;
                    }
                    out[r] = static_cast<std::uint64_t>(acc % mod);
                }
                for (std::uint32_t r = 0; r < p; ++r) a[base + r * stride] = out[r];
            }
        }
    }
    if (inverse) {
        std::uint32_t axes = 0;
        for (u64 s = 1; s < n; s *= p) ++axes;
        std::uint64_t scale = powmod(plan.inv_p, axes, mod);
        for (auto& v : a) v = mulmod(v, scale, mod);
    }
}

// negate every base-p digit of idx
u64 negate_index(u64 idx, std::uint32_t p, std::uint32_t digits) {
    u64 out = 0, mult = 1;
    for (std::uint32_t i = 0; i < digits; ++i) {
        u64 d = idx % p;
        idx /= p;
        out += (d == 0 ? 0 : p - d) * mult;
        mult *= p;
    }
    return out;
}

// floating path: same per-axis transform with complex doubles
void dft_all_axes(std::vector<std::complex<double>>& a, std::uint32_t p, bool inverse) {
    u64 n = a.size();
    std::vector<std::complex<double>> roots(p), fiber(p), out(p);
    double sign = inverse ? -1.0 : 1.0;
    for (std::uint32_t r = 0; r < p; ++r) {
        double ang = sign * 2.0 * std::numbers::pi * r / p;
        roots[r] = {std::cos(ang), std::sin(ang)};
    }
    for (u64 stride = 1; stride < n; stride *= p) {
        for (u64 block = 0; block < n; block += stride * p) {
            for (u64 off = 0; off < stride; ++off) {
                u64 base = block + off;
                for (std::uint32_t t = 0; t < p; ++t) fiber[t] = a[base + t * stride];
                for (std::uint32_t r = 0; r < p; ++r) {
                    std::complex<double> acc = 0;
                    std::uint64_t rt = 0;
                    for (std::uint32_t t = 0; t < p; ++t) {
                        acc += fiber[t] * roots[rt];
                        rt += r;
                        if (rt >= p) rt -= p;
                    }
                    out[r] = acc;
                }
                for (std::uint32_t r = 0; r < p; ++r) a[base + r * stride] = out[r];
            }
        }
    }
    if (inverse) {
        double scale = 1.0 / static_cast<double>(n);
        for (auto& v : a) v *= scale;
    }
}

std::uint32_t base_p_digit_count(const Field& f, std::uint32_t d) {
    return f.k() * d;
}

std::vector<std::int64_t> difference_counts_ntt(const PointSet& F, const PointSet& E) {
    const Field& f = *F.field();
    std::uint32_t p = f.p();
    std::uint32_t digits = base_p_digit_count(f, F.d());
    u64 n = F.universe_size();

    std::vector<std::uint64_t> a(n, 0), b(n, 0);
    F.for_each_index([&](u64 idx) { a[idx] = 1; });
    // reflect E so that plain convolution yields difference counts
    E.for_each_index([&](u64 idx) { b[negate_index(idx, p, digits)] = 1; });

    NttPlan plan = make_plan(p);
    ntt_all_axes(a, p, plan, false);
    ntt_all_axes(b, p, plan, false);
    for (u64 i = 0; i < n; ++i) a[i] = mulmod(a[i], b[i], plan.mod);
    ntt_all_axes(a, p, plan, true);

    std::vector<std::int64_t> counts(n);
    for (u64 i = 0; i < n; ++i) counts[i] = static_cast<std::int64_t>(a[i]);
    return counts;
}

std::vector<std::int64_t> difference_counts_fft(const PointSet& F, const PointSet& E) {
    const Field& f = *F.field();
    std::uint32_t p = f.p();
    std::uint32_t digits = base_p_digit_count(f, F.d());
    u64 n = F.universe_size();

    std::vector<std::complex<double>> a(n, 0.0), b(n, 0.0);
    F.for_each_index([&](u64 idx) { a[idx] = 1.0; });
    E.for_each_index([&](u64 idx) { b[negate_index(idx, p, digits)] = 1.0; });

    dft_all_axes(a, p, false);
    dft_all_axes(b, p, false);
    for (u64 i = 0; i < n; ++i) a[i] *= b[i];
    dft_all_axes(a, p, true);

    std::vector<std::int64_t> counts(n);
    for (u64 i = 0; i < n; ++i) {
        double re = a[i].real();
        std::int64_t r = std::llround(re);
        double residual = std::max(std::abs(re - static_cast<double>(r)), std::abs(a[i].imag()));
        if (residual >= 0.4)
            throw FqError(Errc::ToleranceExceeded,
                          "fft rounding residual " + double_to_string(residual));
        counts[i] = r;
    }
    return counts;
}

} // namespace

const char* engine_name(Engine e) {
    switch (e) {
        case Engine::direct: return "direct";
        case Engine::conv: return "conv";
        case Engine::fft: return "fft";
    }
    return "?";
}

Engine engine_from_string(const std::string& s) {
    if (s == "direct") return Engine::direct;
    if (s == "conv") return Engine::conv;
    if (s == "fft") return Engine::fft;
    throw FqError(Errc::BadConfig, "unknown engine '" + s + "'");
}

u64 Spectrum::first_moment() const {
    u64 acc = 0;
    for (std::int64_t c : counts) acc += static_cast<u64>(c);
    return acc;
}

u128 Spectrum::second_moment() const {
    u128 acc = 0;
    for (std::int64_t c : counts) acc += static_cast<u128>(c) * static_cast<u128>(c);
    return acc;
}

std::shared_ptr<const std::vector<Fe>> norm_table(const FieldRef& field, std::uint32_t d) {
    static std::mutex mu;
    static std::map<std::tuple<std::uint32_t, std::uint32_t, std::uint64_t, std::uint32_t>,
                    std::shared_ptr<const std::vector<Fe>>>
        cache;
    auto key = std::make_tuple(field->p(), field->k(), field->modulus_value(), d);
    {
        std::scoped_lock lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    const Field& f = *field;
    u64 n = universe_size_checked(f, d);
    auto table = std::make_shared<std::vector<Fe>>(n);
    // odometer: norm updates incrementally would save little at desk scale
    for (u64 idx = 0; idx < n; ++idx) {
        u64 v = idx;
        Fe acc = 0;
        for (std::uint32_t i = 0; i < d; ++i) {
            Fe c = static_cast<Fe>(v % f.q());
            v /= f.q();
            acc = f.add(acc, f.mul(c, c));
        }
        (*table)[idx] = acc;
    }
    std::shared_ptr<const std::vector<Fe>> out = table;
    if (n <= kConvIndexCap) {
        std::scoped_lock lock(mu);
        cache.emplace(key, out);
    }
    return out;
}

std::vector<std::int64_t> pair_difference_counts(const PointSet& F, const PointSet& E,
                                                 u64 conv_index_cap) {
    require_compatible(F, E);
    if (F.universe_size() > conv_index_cap)
        throw FqError(Errc::MemoryCap, "q^d exceeds the convolution cap");
    return difference_counts_ntt(F, E);
}

namespace {

Spectrum distance_direct(const PointSet& F, const PointSet& E) {
    const Field& f = *F.field();
    std::uint32_t d = F.d();
    std::vector<Fe> fc = decode_all(F);
    std::vector<Fe> ec = decode_all(E);
    u64 nf = F.size(), ne = E.size();

    Spectrum s{F.field(), std::vector<std::int64_t>(f.q(), 0)};
    if (nf == 0 || ne == 0) return s;

    unsigned workers = num_threads();
    if (nf * ne < (1ull << 21)) workers = 1; // thread spawn not worth it
    u64 chunk_rows = std::max<u64>(1, (nf + workers - 1) / workers);
    u64 nchunks = (nf + chunk_rows - 1) / chunk_rows;
    std::vector<std::vector<std::int64_t>> partial(nchunks,
                                                   std::vector<std::int64_t>(f.q(), 0));
    parallel_for(nchunks, [&](u64 cb, u64 ce) {
        for (u64 c = cb; c < ce; ++c) {
            auto& acc = partial[c];
            u64 row_b = c * chunk_rows;
            u64 row_e = std::min(nf, row_b + chunk_rows);
            for (u64 i = row_b; i < row_e; ++i) {
                const Fe* x = &fc[i * d];
                for (u64 j = 0; j < ne; ++j) {
                    const Fe* y = &ec[j * d];
                    Fe t = 0;
                    for (std::uint32_t c2 = 0; c2 < d; ++c2) {
                        Fe diff = f.sub(x[c2], y[c2]);
                        t = f.add(t, f.mul(diff, diff));
                    }
                    ++acc[t];
                }
            }
        }
    });
    for (const auto& acc : partial)
        for (std::uint32_t t = 0; t < f.q(); ++t) s.counts[t] += acc[t];
    return s;
}

Spectrum distance_conv(const PointSet& F, const PointSet& E, Engine engine, u64 cap) {
    if (F.universe_size() > cap)
        throw FqError(Errc::MemoryCap, "q^d exceeds the convolution cap");
    std::vector<std::int64_t> diff = engine == Engine::fft ? difference_counts_fft(F, E)
                                                           : difference_counts_ntt(F, E);
    auto norms = norm_table(F.field(), F.d());
    Spectrum s{F.field(), std::vector<std::int64_t>(F.field()->q(), 0)};
    for (u64 v = 0; v < diff.size(); ++v) s.counts[(*norms)[v]] += diff[v];
    return s;
}

} // namespace

Spectrum distance_spectrum(const PointSet& F, const PointSet& E, Engine engine,
                           u64 conv_index_cap) {
    require_compatible(F, E);
    if (engine == Engine::direct) return distance_direct(F, E);
    return distance_conv(F, E, engine, conv_index_cap);
}

Spectrum dot_spectrum(const PointSet& F, const PointSet& E) {
    require_compatible(F, E);
    const Field& f = *F.field();
    std::uint32_t d = F.d();
    std::vector<Fe> fc = decode_all(F);
    std::vector<Fe> ec = decode_all(E);
    u64 nf = F.size(), ne = E.size();

    Spectrum s{F.field(), std::vector<std::int64_t>(f.q(), 0)};
    if (nf == 0 || ne == 0) return s;

    unsigned workers = num_threads();
    if (nf * ne < (1ull << 21)) workers = 1;
    u64 chunk_rows = std::max<u64>(1, (nf + workers - 1) / workers);
    u64 nchunks = (nf + chunk_rows - 1) / chunk_rows;
    std::vector<std::vector<std::int64_t>> partial(nchunks,
                                                   std::vector<std::int64_t>(f.q(), 0));
    parallel_for(nchunks, [&](u64 cb, u64 ce) {
        for (u64 c = cb; c < ce; ++c) {
            auto& acc = partial[c];
            u64 row_b = c * chunk_rows;
            u64 row_e = std::min(nf, row_b + chunk_rows);
            for (u64 i = row_b; i < row_e; ++i) {
                const Fe* x = &fc[i * d];
                for (u64 j = 0; j < ne; ++j) {
                    const Fe* y = &ec[j * d];
                    Fe t = 0;
                    for (std::uint32_t c2 = 0; c2 < d; ++c2)
                        t = f.add(t, f.mul(x[c2], y[c2]));
                    ++acc[t];
                }
            }
        }
    });
    for (const auto& acc : partial)
        for (std::uint32_t t = 0; t < f.q(); ++t) s.counts[t] += acc[t];
    return s;
}

std::vector<Fe> support(const Spectrum& s, bool exclude_zero) {
    std::vector<Fe> out;
    for (std::uint32_t t = 0; t < s.counts.size(); ++t)
        if (s.counts[t] > 0 && !(exclude_zero && t == 0)) out.push_back(t);
    return out;
}

std::vector<Fe> pinned_distance_set(const PointSet& E, PinSpec pin) {
    if (E.empty_set()) throw FqError(Errc::EmptySet, "pinned distance set of an empty set");
    PointSet Ez = pin_slice(E, pin);
    return support(distance_spectrum(Ez, E));
}

namespace {

void require_line(const PointSet& A) {
    if (A.d() != 1) throw FqError(Errc::BadDimension, "requires a one-dimensional set");
}

std::vector<bool> product_set_bits(const Field& f, const std::vector<Fe>& a,
                                   const std::vector<Fe>& b) {
    std::vector<bool> bits(f.q(), false);
    for (Fe x : a)
        for (Fe y : b) bits[f.mul(x, y)] = true;
    return bits;
}

std::vector<Fe> bits_to_values(const std::vector<bool>& bits) {
    std::vector<Fe> out;
    for (std::uint32_t v = 0; v < bits.size(); ++v)
        if (bits[v]) out.push_back(v);
    return out;
}

} // namespace

std::vector<Fe> aa_plus_aa(const PointSet& A) {
    require_line(A);
    const Field& f = *A.field();
    std::vector<Fe> a;
    A.for_each_index([&](u64 idx) { a.push_back(static_cast<Fe>(idx)); });
    std::vector<Fe> prods = bits_to_values(product_set_bits(f, a, a));
    std::vector<bool> sums(f.q(), false);
    for (Fe u : prods)
        for (Fe v : prods) sums[f.add(u, v)] = true;
    return bits_to_values(sums);
}

std::vector<Fe> aa_plus_za(const PointSet& A, Fe z) {
    require_line(A);
    const Field& f = *A.field();
    if (!f.element_ok(z)) throw FqError(Errc::CoordinateOutOfRange, "z not in [0, q)");
    std::vector<Fe> a;
    A.for_each_index([&](u64 idx) { a.push_back(static_cast<Fe>(idx)); });
    std::vector<Fe> prods = bits_to_values(product_set_bits(f, a, a));
    std::vector<bool> za(f.q(), false);
    for (Fe x : a) za[f.mul(z, x)] = true;
    std::vector<Fe> zvals = bits_to_values(za);
    std::vector<bool> sums(f.q(), false);
    for (Fe u : prods)
        for (Fe v : zvals) sums[f.add(u, v)] = true;
    return bits_to_values(sums);
}

} // namespace fqdist
