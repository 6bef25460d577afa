#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "fqdist/vecspace.hpp"

namespace fqdist {

enum class Engine { direct, conv, fft };

const char* engine_name(Engine e);
Engine engine_from_string(const std::string& s);

/// Incidence counts nu(t) over t in F_q. counts.size() == q and every entry
/// is an exact nonnegative integer.
struct Spectrum {
    FieldRef field;
    std::vector<std::int64_t> counts;

    u64 first_moment() const;  // sum nu(t)   = |F||E|
    u128 second_moment() const; // sum nu(t)^2
};

/// Default cap on q^d for the convolution engines (two u64 scratch arrays).
constexpr u64 kConvIndexCap = 1ull << 22;

/// nu(t) = |{(x,y) in F x E : ||x-y|| = t}|. All engines return identical
/// integer counts; conv uses an exact NTT, fft a floating transform that
/// rounds and rejects residuals >= 0.4.
Spectrum distance_spectrum(const PointSet& F, const PointSet& E,
                           Engine engine = Engine::direct,
                           u64 conv_index_cap = kConvIndexCap);

/// nu(t) = |{(x,y) in F x E : x.y = t}|. Direct engine only.
Spectrum dot_spectrum(const PointSet& F, const PointSet& E);

/// {t : nu(t) > 0}, sorted; optionally with 0 removed.
std::vector<Fe> support(const Spectrum& s, bool exclude_zero = false);

/// Support of the spectrum between pin_slice(E, pin) and E.
std::vector<Fe> pinned_distance_set(const PointSet& E, PinSpec pin);

/// {a1*a2 + a3*a4 : a_i in A} for a one-dimensional A.
std::vector<Fe> aa_plus_aa(const PointSet& A);

/// {a1*a2 + z*a3 : a_i in A} for a one-dimensional A.
std::vector<Fe> aa_plus_za(const PointSet& A, Fe z);

/// N(v) = |{(x,y) in F x E : x - y = v}| for every v, computed by exact
/// convolution over the additive group (Z_p)^{kd}.
std::vector<std::int64_t> pair_difference_counts(const PointSet& F, const PointSet& E,
                                                 u64 conv_index_cap = kConvIndexCap);

/// Cached norm-class table: entry idx holds ||decode(idx)||.
std::shared_ptr<const std::vector<Fe>> norm_table(const FieldRef& field, std::uint32_t d);

} // namespace fqdist
