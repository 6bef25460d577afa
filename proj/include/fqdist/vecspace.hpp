#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "fqdist/ffield.hpp"
#include "fqdist/util.hpp"

namespace fqdist {

using Point = std::vector<Fe>;

/// A pin (j, z): coordinate index j (1-based) and the value frozen there.
struct PinSpec {
    std::uint32_t j = 1;
    Fe z = 0;
};

/// An immutable subset of F_q^d held as a bit indicator over point indices.
/// The index of a point is sum x_i * q^i with x_0 least significant.
class PointSet {
public:
    static constexpr u64 kIndexCap = 1ull << 28;

    static PointSet empty(FieldRef field, std::uint32_t d);
    static PointSet from_indices(FieldRef field, std::uint32_t d, const std::vector<u64>& indices);
    static PointSet from_points(FieldRef field, std::uint32_t d, const std::vector<Point>& pts);

    /// n points drawn uniformly without replacement (Floyd's algorithm over
    /// SplitMix64); identical seed gives an identical set.
    static PointSet random(FieldRef field, std::uint32_t d, u64 n, u64 seed);
    static PointSet product(FieldRef field, const std::vector<std::vector<Fe>>& factors);
    /// {(t, i*t)} with i the canonical square root of -1; requires d = 2.
    static PointSet isotropic_line(FieldRef field);
    static PointSet sphere(FieldRef field, std::uint32_t d, Fe t);
    static PointSet full_space(FieldRef field, std::uint32_t d);
    /// {0,..,m-1}^d as canonical values.
    static PointSet interval_grid(FieldRef field, std::uint32_t d, std::uint32_t m);

    const FieldRef& field() const { return field_; }
    std::uint32_t d() const { return d_; }
    u64 size() const { return size_; }
    u64 universe_size() const { return npoints_; }
    bool empty_set() const { return size_ == 0; }

    bool contains_index(u64 idx) const {
        return (words_[idx >> 6] >> (idx & 63)) & 1;
    }
    bool contains(const Point& x) const { return contains_index(encode(x)); }

    u64 encode(const Point& x) const;
    Point decode(u64 idx) const;

    void for_each_index(const std::function<void(u64)>& fn) const;
    std::vector<u64> indices() const;          // ascending
    std::vector<Point> points() const;         // ascending by index

    bool is_subset_of(const PointSet& other) const;
    bool operator==(const PointSet& other) const;
    bool operator!=(const PointSet& other) const { return !(*this == other); }

private:
    PointSet(FieldRef field, std::uint32_t d);
    void set_index(u64 idx);
    void recount();

    FieldRef field_;
    std::uint32_t d_ = 0;
    u64 npoints_ = 0;
    u64 size_ = 0;
    std::vector<std::uint64_t> words_;
};

/// ||x|| = sum of squared coordinates (a quadratic form value, not a metric).
Fe norm(const Field& f, const Point& x);

/// The projection forgetting coordinate j, re-embedded with coordinate j set
/// to z. The result may contain points outside E; its size is |pi_j(E)|.
PointSet pin_slice(const PointSet& E, PinSpec pin);

/// Values attained by coordinate j over E (sorted ascending).
std::vector<Fe> valid_pins(const PointSet& E, std::uint32_t j);

bool is_valid_pin(const PointSet& E, PinSpec pin);

/// q^d with the index cap enforced.
u64 universe_size_checked(const Field& f, std::uint32_t d);

} // namespace fqdist
