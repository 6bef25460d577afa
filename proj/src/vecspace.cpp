#include "fqdist/vecspace.hpp"

#include <algorithm>
#include <bit>

#include "fqdist/rng.hpp"

namespace fqdist {

u64 universe_size_checked(const Field& f, std::uint32_t d) {
    if (d < 1) throw FqError(Errc::BadDimension, "d must be >= 1");
    u64 n = 1;
    for (std::uint32_t i = 0; i < d; ++i) {
        n *= f.q();
        if (n > PointSet::kIndexCap)
            throw FqError(Errc::MemoryCap, "q^d exceeds the 2^28 index cap");
    }
    return n;
}

PointSet::PointSet(FieldRef field, std::uint32_t d) : field_(std::move(field)), d_(d) {
    npoints_ = universe_size_checked(*field_, d_);
    words_.assign((npoints_ + 63) / 64, 0);
}

void PointSet::set_index(u64 idx) { words_[idx >> 6] |= 1ull << (idx & 63); }

void PointSet::recount() {
    u64 n = 0;
    for (std::uint64_t w : words_) n += static_cast<u64>(std::popcount(w));
    size_ = n;
}

PointSet PointSet::empty(FieldRef field, std::uint32_t d) { return PointSet(std::move(field), d); }

PointSet PointSet::from_indices(FieldRef field, std::uint32_t d, const std::vector<u64>& indices) {
    PointSet s(std::move(field), d);
    for (u64 idx : indices) {
        if (idx >= s.npoints_)
            throw FqError(Errc::CoordinateOutOfRange, "point index out of range");
        s.set_index(idx);
    }
    s.recount();
    return s;
}

PointSet PointSet::from_points(FieldRef field, std::uint32_t d, const std::vector<Point>& pts) {
    PointSet s(std::move(field), d);
    for (const Point& x : pts) s.set_index(s.encode(x));
    s.recount();
    return s;
}

u64 PointSet::encode(const Point& x) const {
    if (x.size() != d_) throw FqError(Errc::BadDimension, "point has wrong dimension");
    u64 idx = 0;
    for (std::uint32_t i = d_; i-- > 0;) {
        if (!field_->element_ok(x[i]))
            throw FqError(Errc::CoordinateOutOfRange, "coordinate not in [0, q)");
        idx = idx * field_->q() + x[i];
    }
    return idx;
}

Point PointSet::decode(u64 idx) const {
    Point x(d_);
    for (std::uint32_t i = 0; i < d_; ++i) {
        x[i] = static_cast<Fe>(idx % field_->q());
        idx /= field_->q();
    }
    return x;
}

void PointSet::for_each_index(const std::function<void(u64)>& fn) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
        std::uint64_t bits = words_[w];
        while (bits) {
            unsigned tz = static_cast<unsigned>(std::countr_zero(bits));
            fn((static_cast<u64>(w) << 6) + tz);
            bits &= bits - 1;
        }
    }
}

std::vector<u64> PointSet::indices() const {
    std::vector<u64> out;
    out.reserve(size_);
    for_each_index([&](u64 idx) { out.push_back(idx); });
    return out;
}

std::vector<Point> PointSet::points() const {
    std::vector<Point> out;
    out.reserve(size_);
    for_each_index([&](u64 idx) { out.push_back(decode(idx)); });
    return out;
}

bool PointSet::is_subset_of(const PointSet& other) const {
    if (*field_ != *other.field_ || d_ != other.d_)
        throw FqError(Errc::FieldMismatch, "sets live in different spaces");
    for (std::size_t w = 0; w < words_.size(); ++w)
        if (words_[w] & ~other.words_[w]) return false;
    return true;
}

bool PointSet::operator==(const PointSet& other) const {
    return *field_ == *other.field_ && d_ == other.d_ && words_ == other.words_;
}

PointSet PointSet::random(FieldRef field, std::uint32_t d, u64 n, u64 seed) {
    PointSet s(std::move(field), d);
    if (n > s.npoints_)
        throw FqError(Errc::SizeTooLarge,
                      "requested " + std::to_string(n) + " of " + std::to_string(s.npoints_) + " points");
    // Floyd's sampling: uniform without replacement, one pass, reproducible.
    SplitMix64 rng(seed);
    for (u64 j = s.npoints_ - n; j < s.npoints_; ++j) {
        u64 t = rng.below(j + 1);
        if (s.contains_index(t))
            s.set_index(j);
        else
            s.set_index(t);
    }
    s.recount();
    return s;
}

PointSet PointSet::product(FieldRef field, const std::vector<std::vector<Fe>>& factors) {
    if (factors.empty()) throw FqError(Errc::BadDimension, "product needs at least one factor");
    std::uint32_t d = static_cast<std::uint32_t>(factors.size());
    PointSet s(std::move(field), d);
    for (const auto& a : factors)
        for (Fe v : a)
            if (!s.field_->element_ok(v))
                throw FqError(Errc::CoordinateOutOfRange, "factor value not in [0, q)");
    // odometer over factor tuples
    if (std::any_of(factors.begin(), factors.end(),
                    [](const std::vector<Fe>& a) { return a.empty(); })) {
        return s;
    }
    std::vector<std::size_t> pos(d, 0);
    while (true) {
        u64 idx = 0;
        for (std::uint32_t i = d; i-- > 0;) idx = idx * s.field_->q() + factors[i][pos[i]];
        s.set_index(idx);
        std::uint32_t c = 0;
        while (c < d && ++pos[c] == factors[c].size()) {
            pos[c] = 0;
            ++c;
        }
        if (c == d) break;
    }
    s.recount();
    return s;
}

PointSet PointSet::isotropic_line(FieldRef field) {
    auto i_opt = field->sqrt_minus_one();
    if (!i_opt)
        throw FqError(Errc::NoSqrtMinusOne,
                      "no square root of -1 in F_" + std::to_string(field->q()));
    Fe i = *i_opt;
    const Field& f = *field;
    PointSet s(field, 2);
    for (Fe t = 0; t < f.q(); ++t) {
        Point x{t, f.mul(i, t)};
        s.set_index(s.encode(x));
    }
    s.recount();
    return s;
}

PointSet PointSet::sphere(FieldRef field, std::uint32_t d, Fe t) {
    if (!field->element_ok(t)) throw FqError(Errc::CoordinateOutOfRange, "t not in [0, q)");
    PointSet s(std::move(field), d);
    const Field& f = *s.field_;
    for (u64 idx = 0; idx < s.npoints_; ++idx) {
        u64 v = idx;
        Fe acc = 0;
        for (std::uint32_t i = 0; i < d; ++i) {
            Fe c = static_cast<Fe>(v % f.q());
            v /= f.q();
            acc = f.add(acc, f.mul(c, c));
        }
        if (acc == t) s.set_index(idx);
    }
    s.recount();
    return s;
}

PointSet PointSet::full_space(FieldRef field, std::uint32_t d) {
    PointSet s(std::move(field), d);
    for (u64 idx = 0; idx < s.npoints_; ++idx) s.set_index(idx);
    s.recount();
    return s;
}

PointSet PointSet::interval_grid(FieldRef field, std::uint32_t d, std::uint32_t m) {
    if (m > field->q()) throw FqError(Errc::SizeTooLarge, "grid side exceeds q");
    std::vector<Fe> interval(m);
    for (std::uint32_t i = 0; i < m; ++i) interval[i] = i;
    return product(std::move(field), std::vector<std::vector<Fe>>(d, interval));
}

Fe norm(const Field& f, const Point& x) {
    Fe acc = 0;
    for (Fe c : x) acc = f.add(acc, f.mul(c, c));
    return acc;
}

PointSet pin_slice(const PointSet& E, PinSpec pin) {
    if (E.empty_set()) throw FqError(Errc::EmptySet, "pin_slice of an empty set");
    std::uint32_t d = E.d();
    if (pin.j < 1 || pin.j > d) throw FqError(Errc::BadDimension, "pin coordinate out of range");
    if (!E.field()->element_ok(pin.z))
        throw FqError(Errc::CoordinateOutOfRange, "pin value not in [0, q)");
    std::uint32_t j0 = pin.j - 1;
    u64 q = E.field()->q();
    u64 stride = 1;
    for (std::uint32_t i = 0; i < j0; ++i) stride *= q;
    std::vector<u64> out;
    out.reserve(E.size());
    E.for_each_index([&](u64 idx) {
        Fe digit = static_cast<Fe>(idx / stride % q);
        u64 repinned = idx - static_cast<u64>(digit) * stride + static_cast<u64>(pin.z) * stride;
        out.push_back(repinned);
    });
    return PointSet::from_indices(E.field(), d, out);
}

std::vector<Fe> valid_pins(const PointSet& E, std::uint32_t j) {
    std::uint32_t d = E.d();
    if (j < 1 || j > d) throw FqError(Errc::BadDimension, "pin coordinate out of range");
    std::uint32_t j0 = j - 1;
    u64 q = E.field()->q();
    u64 stride = 1;
    for (std::uint32_t i = 0; i < j0; ++i) stride *= q;
    std::vector<bool> seen(q, false);
    E.for_each_index([&](u64 idx) { seen[idx / stride % q] = true; });
    std::vector<Fe> out;
    for (Fe v = 0; v < q; ++v)
        if (seen[v]) out.push_back(v);
    return out;
}

bool is_valid_pin(const PointSet& E, PinSpec pin) {
    auto pins = valid_pins(E, pin.j);
    return std::binary_search(pins.begin(), pins.end(), pin.z);
}

} // namespace fqdist
