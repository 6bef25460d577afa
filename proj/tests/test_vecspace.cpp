#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "fqdist/rng.hpp"
#include "fqdist/vecspace.hpp"

using namespace fqdist;

namespace {

PointSet make_set(FieldRef f, std::uint32_t d, std::vector<Point> pts) {
    return PointSet::from_points(std::move(f), d, pts);
}

} // namespace

TEST_CASE("norm on worked examples") {
    FieldRef f5 = make_field(5, 1);
    CHECK(norm(*f5, {0, 0}) == 0);
    CHECK(norm(*f5, {1, 2}) == 0); // 1+4 = 5 = 0: isotropic vector
    FieldRef f7 = make_field(7, 1);
    CHECK(norm(*f7, {1, 1, 1}) == 3);
}

TEST_CASE("norm is invariant under coordinate permutation and negation") {
    for (auto [p, k] : std::vector<std::pair<std::uint32_t, std::uint32_t>>{{5, 1}, {3, 2}, {13, 1}}) {
        FieldRef f = make_field(p, k);
        std::uint32_t q = f->q();
        SplitMix64 rng(SplitMix64::derive(7, q));
        for (int i = 0; i < 100; ++i) {
            Point x(3);
            for (auto& c : x) c = static_cast<Fe>(rng.below(q));
            Fe n0 = norm(*f, x);
            Point perm{x[2], x[0], x[1]};
            CHECK(norm(*f, perm) == n0);
            Point negd{x[0], f->neg(x[1]), x[2]};
            CHECK(norm(*f, negd) == n0);
        }
    }
}

TEST_CASE("pin_slice re-embeds the projection") {
    FieldRef f5 = make_field(5, 1);
    PointSet E = make_set(f5, 2, {{1, 2}, {3, 2}, {1, 4}});

    PointSet s1 = pin_slice(E, {2, 2});
    CHECK(s1 == make_set(f5, 2, {{1, 2}, {3, 2}}));

    // z = 0: neither resulting point belongs to E
    PointSet s2 = pin_slice(E, {2, 0});
    CHECK(s2 == make_set(f5, 2, {{1, 0}, {3, 0}}));
    CHECK_FALSE(s2.is_subset_of(E));

    // |slice| = |pi_j(E)| for every z: pi_2(E) = {1,3}, pi_1(E) = {2,4}
    for (Fe z = 0; z < 5; ++z) CHECK(pin_slice(E, {2, z}).size() == 2);
    for (Fe z = 0; z < 5; ++z) CHECK(pin_slice(E, {1, z}).size() == 2);

    CHECK_THROWS_AS(pin_slice(PointSet::empty(f5, 2), {1, 0}), FqError);
}

TEST_CASE("pin_slice size is independent of z on random sets") {
    FieldRef f = make_field(7, 1);
    for (int trial = 0; trial < 100; ++trial) {
        std::uint32_t d = 2 + trial % 2;
        u64 universe = 1;
        for (std::uint32_t i = 0; i < d; ++i) universe *= 7;
        SplitMix64 rng(SplitMix64::derive(100, trial));
        u64 n = 1 + rng.below(universe / 2);
        PointSet E = PointSet::random(f, d, n, trial);
        std::uint32_t j = 1 + static_cast<std::uint32_t>(rng.below(d));
        u64 expect = pin_slice(E, {j, 0}).size();
        for (Fe z = 1; z < 7; ++z) CHECK(pin_slice(E, {j, z}).size() == expect);
    }
}

TEST_CASE("product sets contain their slices at valid pins") {
    FieldRef f = make_field(7, 1);
    PointSet E = PointSet::product(f, {{0, 2, 3}, {1, 5}});
    CHECK(E.size() == 6);
    for (Fe z : {1u, 5u}) CHECK(pin_slice(E, {2, z}).is_subset_of(E));
    CHECK_FALSE(pin_slice(E, {2, 0}).is_subset_of(E));
}

TEST_CASE("valid pins enumerate attained coordinate values") {
    FieldRef f5 = make_field(5, 1);
    PointSet E = make_set(f5, 2, {{1, 2}, {3, 2}, {1, 4}});
    CHECK(valid_pins(E, 2) == std::vector<Fe>{2, 4});
    CHECK(valid_pins(E, 1) == std::vector<Fe>{1, 3});
    CHECK(is_valid_pin(E, {2, 2}));
    CHECK_FALSE(is_valid_pin(E, {2, 0}));

    PointSet full = PointSet::full_space(f5, 2);
    CHECK(valid_pins(full, 1).size() == 5);
    CHECK(valid_pins(PointSet::empty(f5, 2), 1).empty());
}

TEST_CASE("isotropic line matches the enumerated set for q = 5") {
    FieldRef f5 = make_field(5, 1);
    PointSet Z = PointSet::isotropic_line(f5);
    CHECK(Z == make_set(f5, 2, {{0, 0}, {1, 2}, {2, 4}, {3, 1}, {4, 3}}));
    for (const Point& x : Z.points()) CHECK(norm(*f5, x) == 0);

    CHECK_THROWS_AS(PointSet::isotropic_line(make_field(7, 1)), FqError);
    try {
        PointSet::isotropic_line(make_field(7, 1));
    } catch (const FqError& e) {
        CHECK(e.code() == Errc::NoSqrtMinusOne);
    }
}

TEST_CASE("generators: full space, product, grid, sphere") {
    FieldRef f3 = make_field(3, 1);
    CHECK(PointSet::full_space(f3, 2).size() == 9);

    FieldRef f5 = make_field(5, 1);
    CHECK(PointSet::product(f5, {{0, 1}, {0, 1}}).size() == 4);
    CHECK(PointSet::interval_grid(f5, 2, 2) == PointSet::product(f5, {{0, 1}, {0, 1}}));

    // sphere agrees with direct norm filtering
    PointSet s = PointSet::sphere(f5, 2, 1);
    PointSet full = PointSet::full_space(f5, 2);
    u64 count = 0;
    full.for_each_index([&](u64 idx) {
        if (norm(*f5, full.decode(idx)) == 1) {
            ++count;
            CHECK(s.contains_index(idx));
        }
    });
    CHECK(s.size() == count);
}

TEST_CASE("random generation is reproducible and respects n") {
    FieldRef f = make_field(13, 1);
    for (u64 n : {0ull, 1ull, 10ull, 169ull}) {
        PointSet a = PointSet::random(f, 2, n, 99);
        PointSet b = PointSet::random(f, 2, n, 99);
        CHECK(a.size() == n);
        CHECK(a == b);
    }
    PointSet c = PointSet::random(f, 2, 10, 99);
    PointSet d = PointSet::random(f, 2, 10, 100);
    CHECK(c != d); // overwhelmingly likely; fixed seeds make it deterministic

    CHECK_THROWS_AS(PointSet::random(f, 2, 170, 0), FqError);
    try {
        PointSet::random(f, 2, 170, 0);
    } catch (const FqError& e) {
        CHECK(e.code() == Errc::SizeTooLarge);
    }
}

TEST_CASE("encode and decode are inverse bijections") {
    FieldRef f9 = make_field(3, 2);
    PointSet E = PointSet::empty(f9, 2);
    for (u64 idx = 0; idx < E.universe_size(); ++idx) CHECK(E.encode(E.decode(idx)) == idx);
    CHECK_THROWS_AS(E.encode({9, 0}), FqError);
    CHECK_THROWS_AS(E.encode({0}), FqError);
}

TEST_CASE("index cap is enforced") {
    FieldRef f = make_field(2, 15); // 2^15; (2^15)^2 = 2^30 > 2^28
    CHECK_THROWS_AS(PointSet::empty(f, 2), FqError);
    try {
        PointSet::empty(f, 2);
    } catch (const FqError& e) {
        CHECK(e.code() == Errc::MemoryCap);
    }
}
