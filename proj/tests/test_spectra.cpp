#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "fqdist/rng.hpp"
#include "fqdist/spectra.hpp"

using namespace fqdist;

namespace {

// test-side oracle: plain pair loop, no engine machinery
std::vector<std::int64_t> naive_distance(const PointSet& F, const PointSet& E) {
    const Field& f = *F.field();
    std::vector<std::int64_t> counts(f.q(), 0);
    for (const Point& x : F.points())
        for (const Point& y : E.points()) {
            Fe acc = 0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                Fe dd = f.sub(x[i], y[i]);
                acc = f.add(acc, f.mul(dd, dd));
            }
            ++counts[acc];
        }
    return counts;
}

std::vector<std::int64_t> naive_dot(const PointSet& F, const PointSet& E) {
    const Field& f = *F.field();
    std::vector<std::int64_t> counts(f.q(), 0);
    for (const Point& x : F.points())
        for (const Point& y : E.points()) {
            Fe acc = 0;
            for (std::size_t i = 0; i < x.size(); ++i) acc = f.add(acc, f.mul(x[i], y[i]));
            ++counts[acc];
        }
    return counts;
}

PointSet translate(const PointSet& E, const Point& v) {
    const Field& f = *E.field();
    std::vector<Point> out;
    for (Point x : E.points()) {
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = f.add(x[i], v[i]);
        out.push_back(std::move(x));
    }
    return PointSet::from_points(E.field(), E.d(), out);
}

} // namespace

TEST_CASE("distance spectrum on worked examples") {
    FieldRef f5 = make_field(5, 1);
    PointSet single = PointSet::from_points(f5, 2, {{0, 0}});
    Spectrum s1 = distance_spectrum(single, single);
    CHECK(s1.counts == std::vector<std::int64_t>{1, 0, 0, 0, 0});

    PointSet grid = PointSet::product(f5, {{0, 1}, {0, 1}});
    Spectrum s2 = distance_spectrum(grid, grid);
    CHECK(s2.counts == std::vector<std::int64_t>{4, 8, 4, 0, 0});
    CHECK(support(s2) == std::vector<Fe>{0, 1, 2});
}

TEST_CASE("full space attains every value") {
    for (auto [p, k, d] : std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>>{
             {3, 1, 2}, {5, 1, 2}, {3, 2, 2}, {7, 1, 3}}) {
        FieldRef f = make_field(p, k);
        PointSet E = PointSet::full_space(f, d);
        Spectrum s = distance_spectrum(E, E);
        CHECK(support(s).size() == f->q());

        // sanity band around q^{2d-1}; exact sphere counts are not asserted
        double center = std::pow(static_cast<double>(f->q()), 2.0 * d - 1);
        for (std::uint32_t t = 0; t < f->q(); ++t) {
            CHECK(static_cast<double>(s.counts[t]) <= 3.0 * center);
            if (t != 0)
                CHECK(std::abs(s.counts[t] - center) <=
                      2.0 * center / std::sqrt(static_cast<double>(f->q())));
        }
    }
}

TEST_CASE("dot spectrum on worked examples") {
    FieldRef f5 = make_field(5, 1);
    PointSet a = PointSet::from_points(f5, 2, {{1, 0}});
    PointSet b = PointSet::from_points(f5, 2, {{0, 1}});
    CHECK(dot_spectrum(a, b).counts == std::vector<std::int64_t>{1, 0, 0, 0, 0});

    PointSet c = PointSet::from_points(f5, 2, {{1, 1}});
    CHECK(dot_spectrum(c, c).counts == std::vector<std::int64_t>{0, 0, 1, 0, 0});

    FieldRef f3 = make_field(3, 1);
    PointSet full = PointSet::full_space(f3, 2);
    CHECK(dot_spectrum(full, full).counts == std::vector<std::int64_t>{33, 24, 24});
}

TEST_CASE("support with and without zero") {
    FieldRef f5 = make_field(5, 1);
    PointSet Z = PointSet::isotropic_line(f5);
    Spectrum s = distance_spectrum(Z, Z);
    CHECK(support(s) == std::vector<Fe>{0});
    CHECK(support(s, true).empty());

    PointSet single = PointSet::from_points(f5, 2, {{2, 3}});
    CHECK(support(distance_spectrum(single, single)) == std::vector<Fe>{0});
}

TEST_CASE("mass identity and engine agreement on random instances") {
    SplitMix64 rng(2024);
    const std::pair<std::uint32_t, std::uint32_t> fields[] = {{3, 1}, {5, 1}, {2, 2}, {3, 2}, {7, 1}};
    for (int trial = 0; trial < 200; ++trial) {
        auto [p, k] = fields[trial % 5];
        FieldRef f = make_field(p, k);
        std::uint32_t d = 2 + trial % 2;
        u64 universe = 1;
        for (std::uint32_t i = 0; i < d; ++i) universe *= f->q();
        u64 nf = 1 + rng.below(std::min<u64>(universe, 60));
        u64 ne = 1 + rng.below(std::min<u64>(universe, 60));
        PointSet F = PointSet::random(f, d, nf, rng.next());
        PointSet E = PointSet::random(f, d, ne, rng.next());

        Spectrum direct = distance_spectrum(F, E, Engine::direct);
        CHECK(direct.first_moment() == nf * ne);
        CHECK(direct.counts == naive_distance(F, E));

        Spectrum conv = distance_spectrum(F, E, Engine::conv);
        CHECK(conv.counts == direct.counts);

        Spectrum fft = distance_spectrum(F, E, Engine::fft);
        CHECK(fft.counts == direct.counts);

        Spectrum dot = dot_spectrum(F, E);
        CHECK(dot.first_moment() == nf * ne);
        CHECK(dot.counts == naive_dot(F, E));
    }
}

TEST_CASE("pair difference counts: kernel identities") {
    FieldRef f5 = make_field(5, 1);
    PointSet single = PointSet::from_points(f5, 2, {{3, 1}});
    auto n = pair_difference_counts(single, single);
    CHECK(n[0] == 1);
    CHECK(std::count(n.begin(), n.end(), 0) == static_cast<long>(n.size()) - 1);

    SplitMix64 rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        std::uint32_t q = trial % 2 ? 5 : 9;
        FieldRef f = q == 5 ? make_field(5, 1) : make_field(3, 2);
        u64 nf = 1 + rng.below(20);
        u64 ne = 1 + rng.below(20);
        PointSet F = PointSet::random(f, 2, nf, rng.next());
        PointSet E = PointSet::random(f, 2, ne, rng.next());
        auto counts = pair_difference_counts(F, E);
        u64 total = 0;
        for (auto c : counts) {
            CHECK(c >= 0);
            total += static_cast<u64>(c);
        }
        CHECK(total == nf * ne);

        // cross-check a few entries against the definition
        for (int probe = 0; probe < 5; ++probe) {
            u64 v = rng.below(counts.size());
            Point pv = F.decode(v);
            std::int64_t direct = 0;
            for (const Point& x : F.points())
                for (const Point& y : E.points()) {
                    bool eq = true;
                    for (std::uint32_t i = 0; i < 2; ++i)
                        if (f->sub(x[i], y[i]) != pv[i]) eq = false;
                    if (eq) ++direct;
                }
            CHECK(counts[v] == direct);
        }
    }
}

TEST_CASE("distance spectrum is translation and permutation invariant") {
    FieldRef f = make_field(7, 1);
    SplitMix64 rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        PointSet E = PointSet::random(f, 2, 1 + rng.below(30), rng.next());
        Spectrum base = distance_spectrum(E, E);

        Point v{static_cast<Fe>(rng.below(7)), static_cast<Fe>(rng.below(7))};
        CHECK(distance_spectrum(translate(E, v), translate(E, v)).counts == base.counts);

        std::vector<Point> swapped;
        for (const Point& x : E.points()) swapped.push_back({x[1], x[0]});
        PointSet Eswap = PointSet::from_points(f, 2, swapped);
        CHECK(distance_spectrum(Eswap, Eswap).counts == base.counts);
    }
}

TEST_CASE("pinned distance set: product example and containment") {
    FieldRef f5 = make_field(5, 1);
    PointSet grid = PointSet::product(f5, {{0, 1}, {0, 1}});
    CHECK(pinned_distance_set(grid, {2, 0}) == std::vector<Fe>{0, 1, 2});

    PointSet full = PointSet::full_space(f5, 2);
    CHECK(pinned_distance_set(full, {1, 3}).size() == 5);

    // containment for product sets pinned at valid z, 50 random runs
    SplitMix64 rng(55);
    for (int trial = 0; trial < 50; ++trial) {
        std::uint32_t q = trial % 2 ? 7 : 9;
        FieldRef f = q == 7 ? make_field(7, 1) : make_field(3, 2);
        std::vector<std::vector<Fe>> factors;
        for (int c = 0; c < 2; ++c) {
            std::vector<Fe> fac;
            u64 sz = 2 + rng.below(4);
            while (fac.size() < sz) {
                Fe v = static_cast<Fe>(rng.below(q));
                if (std::find(fac.begin(), fac.end(), v) == fac.end()) fac.push_back(v);
            }
            std::sort(fac.begin(), fac.end());
            factors.push_back(fac);
        }
        PointSet E = PointSet::product(f, factors);
        std::uint32_t j = 1 + static_cast<std::uint32_t>(rng.below(2));
        Fe z = factors[j - 1][rng.below(factors[j - 1].size())];
        auto pinned = pinned_distance_set(E, {j, z});
        auto delta = support(distance_spectrum(E, E));
        CHECK(std::includes(delta.begin(), delta.end(), pinned.begin(), pinned.end()));
    }
}

TEST_CASE("product-of-sums sets against quadruple and triple enumeration") {
    FieldRef f5 = make_field(5, 1);

    PointSet zero = PointSet::from_points(f5, 1, {{0}});
    CHECK(aa_plus_aa(zero) == std::vector<Fe>{0});

    PointSet fullline = PointSet::full_space(f5, 1);
    CHECK(aa_plus_aa(fullline).size() == 5);
    CHECK(aa_plus_za(fullline, 1).size() == 5);

    PointSet a1234 = PointSet::from_points(f5, 1, {{1}, {2}, {3}, {4}});
    CHECK(aa_plus_aa(a1234).size() == 5);

    // z = 0 degenerates to A.A
    PointSet a12 = PointSet::from_points(f5, 1, {{1}, {2}});
    std::vector<Fe> prods;
    for (Fe x : {1, 2})
        for (Fe y : {1, 2}) {
            Fe v = f5->mul(x, y);
            if (std::find(prods.begin(), prods.end(), v) == prods.end()) prods.push_back(v);
        }
    std::sort(prods.begin(), prods.end());
    CHECK(aa_plus_za(a12, 0) == prods);

    // oracle: brute-force loops over tuples
    SplitMix64 rng(808);
    for (int trial = 0; trial < 40; ++trial) {
        std::uint32_t q = trial % 2 ? 13 : 9;
        FieldRef f = q == 13 ? make_field(13, 1) : make_field(3, 2);
        u64 n = 1 + rng.below(6);
        PointSet A = PointSet::random(f, 1, n, rng.next());
        std::vector<Fe> vals;
        A.for_each_index([&](u64 idx) { vals.push_back(static_cast<Fe>(idx)); });

        std::vector<bool> quad(q, false);
        for (Fe a : vals)
            for (Fe b : vals)
                for (Fe c : vals)
                    for (Fe e : vals) quad[f->add(f->mul(a, b), f->mul(c, e))] = true;
        std::vector<Fe> expect4;
        for (Fe v = 0; v < q; ++v)
            if (quad[v]) expect4.push_back(v);
        CHECK(aa_plus_aa(A) == expect4);

        Fe z = static_cast<Fe>(rng.below(q));
        std::vector<bool> trip(q, false);
        for (Fe a : vals)
            for (Fe b : vals)
                for (Fe c : vals) trip[f->add(f->mul(a, b), f->mul(z, c))] = true;
        std::vector<Fe> expect3;
        for (Fe v = 0; v < q; ++v)
            if (trip[v]) expect3.push_back(v);
        CHECK(aa_plus_za(A, z) == expect3);
    }
}

TEST_CASE("error paths: mismatched fields, memory cap, bad dimension") {
    FieldRef f5 = make_field(5, 1);
    FieldRef f7 = make_field(7, 1);
    PointSet a = PointSet::from_points(f5, 2, {{0, 0}});
    PointSet b = PointSet::from_points(f7, 2, {{0, 0}});
    CHECK_THROWS_AS(distance_spectrum(a, b), FqError);
    CHECK_THROWS_AS(dot_spectrum(a, b), FqError);

    try {
        distance_spectrum(a, a, Engine::conv, 16); // universe 25 > cap 16
        CHECK(false);
    } catch (const FqError& e) {
        CHECK(e.code() == Errc::MemoryCap);
    }

    PointSet plane = PointSet::from_points(f5, 2, {{1, 1}});
    CHECK_THROWS_AS(aa_plus_aa(plane), FqError);
    CHECK_THROWS_AS(aa_plus_za(plane, 1), FqError);
}

TEST_CASE("spectrum moments use exact wide arithmetic") {
    FieldRef f = make_field(13, 1);
    PointSet E = PointSet::full_space(f, 2);
    Spectrum s = distance_spectrum(E, E);
    CHECK(s.first_moment() == 169ull * 169ull);
    u128 expect = 0;
    for (auto c : s.counts) expect += static_cast<u128>(c) * c;
    CHECK(s.second_moment() == expect);
}
