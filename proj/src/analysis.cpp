#include "fqdist/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <unordered_map>

#include "fqdist/rng.hpp"
#include "json.hpp"

namespace fqdist {
namespace {

u128 u128_pow(u64 base, std::uint32_t e) {
    u128 r = 1;
    for (std::uint32_t i = 0; i < e; ++i) r *= base;
    return r;
}

void fill_context(DiagnosticsReport& rep, const PointSet& E) {
    const Field& f = *E.field();
    rep.p = f.p();
    rep.k = f.k();
    rep.q = f.q();
    rep.d = E.d();
    rep.size_E = E.size();
}

void fill_pin(DiagnosticsReport& rep, const PointSet& E, PinSpec pin) {
    rep.pin_j = pin.j;
    rep.pin_z = pin.z;
    rep.pin_valid = is_valid_pin(E, pin);
}

Spectrum spectrum_for(const PointSet& F, const PointSet& E, Metric metric) {
    return metric == Metric::distance ? distance_spectrum(F, E) : dot_spectrum(F, E);
}

void fill_moments(DiagnosticsReport& rep, const Spectrum& s, u64 nf, u64 ne) {
    u64 mass = s.first_moment();
    rep.first_moment = mass;
    rep.second_moment = s.second_moment();
    rep.support_size = support(s).size();
    rep.support_size_excl_zero = support(s, true).size();
    rep.flags["mass"] = mass == nf * ne;

    u128 lhs = static_cast<u128>(mass) * mass;
    u128 sm = *rep.second_moment;
    rep.flags["cs_chain"] = lhs <= static_cast<u128>(*rep.support_size) * sm;
    if (sm > 0) rep.cs_lower_bound = (lhs + sm - 1) / sm;
}

// per-coordinate digit of every point, plus fiber grouping on coordinate j
struct FiberIndex {
    // fiber key (index with digit j zeroed) -> digit values present
    std::unordered_map<u64, std::vector<Fe>> fibers;
};

FiberIndex fibers_on(const PointSet& E, std::uint32_t j) {
    std::uint32_t j0 = j - 1;
    u64 q = E.field()->q();
    u64 stride = 1;
    for (std::uint32_t i = 0; i < j0; ++i) stride *= q;
    FiberIndex fi;
    E.for_each_index([&](u64 idx) {
        Fe digit = static_cast<Fe>(idx / stride % q);
        u64 key = idx - static_cast<u64>(digit) * stride;
        fi.fibers[key].push_back(digit);
    });
    return fi;
}

} // namespace

const char* metric_name(Metric m) { return m == Metric::distance ? "distance" : "dot"; }

Metric metric_from_string(const std::string& s) {
    if (s == "distance") return Metric::distance;
    if (s == "dot") return Metric::dot;
    throw FqError(Errc::BadConfig, "unknown metric '" + s + "'");
}

bool DiagnosticsReport::passed() const {
    for (const auto& [name, ok] : flags)
        if (!ok) return false;
    return true;
}

std::string DiagnosticsReport::to_json_string() const {
    nlohmann::json j;
    j["check"] = check;
    j["metric"] = metric_name(metric);
    j["p"] = p;
    j["k"] = k;
    j["q"] = q;
    j["d"] = d;
    if (pin_j) j["pin_j"] = *pin_j;
    if (pin_z) j["pin_z"] = *pin_z;
    if (pin_valid) j["pin_valid"] = *pin_valid;
    j["size_E"] = size_E;
    if (size_Ez) j["size_Ez"] = *size_Ez;
    if (first_moment) j["first_moment"] = *first_moment;
    if (second_moment) j["second_moment"] = u128_to_string(*second_moment);
    if (support_size) j["support_size"] = *support_size;
    if (support_size_excl_zero) j["support_size_excl_zero"] = *support_size_excl_zero;
    if (cs_lower_bound) j["cs_lower_bound"] = u128_to_string(*cs_lower_bound);
    if (main_term) j["main_term"] = main_term->str();
    if (identity_lhs) j["identity_lhs"] = u128_to_string(*identity_lhs);
    if (R_term) j["R_term"] = *R_term;
    if (residual) j["residual"] = *residual;
    if (char_summands) j["char_summands"] = *char_summands;
    if (A_term) j["A_term"] = u128_to_string(*A_term);
    if (B_term) j["B_term"] = u128_to_string(*B_term);
    if (kappa_paper) j["kappa_paper"] = *kappa_paper;
    if (kappa_emp) j["kappa_emp"] = *kappa_emp;
    if (C) j["C"] = C->str();
    if (guarantee_derived) j["guarantee_derived"] = guarantee_derived->str();
    if (guarantee_paper_stated) j["guarantee_paper_stated"] = guarantee_paper_stated->str();
    j["flags"] = flags;
    j["observed"] = observed;
    j["passed"] = passed();
    return j.dump();
}

DiagnosticsReport cs_chain(const PointSet& F, const PointSet& E, Metric metric, Engine engine) {
    if (F.empty_set() || E.empty_set()) throw FqError(Errc::EmptySet, "cs_chain needs nonempty sets");
    DiagnosticsReport rep;
    rep.check = "cs";
    rep.metric = metric;
    fill_context(rep, E);
    rep.size_Ez = F.size();
    Spectrum s = metric == Metric::distance ? distance_spectrum(F, E, engine) : dot_spectrum(F, E);
    fill_moments(rep, s, F.size(), E.size());
    return rep;
}

DiagnosticsReport second_moment_identity(const PointSet& E, PinSpec pin, Metric metric,
                                         const IdentityOptions& opts) {
    if (E.empty_set()) throw FqError(Errc::EmptySet, "identity check needs a nonempty set");
    const Field& f = *E.field();
    PointSet Ez = pin_slice(E, pin);

    DiagnosticsReport rep;
    rep.check = "identity";
    rep.metric = metric;
    fill_context(rep, E);
    fill_pin(rep, E, pin);
    rep.size_Ez = Ez.size();

    u64 q = f.q();
    u64 nez = Ez.size(), ne = E.size();
    u64 summands = (q - 1) * nez * ne;
    rep.char_summands = summands;
    if (summands > opts.max_summands || nez * ne > 50'000'000)
        throw FqError(Errc::BudgetExceeded,
                      std::to_string(summands) + " character summands exceed the budget");

    std::uint32_t d = E.d();
    std::vector<Point> xs = Ez.points();
    std::vector<Point> ys = E.points();

    // arg(x,y): the s-free part of the exponent, one field element per pair
    std::vector<Fe> args(nez * ne);
    std::vector<Fe> norm_y(ne);
    for (u64 jy = 0; jy < ne; ++jy) norm_y[jy] = norm(f, ys[jy]);
    for (u64 ix = 0; ix < nez; ++ix) {
        for (u64 jy = 0; jy < ne; ++jy) {
            Fe xy = 0;
            for (std::uint32_t c = 0; c < d; ++c) xy = f.add(xy, f.mul(xs[ix][c], ys[jy][c]));
            args[ix * ne + jy] =
                metric == Metric::distance ? f.sub(norm_y[jy], f.add(xy, xy)) : xy;
        }
    }

    // exact triple count: T = sum over x of sum_t hist_x(t)^2
    u128 T = 0;
    {
        // form(x,y) = form(x,y') iff arg(x,y) = arg(x,y'): for the distance
        // form, ||x-y|| = ||x|| + arg(x,y), a bijective shift in t per x
        std::vector<u64> hist(q, 0);
        for (u64 ix = 0; ix < nez; ++ix) {
            std::fill(hist.begin(), hist.end(), 0);
            const Fe* row = &args[ix * ne];
            for (u64 jy = 0; jy < ne; ++jy) ++hist[row[jy]];
            for (u64 c : hist) T += static_cast<u128>(c) * c;
        }
    }
    u128 W = static_cast<u128>(nez) * T;
    rep.identity_lhs = W;
    if (W > (static_cast<u128>(1) << 53))
        throw FqError(Errc::BudgetExceeded, "triple count exceeds double-exact range");

    rep.main_term = Rational{static_cast<u128>(nez) * nez * ne * ne, q};

    // R = q^{-1}|Ez| sum_{s!=0} sum_{x in Ez} | sum_{y in E} chi(s*arg(x,y)) |^2,
    // accumulated per s and reduced in ascending s order for bit-stable output
    std::vector<double> per_s(q, 0.0);
    parallel_for(q - 1, [&](u64 b, u64 e) {
        for (u64 si = b; si < e; ++si) {
            Fe s = static_cast<Fe>(si + 1);
            double acc = 0.0;
            for (u64 ix = 0; ix < nez; ++ix) {
                const Fe* row = &args[ix * ne];
                std::complex<double> inner = 0.0;
                for (u64 jy = 0; jy < ne; ++jy) inner += f.chi(f.mul(s, row[jy]));
                acc += std::norm(inner);
            }
            per_s[s] = acc;
        }
    });
    double r_sum = 0.0;
    for (u64 s = 1; s < q; ++s) r_sum += per_s[s];
    double R = static_cast<double>(nez) / static_cast<double>(q) * r_sum;
    rep.R_term = R;

    double lhs_d = static_cast<double>(W);
    double resid = std::abs(lhs_d - rep.main_term->as_double() - R);
    rep.residual = resid;
    double tol = opts.tol_per_summand * static_cast<double>(std::max<u64>(1, summands));
    rep.flags["identity"] = resid < tol;
    rep.flags["r_nonneg"] = R >= -1e-9;

    // spot check the square-expansion identity on random triples
    {
        SplitMix64 rng(SplitMix64::derive(0x5eedf00d, q * 131 + d));
        bool ok = true;
        for (unsigned it = 0; it < opts.sample_triples; ++it) {
            Point x(d), y(d), y2(d);
            for (std::uint32_t c = 0; c < d; ++c) {
                x[c] = static_cast<Fe>(rng.below(q));
                y[c] = static_cast<Fe>(rng.below(q));
                y2[c] = static_cast<Fe>(rng.below(q));
            }
            auto diff_norm = [&](const Point& a, const Point& b) {
                Fe acc = 0;
                for (std::uint32_t c = 0; c < d; ++c) {
                    Fe t = f.sub(a[c], b[c]);
                    acc = f.add(acc, f.mul(t, t));
                }
                return acc;
            };
            auto half_expanded = [&](const Point& a, const Point& b) {
                Fe xy = 0;
                for (std::uint32_t c = 0; c < d; ++c) xy = f.add(xy, f.mul(a[c], b[c]));
                return f.sub(norm(f, b), f.add(xy, xy));
            };
            Fe lhs = f.sub(half_expanded(x, y), half_expanded(x, y2));
            Fe rhs = f.sub(diff_norm(x, y), diff_norm(x, y2));
            if (lhs != rhs) ok = false;
        }
        rep.flags["expansion_identity"] = ok;
    }

    if (!rep.flags["identity"])
        throw FqError(Errc::ToleranceExceeded,
                      "identity residual " + double_to_string(resid) + " at tolerance " +
                          double_to_string(tol));
    return rep;
}

DiagnosticsReport second_moment_bound(const PointSet& E, PinSpec pin, Metric metric) {
    if (E.empty_set()) throw FqError(Errc::EmptySet, "bound check needs a nonempty set");
    const Field& f = *E.field();
    if (f.p() == 2)
        throw FqError(Errc::EvenCharacteristic, "theorem checks need odd characteristic");
    if (E.d() < 2)
        throw FqError(Errc::BadDimension, "pinned second-moment analysis needs d >= 2");
    if (metric == Metric::dot && pin.z == 0)
        throw FqError(Errc::ZeroPin, "dot-product bound needs z != 0");

    PointSet Ez = pin_slice(E, pin);
    DiagnosticsReport rep;
    rep.check = "bound";
    rep.metric = metric;
    fill_context(rep, E);
    fill_pin(rep, E, pin);
    rep.size_Ez = Ez.size();

    Spectrum s = spectrum_for(Ez, E, metric);
    fill_moments(rep, s, Ez.size(), E.size());

    u64 q = f.q();
    std::uint32_t d = E.d();
    u64 ne = E.size(), nez = Ez.size();
    u128 sm = *rep.second_moment;
    u128 sq_sizes = static_cast<u128>(ne) * ne * nez * nez;
    u128 qd = u128_pow(q, d);
    u128 cross = static_cast<u128>(ne) * nez;

    int kp = metric == Metric::distance ? 3 : 2;
    rep.kappa_paper = kp;
    // q * sum nu^2 <= |E|^2|Ez|^2 + kappa q^d |E||Ez|
    rep.flags["second_moment_bound_paper"] =
        static_cast<u128>(q) * sm <= sq_sizes + static_cast<u128>(kp) * qd * cross;
    rep.flags["second_moment_bound_tight"] =
        static_cast<u128>(q) * sm <= sq_sizes + 2 * qd * cross;

    u128 qsm = static_cast<u128>(q) * sm;
    double excess = qsm > sq_sizes ? static_cast<double>(qsm - sq_sizes) : 0.0;
    rep.kappa_emp = excess / static_cast<double>(qd * cross);

    // slab decomposition counts on the pinned coordinate
    FiberIndex fi = fibers_on(E, pin.j);
    u128 P = 0; // ordered pairs with equal projection
    u64 S1 = 0; // additionally y_j + y'_j = 2z, y_j != y'_j
    Fe two_z = f.add(pin.z, pin.z);
    std::vector<bool> present(q, false);
    for (const auto& [key, digits] : fi.fibers) {
        P += static_cast<u128>(digits.size()) * digits.size();
        for (Fe v : digits) present[v] = true;
        for (Fe v : digits) {
            Fe w = f.sub(two_z, v);
            if (w != v && present[w]) ++S1;
        }
        for (Fe v : digits) present[v] = false;
    }
    u128 qd1 = u128_pow(q, d - 1);
    u128 qd2 = u128_pow(q, d - 2);
    if (metric == Metric::distance) {
        rep.A_term = qd1 * nez * (static_cast<u128>(S1) + ne);
        rep.B_term = qd2 * nez * P;
        rep.flags["a_bound"] = *rep.A_term <= 2 * qd1 * cross;
        rep.flags["b_bound"] = *rep.B_term <= qd1 * cross;
    } else {
        rep.A_term = qd1 * nez * ne;
        rep.B_term = qd2 * nez * P;
        rep.flags["b_bound"] = *rep.B_term <= qd1 * cross;
    }
    return rep;
}

namespace {

DiagnosticsReport theorem_check_pinned(const PointSet& E, PinSpec pin, Metric metric) {
    DiagnosticsReport rep = second_moment_bound(E, pin, metric);
    rep.check = metric == Metric::distance ? "distpinned" : "dot";
    u64 q = rep.q;
    u128 qd = u128_pow(q, rep.d);
    u128 cross = static_cast<u128>(rep.size_E) * *rep.size_Ez;
    int kp = *rep.kappa_paper;

    rep.C = Rational{cross, qd};
    // qC/(C+kappa) = q|E||Ez| / (|E||Ez| + kappa q^d); follows from the
    // verified bound through the Cauchy-Schwarz chain, so it is asserted
    rep.guarantee_derived =
        Rational{static_cast<u128>(q) * cross, cross + static_cast<u128>(kp) * qd};
    rep.flags["derived_guarantee"] = int_ge_rational(*rep.support_size, *rep.guarantee_derived);

    // q*kappa*C/(kappa*C+1): stated, not derivable from the displayed bound;
    // recorded as an observation only
    rep.guarantee_paper_stated = Rational{static_cast<u128>(q) * kp * cross,
                                          static_cast<u128>(kp) * cross + qd};
    rep.observed["paper_guarantee"] =
        int_ge_rational(*rep.support_size, *rep.guarantee_paper_stated);
    rep.observed["derived_guarantee_excl_zero"] =
        int_ge_rational(*rep.support_size_excl_zero, *rep.guarantee_derived);
    return rep;
}

} // namespace

DiagnosticsReport theorem_check_distpinned(const PointSet& E, PinSpec pin) {
    return theorem_check_pinned(E, pin, Metric::distance);
}

DiagnosticsReport theorem_check_dot(const PointSet& E, PinSpec pin) {
    return theorem_check_pinned(E, pin, Metric::dot);
}

bool is_product_set(const PointSet& E) {
    if (E.empty_set()) return false;
    std::vector<std::vector<Fe>> factors;
    factors.reserve(E.d());
    u64 expect = 1;
    for (std::uint32_t j = 1; j <= E.d(); ++j) {
        factors.push_back(valid_pins(E, j));
        expect *= factors.back().size();
    }
    if (expect != E.size()) return false;
    return E == PointSet::product(E.field(), factors);
}

std::pair<PinSpec, DiagnosticsReport> best_slice(const PointSet& E) {
    if (E.empty_set()) throw FqError(Errc::EmptySet, "best_slice of an empty set");
    std::uint32_t d = E.d();
    u64 q = E.field()->q();

    std::uint32_t best_j = 1;
    u64 best_proj = 0;
    for (std::uint32_t j = 1; j <= d; ++j) {
        // |pi_j(E)| is the slice size for every z; count distinct keys
        u64 stride = 1;
        for (std::uint32_t i = 0; i + 1 < j; ++i) stride *= q;
        std::unordered_map<u64, bool> seen;
        seen.reserve(E.size() * 2);
        E.for_each_index([&](u64 idx) {
            Fe digit = static_cast<Fe>(idx / stride % q);
            seen.emplace(idx - static_cast<u64>(digit) * stride, true);
        });
        if (seen.size() > best_proj) {
            best_proj = seen.size();
            best_j = j;
        }
    }
    PinSpec pin{best_j, valid_pins(E, best_j).front()};
    DiagnosticsReport rep = theorem_check_distpinned(E, pin);
    rep.check = "best_slice";

    // pigeonhole: |Ez|^d >= |E|^{d-1}, guaranteed for product sets
    u128 lhs = 1, rhs = 1;
    for (std::uint32_t i = 0; i < d; ++i) lhs *= *rep.size_Ez;
    for (std::uint32_t i = 0; i + 1 < d; ++i) rhs *= rep.size_E;
    if (is_product_set(E))
        rep.flags["pigeonhole"] = lhs >= rhs;
    else
        rep.observed["pigeonhole"] = lhs >= rhs;
    return {pin, rep};
}

DiagnosticsReport check_sumproduct(const PointSet& A) {
    if (A.d() != 1) throw FqError(Errc::BadDimension, "sum-product check needs d = 1");
    const Field& f = *A.field();
    u64 q = f.q();
    u64 na = A.size();

    DiagnosticsReport rep;
    rep.check = "sumproduct";
    fill_context(rep, A);

    std::vector<Fe> S = aa_plus_aa(A);
    rep.support_size = S.size();
    std::vector<bool> in_s(q, false);
    for (Fe v : S) in_s[v] = true;

    // cover premise |A| > q^{3/4}, compared as |A|^4 > q^3
    bool premise_cover = static_cast<u128>(na) * na * na * na > static_cast<u128>(q) * q * q;
    rep.observed["cover_premise"] = premise_cover;
    bool covers = true;
    for (u64 t = 1; t < q; ++t)
        if (!in_s[t]) covers = false;
    rep.observed["covers_fq_star"] = covers;
    if (premise_cover) rep.flags["fq_star_cover"] = covers;

    // size bound with the largest admissible size constant:
    // |A.A+A.A| >= q|A|^3 / (q^2 + |A|^3)
    u128 a3 = static_cast<u128>(na) * na * na;
    rep.guarantee_derived = Rational{static_cast<u128>(q) * a3, static_cast<u128>(q) * q + a3};
    rep.flags["size_bound"] = int_ge_rational(S.size(), *rep.guarantee_derived);
    return rep;
}

DiagnosticsReport check_ir_threshold(const PointSet& E) {
    if (E.empty_set()) throw FqError(Errc::EmptySet, "threshold check needs a nonempty set");
    const Field& f = *E.field();
    DiagnosticsReport rep;
    rep.check = "ir";
    fill_context(rep, E);

    Spectrum s = distance_spectrum(E, E);
    fill_moments(rep, s, E.size(), E.size());

    // |E| >= 4 q^{(d+1)/2}  <=>  |E|^2 >= 16 q^{d+1}
    u128 lhs = static_cast<u128>(E.size()) * E.size();
    u128 rhs = 16 * u128_pow(f.q(), E.d() + 1);
    bool premise = lhs >= rhs;
    rep.observed["threshold_premise"] = premise;
    bool full = *rep.support_size == f.q();
    rep.observed["delta_is_fq"] = full;
    if (premise) rep.flags["delta_full"] = full;
    return rep;
}

} // namespace fqdist
