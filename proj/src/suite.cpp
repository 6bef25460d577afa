#include "fqdist/suite.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fqdist/rng.hpp"

namespace fqdist {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

const std::vector<std::uint32_t> kPrimePowersTo49 = {2,  3,  4,  5,  7,  8,  9,  11,
                                                     13, 16, 17, 19, 23, 25, 27, 29,
                                                     31, 32, 37, 41, 43, 47, 49};

FieldRef field_for_q(std::uint32_t q) {
    auto [p, k] = factor_prime_power(q);
    return make_field(p, k);
}

/// smallest n with n^2 >= 16 q^3, i.e. ceil(4 q^{3/2}) computed exactly
u64 ir_threshold_size(std::uint32_t q) {
    u64 target = 16ull * q * q * q;
    u64 r = isqrt_u64(target);
    return r * r >= target ? r : r + 1;
}

// ---- criteria ---------------------------------------------------------------

CriterionResult criterion_full_space(double limit_s) {
    CriterionResult cr{1, "full_space_degenerate", true, 0, 0, "", 0.0};
    auto t0 = Clock::now();
    std::ostringstream detail;
    for (std::uint32_t q : {3u, 5u, 7u, 9u, 13u}) {
        for (std::uint32_t d : {2u, 3u}) {
            FieldRef f = field_for_q(q);
            PointSet E = PointSet::full_space(f, d);
            u64 ds = support(distance_spectrum(E, E)).size();
            ++cr.instances;
            if (ds != q) {
                ++cr.failures;
                detail << " q=" << q << ";d=" << d << ";delta=" << ds;
            }
        }
    }
    cr.seconds = seconds_since(t0);
    if (cr.seconds >= limit_s) {
        cr.pass = false;
        detail << " over time limit";
    }
    if (cr.failures > 0) cr.pass = false;
    cr.detail = detail.str();
    return cr;
}

CriterionResult criterion_isotropic_line(double limit_s) {
    CriterionResult cr{2, "isotropic_line", true, 0, 0, "", 0.0};
    auto t0 = Clock::now();
    std::ostringstream detail;
    for (std::uint32_t q : kPrimePowersTo49) {
        if (q % 4 == 1) {
            FieldRef f = field_for_q(q);
            PointSet Z = PointSet::isotropic_line(f);
            auto delta = support(distance_spectrum(Z, Z));
            auto delta_nz = support(distance_spectrum(Z, Z), true);
            ++cr.instances;
            if (!(delta == std::vector<Fe>{0} && delta_nz.empty() && Z.size() == q)) {
                ++cr.failures;
                detail << " q=" << q << ";delta_not_zero";
            }
        } else if (q % 4 == 3) {
            FieldRef f = field_for_q(q);
            ++cr.instances;
            if (f->sqrt_minus_one().has_value()) {
                ++cr.failures;
                detail << " q=" << q << ";unexpected_i";
            }
        }
    }
    cr.seconds = seconds_since(t0);
    if (cr.seconds >= limit_s) {
        cr.pass = false;
        detail << " over time limit";
    }
    if (cr.failures > 0) cr.pass = false;
    cr.detail = detail.str();
    return cr;
}

CriterionResult criterion_orthogonality() {
    CriterionResult cr{3, "character_orthogonality", true, 0, 0, "", 0.0};
    auto t0 = Clock::now();
    std::ostringstream detail;
    double worst = 0.0;
    for (std::uint32_t q : kPrimePowersTo49) {
        FieldRef f = field_for_q(q);
        ++cr.instances;
        bool ok = true;
        for (Fe s = 0; s < q; ++s) {
            std::complex<double> sum = 0.0;
            for (Fe x = 0; x < q; ++x) sum += f->chi(f->mul(s, x));
            double mag = std::abs(sum);
            if (s == 0) {
                if (std::abs(mag - q) > 1e-9) ok = false;
            } else {
                worst = std::max(worst, mag);
                if (mag >= 1e-9) ok = false;
            }
        }
        if (!ok) {
            ++cr.failures;
            detail << " q=" << q;
        }
    }
    cr.seconds = seconds_since(t0);
    if (cr.failures > 0) cr.pass = false;
    cr.detail = "max_offchar_sum=" + double_to_string(worst) + detail.str();
    return cr;
}

struct BatteryOutcome {
    CriterionResult identity;   // criterion 4
    CriterionResult bounds;     // criterion 5
    CriterionResult guarantees; // criterion 6
    std::vector<std::string> kappa_rows;
};

BatteryOutcome run_instance_battery(u64 seed) {
    BatteryOutcome out;
    out.identity = {4, "second_moment_identity", true, 0, 0, "", 0.0};
    out.bounds = {5, "second_moment_bounds", true, 0, 0, "", 0.0};
    out.guarantees = {6, "derived_guarantees", true, 0, 0, "", 0.0};
    std::ostringstream d4, d5, d6;

    u64 counter = 0;
    for (std::uint32_t q : {5u, 7u, 9u, 13u}) {
        FieldRef f = field_for_q(q);
        for (std::uint32_t d : {2u, 3u}) {
            u64 universe = 1;
            for (std::uint32_t i = 0; i < d; ++i) universe *= q;
            u64 sizes[3] = {q, isqrt_u64(static_cast<u64>(q) * q * q), static_cast<u64>(q) * q};
            for (u64 n_raw : sizes) {
                u64 n = std::min(n_raw, universe);
                for (int rep = 0; rep < 3; ++rep) {
                    u64 inst_seed = SplitMix64::derive(seed, ++counter);
                    PointSet E = PointSet::random(f, d, n, inst_seed);
                    SplitMix64 rng(SplitMix64::derive(inst_seed, 0x9));
                    std::uint32_t j = 1 + static_cast<std::uint32_t>(rng.below(d));
                    auto pins = valid_pins(E, j);
                    Fe z = pins[rng.below(pins.size())];
                    Fe z_dot = 0;
                    for (Fe cand : pins)
                        if (cand != 0) {
                            z_dot = cand;
                            break;
                        }
                    if (z_dot == 0) z_dot = 1; // any z is admissible, valid pin or not

                    // criterion 4: expansion identity, both metrics
                    for (Metric m : {Metric::distance, Metric::dot}) {
                        Fe zz = m == Metric::dot ? z_dot : z;
                        auto t0 = Clock::now();
                        ++out.identity.instances;
                        try {
                            DiagnosticsReport rep_id = second_moment_identity(E, {j, zz}, m);
                            if (!rep_id.flags.at("identity") || !rep_id.flags.at("r_nonneg")) {
                                ++out.identity.failures;
                                d4 << " q=" << q << ";d=" << d << ";n=" << n << ";" << metric_name(m);
                            }
                        } catch (const FqError& e) {
                            ++out.identity.failures;
                            d4 << " q=" << q << ";d=" << d << ";" << e.what();
                        }
                        out.identity.seconds += seconds_since(t0);
                    }

                    // criteria 5 and 6: exact bound, kappa_emp, guarantees
                    for (Metric m : {Metric::distance, Metric::dot}) {
                        Fe zz = m == Metric::dot ? z_dot : z;
                        auto t0 = Clock::now();
                        ++out.bounds.instances;
                        ++out.guarantees.instances;
                        try {
                            DiagnosticsReport rb = m == Metric::distance
                                                       ? theorem_check_distpinned(E, {j, zz})
                                                       : theorem_check_dot(E, {j, zz});
                            bool bound_ok = rb.flags.at("second_moment_bound_paper") &&
                                            rb.flags.at("second_moment_bound_tight") &&
                                            rb.flags.at("b_bound") &&
                                            (m == Metric::dot || rb.flags.at("a_bound"));
                            if (!bound_ok) {
                                ++out.bounds.failures;
                                d5 << " q=" << q << ";d=" << d << ";" << metric_name(m);
                            }
                            if (!rb.flags.at("derived_guarantee")) {
                                ++out.guarantees.failures;
                                d6 << " q=" << q << ";d=" << d << ";" << metric_name(m);
                            }
                            std::ostringstream row;
                            row << metric_name(m) << ',' << q << ',' << d << ',' << rb.size_E << ','
                                << *rb.size_Ez << ',' << j << ',' << zz << ','
                                << double_to_string(*rb.kappa_emp) << ','
                                << (rb.flags.at("derived_guarantee") ? 1 : 0) << ','
                                << (rb.observed.at("paper_guarantee") ? 1 : 0);
                            out.kappa_rows.push_back(row.str());
                        } catch (const FqError& e) {
                            ++out.bounds.failures;
                            ++out.guarantees.failures;
                            d5 << " q=" << q << ";d=" << d << ";" << e.what();
                        }
                        double dt = seconds_since(t0);
                        out.bounds.seconds += dt / 2;
                        out.guarantees.seconds += dt / 2;
                    }
                }
            }
        }
    }
    if (out.identity.failures > 0 || out.identity.seconds >= 60.0) out.identity.pass = false;
    if (out.identity.seconds >= 60.0) d4 << " over time limit";
    if (out.bounds.failures > 0) out.bounds.pass = false;
    if (out.guarantees.failures > 0) out.guarantees.pass = false;
    out.identity.detail = d4.str();
    out.bounds.detail = d5.str();
    out.guarantees.detail = d6.str();
    return out;
}

CriterionResult criterion_corollary_pipeline(u64 seed) {
    CriterionResult cr{7, "product_pigeonhole_containment", true, 0, 0, "", 0.0};
    auto t0 = Clock::now();
    std::ostringstream detail;
    const std::uint32_t qs[] = {5, 7, 9, 13, 25};
    for (int i = 0; i < 50; ++i) {
        std::uint32_t q = qs[i % 5];
        std::uint32_t d = 2 + (i / 5) % 2;
        FieldRef f = field_for_q(q);
        SplitMix64 rng(SplitMix64::derive(seed, 700 + i));
        std::vector<std::vector<Fe>> factors;
        for (std::uint32_t c = 0; c < d; ++c) {
            u64 sz = 2 + rng.below(std::min<u64>(q - 1, 5));
            std::vector<bool> in(q, false);
            for (u64 j = q - sz; j < q; ++j) {
                u64 t = rng.below(j + 1);
                if (in[t])
                    in[j] = true;
                else
                    in[t] = true;
            }
            std::vector<Fe> fac;
            for (Fe v = 0; v < q; ++v)
                if (in[v]) fac.push_back(v);
            factors.push_back(std::move(fac));
        }
        PointSet E = PointSet::product(f, factors);
        ++cr.instances;
        try {
            auto [pin, rep] = best_slice(E);
            bool pigeon = rep.flags.count("pigeonhole") && rep.flags.at("pigeonhole");
            auto pinned = pinned_distance_set(E, pin);
            auto delta = support(distance_spectrum(E, E));
            bool contained = std::includes(delta.begin(), delta.end(), pinned.begin(), pinned.end());
            if (!pigeon || !contained) {
                ++cr.failures;
                detail << " q=" << q << ";d=" << d << (pigeon ? "" : ":pigeonhole")
                       << (contained ? "" : ":containment");
            }
        } catch (const FqError& e) {
            ++cr.failures;
            detail << " q=" << q << ";d=" << d << ";" << e.what();
        }
    }
    cr.seconds = seconds_since(t0);
    if (cr.failures > 0) cr.pass = false;
    cr.detail = detail.str();
    return cr;
}

CriterionResult criterion_ir_threshold(u64 seed) {
    CriterionResult cr{8, "ir_threshold_full_delta", true, 0, 0, "", 0.0};
    auto t0 = Clock::now();
    std::ostringstream detail;
    for (std::uint32_t q : {17u, 25u, 29u}) {
        FieldRef f = field_for_q(q);
        u64 n = ir_threshold_size(q);
        for (int rep = 0; rep < 10; ++rep) {
            u64 inst_seed = SplitMix64::derive(seed, 800 + q * 16 + rep);
            PointSet E = PointSet::random(f, 2, n, inst_seed);
            ++cr.instances;
            DiagnosticsReport r = check_ir_threshold(E);
            bool ok = r.observed.at("threshold_premise") && r.flags.count("delta_full") &&
                      r.flags.at("delta_full");
            if (!ok) {
                ++cr.failures;
                detail << " q=" << q << ";rep=" << rep;
            }
        }
    }
    cr.seconds = seconds_since(t0);
    if (cr.failures > 0) cr.pass = false;
    cr.detail = detail.str();
    return cr;
}

CriterionResult criterion_sumproduct(u64 seed, double limit_s) {
    CriterionResult cr{9, "sum_product_coverage", true, 0, 0, "", 0.0};
    auto t0 = Clock::now();
    std::ostringstream detail;
    FieldRef f = field_for_q(101);
    for (int rep = 0; rep < 20; ++rep) {
        u64 inst_seed = SplitMix64::derive(seed, 900 + rep);
        PointSet A = PointSet::random(f, 1, 33, inst_seed);
        ++cr.instances;
        DiagnosticsReport r = check_sumproduct(A);
        bool ok = r.observed.at("cover_premise") && r.flags.count("fq_star_cover") &&
                  r.flags.at("fq_star_cover") && r.flags.at("size_bound");
        if (!ok) {
            ++cr.failures;
            detail << " rep=" << rep;
        }
    }
    cr.seconds = seconds_since(t0);
    if (cr.seconds >= limit_s) {
        cr.pass = false;
        detail << " over time limit";
    }
    if (cr.failures > 0) cr.pass = false;
    cr.detail = detail.str();
    return cr;
}

CriterionResult criterion_engine_equivalence(u64 seed) {
    CriterionResult cr{10, "engine_equivalence", true, 0, 0, "", 0.0};
    auto t0 = Clock::now();
    std::ostringstream detail;
    const std::pair<std::uint32_t, std::uint32_t> combos[] = {
        {3, 2}, {3, 3}, {4, 2}, {4, 3}, {5, 2}, {5, 3},  {7, 2},  {7, 3},  {8, 2},
        {9, 2}, {9, 3}, {13, 2}, {13, 3}, {16, 2}, {17, 2}, {25, 2}, {27, 2}, {29, 2}};
    int i = 0;
    while (cr.instances < 200) {
        auto [q, d] = combos[i % (sizeof(combos) / sizeof(combos[0]))];
        ++i;
        FieldRef f = field_for_q(q);
        u64 universe = 1;
        for (std::uint32_t c = 0; c < d; ++c) universe *= q;
        SplitMix64 rng(SplitMix64::derive(seed, 1000 + i));
        u64 nf = 1 + rng.below(std::min<u64>(universe, 400));
        u64 ne = 1 + rng.below(std::min<u64>(universe, 400));
        PointSet F = PointSet::random(f, d, nf, rng.next());
        PointSet E = PointSet::random(f, d, ne, rng.next());
        Spectrum direct = distance_spectrum(F, E, Engine::direct);
        Spectrum conv = distance_spectrum(F, E, Engine::conv);
        ++cr.instances;
        if (direct.counts != conv.counts) {
            ++cr.failures;
            detail << " q=" << q << ";d=" << d << ";i=" << i;
        }
    }
    cr.seconds = seconds_since(t0);
    if (cr.failures > 0) cr.pass = false;
    cr.detail = detail.str();
    return cr;
}

} // namespace

std::vector<CriterionResult> run_paper_suite(u64 seed, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::vector<CriterionResult> results;

    results.push_back(criterion_full_space(5.0));
    results.push_back(criterion_isotropic_line(1.0));
    results.push_back(criterion_orthogonality());

    BatteryOutcome battery = run_instance_battery(seed);
    results.push_back(battery.identity);
    results.push_back(battery.bounds);
    results.push_back(battery.guarantees);

    results.push_back(criterion_corollary_pipeline(seed));
    results.push_back(criterion_ir_threshold(seed));
    results.push_back(criterion_sumproduct(seed, 10.0));
    results.push_back(criterion_engine_equivalence(seed));

    {
        std::ofstream kcsv(out_dir + "/kappa_emp.csv", std::ios::binary | std::ios::trunc);
        kcsv << "metric,q,d,size_E,size_Ez,pin_j,pin_z,kappa_emp,derived_guarantee,"
                "paper_guarantee_observed\n";
        for (const auto& row : battery.kappa_rows) kcsv << row << '\n';
    }
    {
        std::ofstream rcsv(out_dir + "/results.csv", std::ios::binary | std::ios::trunc);
        rcsv << "criterion,name,pass,instances,failures,detail\n";
        for (const auto& r : results)
            rcsv << r.index << ',' << r.name << ',' << (r.pass ? 1 : 0) << ',' << r.instances
                 << ',' << r.failures << ',' << r.detail << '\n';
    }
    return results;
}

} // namespace fqdist
