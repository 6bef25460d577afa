#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "fqdist/harness.hpp"
#include "fqdist/suite.hpp"

namespace {

using namespace fqdist;

constexpr int kExitOk = 0;
constexpr int kExitOperational = 1;
constexpr int kExitAssertion = 2;
constexpr int kExitUsage = 64;

FieldRef field_from_flags(std::uint32_t q, std::uint32_t p, std::uint32_t k) {
    if (q != 0) {
        auto [pp, kk] = factor_prime_power(q);
        return make_field(pp, kk);
    }
    if (p == 0) throw FqError(Errc::BadConfig, "pass --q or --p/--k");
    return make_field(p, k == 0 ? 1 : k);
}

std::string fe_list(const std::vector<Fe>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    return out + "]";
}

std::vector<std::vector<Fe>> parse_factors(const std::string& text) {
    std::vector<std::vector<Fe>> out;
    for (const std::string& group : split_char(text, '|')) {
        std::vector<Fe> fac;
        for (const std::string& v : split_char(group, ','))
            if (!v.empty()) fac.push_back(static_cast<Fe>(std::stoul(v)));
        out.push_back(std::move(fac));
    }
    return out;
}

PointSet generate_from_flags(const std::string& kind, FieldRef field, std::uint32_t d, u64 n,
                             u64 seed, const std::string& factors, Fe sphere_t, std::uint32_t grid_m) {
    if (kind == "random") return PointSet::random(field, d, n, seed);
    if (kind == "line") return PointSet::isotropic_line(field);
    if (kind == "full") return PointSet::full_space(field, d);
    if (kind == "sphere") return PointSet::sphere(field, d, sphere_t);
    if (kind == "grid") return PointSet::interval_grid(field, d, grid_m);
    if (kind == "product") {
        if (factors.empty()) throw FqError(Errc::BadConfig, "--factors required for product");
        return PointSet::product(field, parse_factors(factors));
    }
    throw FqError(Errc::BadConfig, "unknown kind '" + kind + "'");
}

void print_report(const DiagnosticsReport& r, bool as_json) {
    if (as_json) {
        std::cout << r.to_json_string() << "\n";
        return;
    }
    std::cout << "check = " << r.check << "\n";
    std::cout << "metric = " << metric_name(r.metric) << "\n";
    std::cout << "q = " << r.q << "  d = " << r.d << "  |E| = " << r.size_E;
    if (r.size_Ez) std::cout << "  |Ez| = " << *r.size_Ez;
    std::cout << "\n";
    if (r.pin_j)
        std::cout << "pin = (" << *r.pin_j << "," << *r.pin_z << ") valid=" << (*r.pin_valid ? "yes" : "no")
                  << "\n";
    if (r.first_moment) std::cout << "sum_nu = " << *r.first_moment << "\n";
    if (r.second_moment) std::cout << "sum_nu2 = " << u128_to_string(*r.second_moment) << "\n";
    if (r.support_size)
        std::cout << "support_size = " << *r.support_size
                  << " (excl zero: " << *r.support_size_excl_zero << ")\n";
    if (r.cs_lower_bound) std::cout << "cs_lower_bound = " << u128_to_string(*r.cs_lower_bound) << "\n";
    if (r.main_term) std::cout << "main_term = " << r.main_term->str() << "\n";
    if (r.R_term) std::cout << "R_term = " << double_to_string(*r.R_term) << "\n";
    if (r.residual) std::cout << "residual = " << double_to_string(*r.residual) << "\n";
    if (r.A_term) std::cout << "A_term = " << u128_to_string(*r.A_term) << "\n";
    if (r.B_term) std::cout << "B_term = " << u128_to_string(*r.B_term) << "\n";
    if (r.kappa_paper) std::cout << "kappa_paper = " << *r.kappa_paper << "\n";
    if (r.kappa_emp) std::cout << "kappa_emp = " << double_to_string(*r.kappa_emp) << "\n";
    if (r.C) std::cout << "C = " << r.C->str() << "\n";
    if (r.guarantee_derived) std::cout << "guarantee_derived = " << r.guarantee_derived->str() << "\n";
    if (r.guarantee_paper_stated)
        std::cout << "guarantee_paper_stated = " << r.guarantee_paper_stated->str() << "\n";
    for (const auto& [name, ok] : r.flags)
        std::cout << "flag " << name << " = " << (ok ? "pass" : "FAIL") << "\n";
    for (const auto& [name, ok] : r.observed)
        std::cout << "observed " << name << " = " << (ok ? "holds" : "does not hold") << "\n";
    std::cout << (r.passed() ? "PASS" : "FAIL") << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"distance-set and sum-product verification over finite fields"};
    app.require_subcommand(1);

    // field-info
    auto* cmd_fi = app.add_subcommand("field-info", "canonical field parameters");
    std::uint32_t fi_p = 0, fi_k = 1, fi_q = 0;
    bool fi_json = false;
    cmd_fi->add_option("--p", fi_p);
    cmd_fi->add_option("--k", fi_k);
    cmd_fi->add_option("--q", fi_q);
    cmd_fi->add_flag("--json", fi_json);

    // gen
    auto* cmd_gen = app.add_subcommand("gen", "generate a point set");
    std::string gen_kind = "random", gen_out, gen_factors;
    std::uint32_t gen_q = 0, gen_p = 0, gen_k = 0, gen_d = 2, gen_m = 2;
    u64 gen_n = 0, gen_seed = 0;
    Fe gen_t = 1;
    cmd_gen->add_option("--kind", gen_kind, "random|product|line|sphere|full|grid");
    cmd_gen->add_option("--q", gen_q);
    cmd_gen->add_option("--p", gen_p);
    cmd_gen->add_option("--k", gen_k);
    cmd_gen->add_option("--d", gen_d);
    cmd_gen->add_option("--n", gen_n);
    cmd_gen->add_option("--seed", gen_seed);
    cmd_gen->add_option("--factors", gen_factors, "product factors, e.g. 0,1|0,2,4");
    cmd_gen->add_option("--t", gen_t, "sphere radius value");
    cmd_gen->add_option("--m", gen_m, "grid side");
    cmd_gen->add_option("--out", gen_out)->required();

    // spectrum
    auto* cmd_sp = app.add_subcommand("spectrum", "incidence spectrum CSV");
    std::string sp_in, sp_in2, sp_metric = "distance", sp_engine = "direct", sp_out, sp_seed;
    cmd_sp->add_option("--in", sp_in)->required();
    cmd_sp->add_option("--in2", sp_in2, "second set (defaults to --in)");
    cmd_sp->add_option("--metric", sp_metric);
    cmd_sp->add_option("--engine", sp_engine);
    cmd_sp->add_option("--seed", sp_seed, "provenance note for the header comment");
    cmd_sp->add_option("--out", sp_out, "output CSV path (stdout if omitted)");

    // delta
    auto* cmd_delta = app.add_subcommand("delta", "distance set support");
    std::string dl_in, dl_gen;
    std::uint32_t dl_q = 0, dl_d = 2;
    bool dl_exclude_zero = false;
    cmd_delta->add_option("--in", dl_in);
    cmd_delta->add_option("--gen", dl_gen, "inline generator kind (full|line|grid)");
    cmd_delta->add_option("--q", dl_q);
    cmd_delta->add_option("--d", dl_d);
    cmd_delta->add_flag("--exclude-zero", dl_exclude_zero);

    // pins
    auto* cmd_pins = app.add_subcommand("pins", "valid pin values of a coordinate");
    std::string pins_in;
    std::uint32_t pins_j = 1;
    cmd_pins->add_option("--in", pins_in)->required();
    cmd_pins->add_option("--j", pins_j)->required();

    // verify
    auto* cmd_v = app.add_subcommand("verify", "run a check or the full suite");
    std::string v_check, v_suite, v_in, v_pin, v_metric = "distance", v_out = "paper_suite_out";
    u64 v_seed = 7;
    bool v_json = false;
    cmd_v->add_option("--check", v_check, "cs|identity|bound|distpinned|dot|sumproduct|ir|best_slice");
    cmd_v->add_option("--suite", v_suite, "'paper' runs the acceptance battery");
    cmd_v->add_option("--in", v_in);
    cmd_v->add_option("--pin", v_pin, "J,Z");
    cmd_v->add_option("--metric", v_metric);
    cmd_v->add_option("--seed", v_seed);
    cmd_v->add_option("--out", v_out, "suite output directory");
    cmd_v->add_flag("--json", v_json);

    // sweep
    auto* cmd_sw = app.add_subcommand("sweep", "run an experiment sweep");
    std::string sw_config, sw_out;
    bool sw_jsonl = false, sw_stamp = false;
    cmd_sw->add_option("--config", sw_config)->required();
    cmd_sw->add_option("--out", sw_out)->required();
    cmd_sw->add_flag("--jsonl", sw_jsonl, "also write a JSON-lines mirror");
    cmd_sw->add_flag("--timestamps", sw_stamp, "stamp rows with wall time (breaks determinism)");

    // search
    auto* cmd_se = app.add_subcommand("search", "hill-climb for small distance sets");
    std::uint32_t se_q = 0, se_d = 2;
    u64 se_size = 4, se_steps = 1000, se_seed = 0;
    unsigned se_restarts = 1;
    std::string se_out;
    cmd_se->add_option("--q", se_q)->required();
    cmd_se->add_option("--d", se_d);
    cmd_se->add_option("--size", se_size);
    cmd_se->add_option("--steps", se_steps);
    cmd_se->add_option("--seed", se_seed);
    cmd_se->add_option("--restarts", se_restarts);
    cmd_se->add_option("--out", se_out, "write the best set found");

    // fmt-convert
    auto* cmd_fc = app.add_subcommand("fmt-convert", "convert between .fqset and JSON-lines");
    std::string fc_in, fc_out;
    cmd_fc->add_option("--in", fc_in)->required();
    cmd_fc->add_option("--out", fc_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*cmd_fi) {
            FieldRef f = field_from_flags(fi_q, fi_p, fi_k);
            if (fi_json) {
                std::cout << "{\"p\":" << f->p() << ",\"k\":" << f->k() << ",\"q\":" << f->q()
                          << ",\"modulus_value\":" << f->modulus_value() << ",\"modulus\":\""
                          << f->modulus_string() << "\"}\n";
            } else {
                std::cout << "q=" << f->q() << " p=" << f->p() << " k=" << f->k()
                          << " modulus=" << f->modulus_string() << "\n";
            }
            return kExitOk;
        }

        if (*cmd_gen) {
            FieldRef f = field_from_flags(gen_q, gen_p, gen_k);
            PointSet E = generate_from_flags(gen_kind, f, gen_d, gen_n, gen_seed, gen_factors,
                                             gen_t, gen_m);
            save_pointset(E, gen_out);
            std::cout << "wrote " << E.size() << " points to " << gen_out << "\n";
            return kExitOk;
        }

        if (*cmd_sp) {
            PointSet F = load_pointset(sp_in);
            PointSet E = sp_in2.empty() ? F : load_pointset(sp_in2);
            Metric m = metric_from_string(sp_metric);
            Engine eng = engine_from_string(sp_engine);
            Spectrum s = m == Metric::distance ? distance_spectrum(F, E, eng) : dot_spectrum(F, E);
            std::ostringstream out;
            const Field& fld = *F.field();
            out << "# fqdist spectrum p=" << fld.p() << " k=" << fld.k() << " d=" << F.d()
                << " size_F=" << F.size() << " size_E=" << E.size() << " metric=" << sp_metric
                << " engine=" << engine_name(eng) << " seed=" << sp_seed << "\n";
            out << "t,count\n";
            for (std::uint32_t t = 0; t < fld.q(); ++t) out << t << ',' << s.counts[t] << '\n';
            if (sp_out.empty()) {
                std::cout << out.str();
            } else {
                std::ofstream of(sp_out, std::ios::binary | std::ios::trunc);
                of << out.str();
            }
            return kExitOk;
        }

        if (*cmd_delta) {
            PointSet E = [&] {
                if (!dl_in.empty()) return load_pointset(dl_in);
                if (dl_gen.empty())
                    throw FqError(Errc::BadConfig, "pass --in or --gen");
                FieldRef f = field_from_flags(dl_q, 0, 0);
                return generate_from_flags(dl_gen, f, dl_d, 0, 0, "", 1, 2);
            }();
            auto delta = support(distance_spectrum(E, E), dl_exclude_zero);
            std::cout << "support_size=" << delta.size() << " support=" << fe_list(delta) << "\n";
            return kExitOk;
        }

        if (*cmd_pins) {
            PointSet E = load_pointset(pins_in);
            auto pins = valid_pins(E, pins_j);
            std::cout << "valid_pins=" << fe_list(pins) << "\n";
            return kExitOk;
        }

        if (*cmd_v) {
            if (!v_suite.empty()) {
                if (v_suite != "paper") throw FqError(Errc::BadConfig, "unknown suite '" + v_suite + "'");
                auto results = run_paper_suite(v_seed, v_out);
                bool all = true;
                for (const auto& r : results) {
                    std::printf("%s criterion %d %s (%.2fs)%s%s\n", r.pass ? "PASS" : "FAIL",
                                r.index, r.name.c_str(), r.seconds, r.detail.empty() ? "" : " ",
                                r.detail.c_str());
                    all = all && r.pass;
                }
                std::cout << (all ? "suite PASS" : "suite FAIL") << "\n";
                return all ? kExitOk : kExitAssertion;
            }
            if (v_check.empty()) throw FqError(Errc::BadConfig, "pass --check or --suite");
            if (v_in.empty()) throw FqError(Errc::BadConfig, "--in required for --check");
            PointSet E = load_pointset(v_in);
            PinSpec pin{1, 0};
            if (!v_pin.empty()) {
                auto parts = split_char(v_pin, ',');
                if (parts.size() != 2) throw FqError(Errc::BadConfig, "--pin expects J,Z");
                pin.j = static_cast<std::uint32_t>(std::stoul(parts[0]));
                pin.z = static_cast<Fe>(std::stoul(parts[1]));
            }
            Metric m = metric_from_string(v_metric);
            DiagnosticsReport rep;
            if (v_check == "cs")
                rep = cs_chain(E, E, m);
            else if (v_check == "identity")
                rep = second_moment_identity(E, pin, m);
            else if (v_check == "bound")
                rep = second_moment_bound(E, pin, m);
            else if (v_check == "distpinned")
                rep = theorem_check_distpinned(E, pin);
            else if (v_check == "dot")
                rep = theorem_check_dot(E, pin);
            else if (v_check == "sumproduct")
                rep = check_sumproduct(E);
            else if (v_check == "ir")
                rep = check_ir_threshold(E);
            else if (v_check == "best_slice")
                rep = best_slice(E).second;
            else
                throw FqError(Errc::BadConfig, "unknown check '" + v_check + "'");
            print_report(rep, v_json);
            return rep.passed() ? kExitOk : kExitAssertion;
        }

        if (*cmd_sw) {
            ExperimentConfig cfg = ExperimentConfig::parse_file(sw_config);
            SweepStats st = sweep(cfg, sw_out, sw_jsonl, sw_stamp);
            std::cout << "cells=" << st.cells << " rows_written=" << st.rows_written
                      << " rows_skipped=" << st.rows_skipped << " failures=" << st.failures
                      << "\n";
            return st.failures == 0 ? kExitOk : kExitAssertion;
        }

        if (*cmd_se) {
            FieldRef f = field_from_flags(se_q, 0, 0);
            SearchResult res = search_extremal(f, se_d, se_size, se_steps, se_seed, se_restarts);
            std::cout << "delta_size=" << res.delta_size << "\n";
            for (auto [step, ds] : res.trail)
                std::cout << "step=" << step << " delta=" << ds << "\n";
            if (!se_out.empty()) save_pointset(res.best, se_out);
            return kExitOk;
        }

        if (*cmd_fc) {
            std::ifstream in(fc_in, std::ios::binary);
            if (!in) throw FqError(Errc::BadHeader, "cannot open " + fc_in);
            std::ostringstream ss;
            ss << in.rdbuf();
            std::string text = ss.str();
            bool from_jsonl = !text.empty() && text[0] == '{';
            PointSet E = from_jsonl ? pointset_from_jsonl(text) : pointset_from_string(text);
            std::ofstream of(fc_out, std::ios::binary | std::ios::trunc);
            bool to_jsonl = fc_out.size() > 6 && fc_out.substr(fc_out.size() - 6) == ".jsonl";
            of << (to_jsonl ? pointset_to_jsonl(E) : pointset_to_string(E));
            std::cout << "converted " << E.size() << " points\n";
            return kExitOk;
        }
    } catch (const FqError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOperational;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOperational;
    }
    return kExitUsage;
}
