#include "fqdist/harness.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "fqdist/rng.hpp"
#include "json.hpp"

namespace fqdist {
namespace {

std::string hex64(u64 v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string read_file(const std::string& path, Errc missing_code) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FqError(missing_code, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FqError(Errc::BadConfig, "cannot write " + path);
    out << text;
}

} // namespace

// ---- point-set files -------------------------------------------------------

std::string pointset_to_string(const PointSet& E) {
    const Field& f = *E.field();
    std::ostringstream out;
    out << "FQSET 1 " << f.p() << ' ' << f.k() << ' ' << f.modulus_value() << ' ' << E.d()
        << ' ' << E.size() << '\n';
    std::uint32_t d = E.d();
    E.for_each_index([&](u64 idx) {
        Point x = E.decode(idx);
        for (std::uint32_t i = 0; i < d; ++i) out << (i ? " " : "") << x[i];
        out << '\n';
    });
    return out.str();
}

PointSet pointset_from_string(const std::string& text) {
    std::istringstream in(text);
    std::string header;
    if (!std::getline(in, header)) throw FqError(Errc::BadHeader, "empty file");
    auto tok = split_ws(header);
    if (tok.size() != 7 || tok[0] != "FQSET" || tok[1] != "1")
        throw FqError(Errc::BadHeader, "expected 'FQSET 1 p k modulus d n'");
    std::uint32_t p, k, d;
    std::uint64_t modulus_value, n;
    try {
        p = static_cast<std::uint32_t>(std::stoul(tok[2]));
        k = static_cast<std::uint32_t>(std::stoul(tok[3]));
        modulus_value = std::stoull(tok[4]);
        d = static_cast<std::uint32_t>(std::stoul(tok[5]));
        n = std::stoull(tok[6]);
    } catch (const std::exception&) {
        throw FqError(Errc::BadHeader, "non-numeric header field");
    }
    if (d < 1) throw FqError(Errc::BadHeader, "d must be >= 1");

    FieldRef field;
    try {
        field = make_field_with_modulus(p, k, modulus_digits_from_value(p, k, modulus_value));
    } catch (const FqError& e) {
        if (e.code() == Errc::BadModulus) throw;
        throw FqError(Errc::BadHeader, e.what());
    }

    std::vector<Point> pts;
    pts.reserve(n);
    std::string line;
    while (std::getline(in, line)) {
        auto parts = split_ws(line);
        if (parts.empty()) continue;
        if (parts.size() != d)
            throw FqError(Errc::SizeMismatch, "point line has wrong arity");
        Point x(d);
        for (std::uint32_t i = 0; i < d; ++i) {
            unsigned long v;
            try {
                v = std::stoul(parts[i]);
            } catch (const std::exception&) {
                throw FqError(Errc::CoordinateOutOfRange, "non-numeric coordinate");
            }
            if (v >= field->q())
                throw FqError(Errc::CoordinateOutOfRange, "coordinate not in [0, q)");
            x[i] = static_cast<Fe>(v);
        }
        pts.push_back(std::move(x));
        if (pts.size() > n) throw FqError(Errc::SizeMismatch, "more points than the header count");
    }
    if (pts.size() != n) throw FqError(Errc::SizeMismatch, "fewer points than the header count");
    PointSet E = PointSet::from_points(field, d, pts);
    if (E.size() != n) throw FqError(Errc::SizeMismatch, "duplicate points in file");
    return E;
}

void save_pointset(const PointSet& E, const std::string& path) {
    write_file(path, pointset_to_string(E));
}

PointSet load_pointset(const std::string& path) {
    return pointset_from_string(read_file(path, Errc::BadHeader));
}

std::string pointset_to_jsonl(const PointSet& E) {
    const Field& f = *E.field();
    std::ostringstream out;
    nlohmann::json head;
    head["fqset"] = 1;
    head["p"] = f.p();
    head["k"] = f.k();
    head["modulus"] = f.modulus();
    head["d"] = E.d();
    head["n"] = E.size();
    out << head.dump() << '\n';
    E.for_each_index([&](u64 idx) {
        nlohmann::json row;
        row["x"] = E.decode(idx);
        out << row.dump() << '\n';
    });
    return out.str();
}

PointSet pointset_from_jsonl(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw FqError(Errc::BadHeader, "empty jsonl");
    nlohmann::json head;
    try {
        head = nlohmann::json::parse(line);
    } catch (const std::exception&) {
        throw FqError(Errc::BadHeader, "bad jsonl header");
    }
    if (!head.contains("fqset") || head["fqset"] != 1)
        throw FqError(Errc::BadHeader, "bad jsonl header");
    std::uint32_t p = head.at("p"), k = head.at("k"), d = head.at("d");
    u64 n = head.at("n");
    std::vector<std::uint32_t> modulus = head.at("modulus");
    FieldRef field;
    try {
        field = make_field_with_modulus(p, k, modulus);
    } catch (const FqError& e) {
        if (e.code() == Errc::BadModulus) throw;
        throw FqError(Errc::BadHeader, e.what());
    }
    std::vector<Point> pts;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
        } catch (const std::exception&) {
            throw FqError(Errc::SizeMismatch, "bad jsonl point row");
        }
        std::vector<std::uint32_t> coords = row.at("x");
        if (coords.size() != d) throw FqError(Errc::SizeMismatch, "point row has wrong arity");
        Point x(d);
        for (std::uint32_t i = 0; i < d; ++i) {
            if (coords[i] >= field->q())
                throw FqError(Errc::CoordinateOutOfRange, "coordinate not in [0, q)");
            x[i] = coords[i];
        }
        pts.push_back(std::move(x));
    }
    if (pts.size() != n) throw FqError(Errc::SizeMismatch, "point count mismatch");
    PointSet E = PointSet::from_points(field, d, pts);
    if (E.size() != n) throw FqError(Errc::SizeMismatch, "duplicate points");
    return E;
}

// ---- config ----------------------------------------------------------------

std::pair<std::uint32_t, std::uint32_t> factor_prime_power(std::uint32_t q) {
    if (q < 2) throw FqError(Errc::NonPrime, "q must be >= 2");
    std::uint32_t p = 0;
    for (std::uint32_t c = 2; static_cast<u64>(c) * c <= q; ++c)
        if (q % c == 0) {
            p = c;
            break;
        }
    if (p == 0) return {q, 1}; // q itself is prime
    std::uint32_t k = 0;
    std::uint32_t rest = q;
    while (rest % p == 0) {
        rest /= p;
        ++k;
    }
    if (rest != 1)
        throw FqError(Errc::NonPrime, std::to_string(q) + " is not a prime power");
    return {p, k};
}

u64 SizeSpec::resolve(std::uint32_t q, u64 universe) const {
    u64 n = power ? static_cast<u64>(std::llround(std::pow(static_cast<double>(q), alpha)))
                  : absolute;
    return std::min(n, universe);
}

namespace {

const std::set<std::string> kKnownChecks = {"cs",  "identity",   "bound", "distpinned",
                                            "dot", "sumproduct", "ir",    "best_slice"};

SizeSpec parse_size_token(const std::string& t) {
    SizeSpec s;
    s.raw = t;
    if (t == "q") {
        s.power = true;
        s.alpha = 1.0;
        return s;
    }
    if (t.rfind("q^", 0) == 0) {
        s.power = true;
        try {
            s.alpha = std::stod(t.substr(2));
        } catch (const std::exception&) {
            throw FqError(Errc::BadConfig, "bad size token '" + t + "'");
        }
        return s;
    }
    try {
        s.absolute = std::stoull(t);
    } catch (const std::exception&) {
        throw FqError(Errc::BadConfig, "bad size token '" + t + "'");
    }
    return s;
}

} // namespace

ExperimentConfig ExperimentConfig::parse_string(const std::string& text) {
    ExperimentConfig cfg;
    cfg.checks.clear();
    std::istringstream in(text);
    std::string line;
    bool saw_sizes = false;
    while (std::getline(in, line)) {
        auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        auto eq = line.find('=');
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (eq == std::string::npos)
            throw FqError(Errc::BadConfig, "expected 'key = value': " + line);
        auto key_toks = split_ws(line.substr(0, eq));
        auto vals = split_ws(line.substr(eq + 1));
        if (key_toks.size() != 1) throw FqError(Errc::BadConfig, "bad key in: " + line);
        const std::string& key = key_toks[0];

        if (key == "fields") {
            for (const auto& v : vals) cfg.qs.push_back(static_cast<std::uint32_t>(std::stoul(v)));
        } else if (key == "dims") {
            for (const auto& v : vals) cfg.dims.push_back(static_cast<std::uint32_t>(std::stoul(v)));
        } else if (key == "family") {
            if (vals.size() != 1) throw FqError(Errc::BadConfig, "family takes one value");
            cfg.family = vals[0];
        } else if (key == "sizes") {
            saw_sizes = true;
            for (const auto& v : vals) cfg.sizes.push_back(parse_size_token(v));
        } else if (key == "pins") {
            if (vals.size() != 1) throw FqError(Errc::BadConfig, "pins takes one value");
            if (vals[0] == "all") {
                cfg.pin_policy = PinPolicy::all;
            } else if (vals[0] == "best") {
                cfg.pin_policy = PinPolicy::best;
            } else {
                auto parts = split_char(vals[0], ',');
                if (parts.size() != 2) throw FqError(Errc::BadConfig, "pins must be all|best|J,Z");
                cfg.pin_policy = PinPolicy::fixed;
                cfg.fixed_pin.j = static_cast<std::uint32_t>(std::stoul(parts[0]));
                cfg.fixed_pin.z = static_cast<Fe>(std::stoul(parts[1]));
            }
        } else if (key == "metric") {
            if (vals.size() != 1) throw FqError(Errc::BadConfig, "metric takes one value");
            cfg.metric = metric_from_string(vals[0]);
        } else if (key == "engine") {
            if (vals.size() != 1) throw FqError(Errc::BadConfig, "engine takes one value");
            cfg.engine = engine_from_string(vals[0]);
        } else if (key == "checks") {
            for (const auto& v : vals) {
                if (!kKnownChecks.count(v)) throw FqError(Errc::BadConfig, "unknown check '" + v + "'");
                cfg.checks.push_back(v);
            }
        } else if (key == "seeds") {
            if (vals.size() != 1) throw FqError(Errc::BadConfig, "seeds takes one value");
            cfg.seeds = std::stoull(vals[0]);
        } else if (key == "seed_base") {
            if (vals.size() != 1) throw FqError(Errc::BadConfig, "seed_base takes one value");
            cfg.seed_base = std::stoull(vals[0]);
        } else if (key == "sphere_t") {
            cfg.sphere_t = static_cast<Fe>(std::stoul(vals.at(0)));
        } else if (key == "grid_m") {
            cfg.grid_m = static_cast<std::uint32_t>(std::stoul(vals.at(0)));
        } else {
            throw FqError(Errc::BadConfig, "unknown key '" + key + "'");
        }
    }
    if (cfg.qs.empty() && cfg.dims.empty() && cfg.checks.empty() && !saw_sizes)
        throw FqError(Errc::BadConfig, "empty config");
    static const std::set<std::string> kFamilies = {"random", "product", "line",
                                                    "sphere", "full",    "grid"};
    if (!kFamilies.count(cfg.family))
        throw FqError(Errc::BadConfig, "unknown family '" + cfg.family + "'");
    for (std::uint32_t q : cfg.qs) factor_prime_power(q); // validate early
    if (cfg.family == "line")
        for (std::uint32_t d : cfg.dims)
            if (d != 2) throw FqError(Errc::BadConfig, "family line needs dims = 2");
    for (const auto& c : cfg.checks) {
        if (c == "sumproduct")
            for (std::uint32_t d : cfg.dims)
                if (d != 1) throw FqError(Errc::BadConfig, "sumproduct needs dims = 1");
        if (c == "bound" || c == "distpinned" || c == "dot" || c == "best_slice")
            for (std::uint32_t d : cfg.dims)
                if (d < 2) throw FqError(Errc::BadConfig, c + " needs dims >= 2");
    }
    if (cfg.sizes.empty()) cfg.sizes.push_back(SizeSpec{true, 1.0, 0, "q"});
    return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
    return parse_string(read_file(path, Errc::BadConfig));
}

std::string ExperimentConfig::canonical_string() const {
    std::ostringstream out;
    out << "checks =";
    for (const auto& c : checks) out << ' ' << c;
    out << "\ndims =";
    for (auto d : dims) out << ' ' << d;
    out << "\nengine = " << engine_name(engine);
    out << "\nfamily = " << family;
    out << "\nfields =";
    for (auto q : qs) out << ' ' << q;
    out << "\ngrid_m = " << grid_m;
    out << "\nmetric = " << metric_name(metric);
    out << "\npins = ";
    if (pin_policy == PinPolicy::all)
        out << "all";
    else if (pin_policy == PinPolicy::best)
        out << "best";
    else
        out << fixed_pin.j << ',' << fixed_pin.z;
    out << "\nseed_base = " << seed_base;
    out << "\nseeds = " << seeds;
    out << "\nsizes =";
    for (const auto& s : sizes) out << ' ' << (s.power ? ("q^" + double_to_string(s.alpha)) : std::to_string(s.absolute));
    out << "\nsphere_t = " << sphere_t << '\n';
    return out.str();
}

u64 ExperimentConfig::hash() const { return fnv1a64(canonical_string()); }

// ---- result rows ------------------------------------------------------------

namespace {

std::string opt_str(const std::optional<u64>& v) { return v ? std::to_string(*v) : ""; }
std::string opt_str(const std::optional<u128>& v) { return v ? u128_to_string(*v) : ""; }
std::string opt_str(const std::optional<double>& v) { return v ? double_to_string(*v) : ""; }
std::string opt_str(const std::optional<int>& v) { return v ? std::to_string(*v) : ""; }
std::string opt_str(const std::optional<Rational>& v) { return v ? v->str() : ""; }
std::string opt_str(const std::optional<std::uint32_t>& v) { return v ? std::to_string(*v) : ""; }
std::string opt_str(const std::optional<bool>& v) { return v ? (*v ? "1" : "0") : ""; }

std::string flags_str(const std::map<std::string, bool>& m) {
    std::string out;
    for (const auto& [k, v] : m) {
        if (!out.empty()) out += ';';
        out += k + "=" + (v ? "1" : "0");
    }
    return out;
}

} // namespace

std::string ResultRow::csv_header() {
    return "config_hash,cell_id,seed,engine,code_version,timestamp,check,metric,p,k,q,d,"
           "pin_j,pin_z,pin_valid,size_E,size_Ez,first_moment,second_moment,support_size,"
           "support_size_excl_zero,cs_lower_bound,main_term,identity_lhs,R_term,residual,"
           "char_summands,A_term,B_term,kappa_paper,kappa_emp,C,guarantee_derived,"
           "guarantee_paper_stated,flags,observed,passed";
}

std::string ResultRow::csv_row() const {
    const DiagnosticsReport& r = report;
    std::ostringstream out;
    out << config_hash << ',' << cell_id << ',' << seed << ',' << engine << ',' << code_version
        << ',' << timestamp << ',' << r.check << ',' << metric_name(r.metric) << ',' << r.p << ','
        << r.k << ',' << r.q << ',' << r.d << ',' << opt_str(r.pin_j) << ',' << opt_str(r.pin_z)
        << ',' << opt_str(r.pin_valid) << ',' << r.size_E << ',' << opt_str(r.size_Ez) << ','
        << opt_str(r.first_moment) << ',' << opt_str(r.second_moment) << ','
        << opt_str(r.support_size) << ',' << opt_str(r.support_size_excl_zero) << ','
        << opt_str(r.cs_lower_bound) << ',' << opt_str(r.main_term) << ','
        << opt_str(r.identity_lhs) << ',' << opt_str(r.R_term) << ',' << opt_str(r.residual)
        << ',' << opt_str(r.char_summands) << ',' << opt_str(r.A_term) << ','
        << opt_str(r.B_term) << ',' << opt_str(r.kappa_paper) << ',' << opt_str(r.kappa_emp)
        << ',' << opt_str(r.C) << ',' << opt_str(r.guarantee_derived) << ','
        << opt_str(r.guarantee_paper_stated) << ',' << flags_str(r.flags) << ','
        << flags_str(r.observed) << ',' << (r.passed() ? "1" : "0");
    return out.str();
}

std::string ResultRow::jsonl_row() const {
    nlohmann::json j;
    j["config_hash"] = config_hash;
    j["cell_id"] = cell_id;
    j["seed"] = seed;
    j["engine"] = engine;
    j["code_version"] = code_version;
    j["timestamp"] = timestamp;
    j["report"] = nlohmann::json::parse(report.to_json_string());
    return j.dump();
}

// ---- sweep -------------------------------------------------------------------

namespace {

struct CellTask {
    std::uint32_t q = 0, d = 0;
    u64 n = 0;
    u64 seed_idx = 0;
    std::string id; // cell id without check/pin suffix
    u64 gen_seed = 0;
};

std::vector<Fe> random_subset_of_fq(std::uint32_t q, u64 n, SplitMix64& rng) {
    std::vector<bool> in(q, false);
    for (u64 j = q - n; j < q; ++j) {
        u64 t = rng.below(j + 1);
        if (in[t])
            in[j] = true;
        else
            in[t] = true;
    }
    std::vector<Fe> out;
    out.reserve(n);
    for (std::uint32_t v = 0; v < q; ++v)
        if (in[v]) out.push_back(v);
    return out;
}

// near-balanced factor sizes with product >= n; sweep cells must not die on
// an unfactorizable target the way the exact search contract does
std::vector<u64> approx_factor_sizes(u64 n, std::uint32_t d, std::uint32_t q) {
    std::vector<u64> s(d, 1);
    auto prod = [&] {
        u64 p = 1;
        for (u64 v : s) p *= v;
        return p;
    };
    while (prod() < n) {
        std::size_t arg = d;
        for (std::size_t i = 0; i < d; ++i)
            if (s[i] < q && (arg == d || s[i] < s[arg])) arg = i;
        if (arg == d) break;
        ++s[arg];
    }
    return s;
}

PointSet generate_cell_set(const ExperimentConfig& cfg, const FieldRef& field, const CellTask& cell) {
    if (cfg.family == "random") return PointSet::random(field, cell.d, cell.n, cell.gen_seed);
    if (cfg.family == "full") return PointSet::full_space(field, cell.d);
    if (cfg.family == "line") return PointSet::isotropic_line(field);
    if (cfg.family == "sphere") return PointSet::sphere(field, cell.d, cfg.sphere_t);
    if (cfg.family == "grid") return PointSet::interval_grid(field, cell.d, cfg.grid_m);
    auto sizes = approx_factor_sizes(cell.n, cell.d, field->q());
    SplitMix64 rng(cell.gen_seed);
    std::vector<std::vector<Fe>> factors;
    factors.reserve(cell.d);
    for (u64 s : sizes) factors.push_back(random_subset_of_fq(field->q(), s, rng));
    return PointSet::product(field, factors);
}

DiagnosticsReport run_check(const std::string& check, const ExperimentConfig& cfg,
                            const PointSet& E, PinSpec pin) {
    if (check == "cs") return cs_chain(E, E, cfg.metric, cfg.engine);
    if (check == "identity") return second_moment_identity(E, pin, cfg.metric);
    if (check == "bound") return second_moment_bound(E, pin, cfg.metric);
    if (check == "distpinned") return theorem_check_distpinned(E, pin);
    if (check == "dot") return theorem_check_dot(E, pin);
    if (check == "sumproduct") return check_sumproduct(E);
    if (check == "ir") return check_ir_threshold(E);
    if (check == "best_slice") return best_slice(E).second;
    throw FqError(Errc::BadConfig, "unknown check '" + check + "'");
}

bool check_needs_pin(const std::string& check) {
    return check == "identity" || check == "bound" || check == "distpinned" || check == "dot";
}

} // namespace

std::vector<u64> balanced_factors(u64 n, std::uint32_t d, std::uint32_t q) {
    if (n == 0) throw FqError(Errc::BadFactorization, "empty product set");
    // enumerate non-decreasing factorizations, keep the one with smallest max
    std::vector<u64> cur, best;
    u64 best_max = ~0ull;
    std::function<void(u64, u64, std::uint32_t)> rec = [&](u64 rem, u64 min_f, std::uint32_t left) {
        if (left == 1) {
            if (rem < min_f || rem > q) return;
            if (rem < best_max) {
                best = cur;
                best.push_back(rem);
                best_max = rem;
            }
            return;
        }
        // non-decreasing, so the next factor is at most rem^(1/left) <= sqrt(rem)
        for (u64 f = min_f; f * f <= rem && f <= q; ++f) {
            if (rem % f) continue;
            if (f >= best_max) break;
            cur.push_back(f);
            rec(rem / f, f, left - 1);
            cur.pop_back();
        }
    };
    rec(n, 1, d);
    if (best.empty())
        throw FqError(Errc::BadFactorization,
                      std::to_string(n) + " has no factorization into " + std::to_string(d) +
                          " factors within [1, " + std::to_string(q) + "]");
    std::sort(best.begin(), best.end());
    return best;
}

SweepStats sweep(const ExperimentConfig& cfg, const std::string& out_csv, bool jsonl_mirror,
                 bool timestamps) {
    u64 chash = cfg.hash();
    std::string chash_hex = hex64(chash);

    // enumerate generation cells
    std::vector<CellTask> cells;
    for (std::uint32_t q : cfg.qs)
        for (std::uint32_t d : cfg.dims)
            for (std::size_t si = 0; si < cfg.sizes.size(); ++si)
                for (u64 s = 0; s < cfg.seeds; ++s) {
                    CellTask c;
                    c.q = q;
                    c.d = d;
                    u64 universe = 1;
                    bool overflow = false;
                    for (std::uint32_t i = 0; i < d; ++i) {
                        universe *= q;
                        if (universe > PointSet::kIndexCap) overflow = true;
                    }
                    if (overflow)
                        throw FqError(Errc::CapExceeded,
                                      "cell q" + std::to_string(q) + "-d" + std::to_string(d) +
                                          " exceeds the index cap");
                    c.n = cfg.sizes[si].resolve(q, universe);
                    if (c.n == 0 && cfg.family == "random") c.n = 1;
                    c.seed_idx = s;
                    c.id = "q" + std::to_string(q) + "-d" + std::to_string(d) + "-n" +
                           std::to_string(c.n) + "-s" + std::to_string(s);
                    c.gen_seed = SplitMix64::derive(chash ^ fnv1a64(c.id), cfg.seed_base + s);
                    cells.push_back(std::move(c));
                }

    // resumability: collect keys already in the output file
    std::set<std::string> done;
    bool existing = false;
    {
        std::ifstream in(out_csv);
        if (in) {
            std::string line;
            if (std::getline(in, line)) {
                if (line != ResultRow::csv_header())
                    throw FqError(Errc::BadConfig, out_csv + " exists with a different schema");
                existing = true;
                while (std::getline(in, line)) {
                    auto c1 = line.find(',');
                    auto c2 = line.find(',', c1 + 1);
                    if (c1 == std::string::npos || c2 == std::string::npos) continue;
                    done.insert(line.substr(0, c2));
                }
            }
        }
    }

    std::ofstream out(out_csv, std::ios::binary | std::ios::app);
    if (!out) throw FqError(Errc::BadConfig, "cannot write " + out_csv);
    if (!existing) {
        out << ResultRow::csv_header() << '\n';
        out.flush();
    }
    std::ofstream jout;
    if (jsonl_mirror) {
        jout.open(out_csv + ".jsonl", std::ios::binary | std::ios::app);
        if (!jout) throw FqError(Errc::BadConfig, "cannot write jsonl mirror");
    }

    std::string stamp;
    if (timestamps) {
        std::time_t now = std::time(nullptr);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        stamp = buf;
    }

    SweepStats stats;
    stats.cells = cells.size();

    struct CellOutcome {
        std::vector<ResultRow> rows;
        std::string error; // nonempty on cap-style failures
    };

    // chunks of cells: compute in parallel, write in cell order, flush per chunk
    unsigned workers = num_threads();
    std::size_t chunk = std::max<std::size_t>(1, workers * 4);
    for (std::size_t base = 0; base < cells.size(); base += chunk) {
        std::size_t hi = std::min(cells.size(), base + chunk);
        std::vector<CellOutcome> outcomes(hi - base);
        parallel_for(hi - base, [&](u64 b, u64 e) {
            for (u64 ci = b; ci < e; ++ci) {
                const CellTask& cell = cells[base + ci];
                CellOutcome& oc = outcomes[ci];
                try {
                    auto [p, k] = factor_prime_power(cell.q);
                    FieldRef field = make_field(p, k);
                    PointSet E = generate_cell_set(cfg, field, cell);
                    // row plan first, so fully-done cells skip the checks
                    struct RowPlan {
                        std::string check;
                        PinSpec pin;
                        std::string id;
                    };
                    std::vector<RowPlan> plan;
                    for (const std::string& check : cfg.checks) {
                        std::vector<PinSpec> pins;
                        if (check_needs_pin(check)) {
                            if (cfg.pin_policy == PinPolicy::fixed) {
                                pins.push_back(cfg.fixed_pin);
                            } else if (cfg.pin_policy == PinPolicy::best) {
                                pins.push_back(best_slice(E).first);
                            } else {
                                for (std::uint32_t j = 1; j <= E.d(); ++j)
                                    for (Fe z : valid_pins(E, j)) pins.push_back(PinSpec{j, z});
                            }
                        } else {
                            pins.push_back(PinSpec{1, 0});
                        }
                        for (PinSpec pin : pins) {
                            std::string id = cell.id + "/" + check;
                            if (check_needs_pin(check))
                                id += "-j" + std::to_string(pin.j) + "z" + std::to_string(pin.z);
                            plan.push_back(RowPlan{check, pin, std::move(id)});
                        }
                    }
                    for (RowPlan& rp : plan) {
                        ResultRow row;
                        row.config_hash = chash_hex;
                        row.cell_id = rp.id;
                        row.seed = cell.gen_seed;
                        row.engine = engine_name(cfg.engine);
                        row.timestamp = stamp;
                        if (!done.count(chash_hex + "," + rp.id))
                            row.report = run_check(rp.check, cfg, E, rp.pin);
                        else
                            row.report.check = "__done__";
                        oc.rows.push_back(std::move(row));
                    }
                } catch (const FqError& e) {
                    oc.error = std::string("cell ") + cell.id + ": " + e.what();
                }
            }
        });
        for (std::size_t ci = 0; ci < outcomes.size(); ++ci) {
            CellOutcome& oc = outcomes[ci];
            if (!oc.error.empty()) {
                out.flush();
                throw FqError(Errc::CapExceeded, oc.error);
            }
            for (ResultRow& row : oc.rows) {
                std::string key = row.config_hash + "," + row.cell_id;
                if (done.count(key) || row.report.check == "__done__") {
                    ++stats.rows_skipped;
                    continue;
                }
                out << row.csv_row() << '\n';
                if (jsonl_mirror) jout << row.jsonl_row() << '\n';
                done.insert(key);
                ++stats.rows_written;
                if (!row.report.passed()) ++stats.failures;
            }
        }
        out.flush();
        if (jsonl_mirror) jout.flush();
    }
    return stats;
}

// ---- extremal search ----------------------------------------------------------

SearchResult search_extremal(FieldRef field, std::uint32_t d, u64 target_size, u64 steps,
                             u64 seed, unsigned restarts) {
    if (restarts == 0) restarts = 1;
    std::uint32_t q = field->q();
    std::vector<u64> sizes = balanced_factors(target_size, d, q);

    std::optional<SearchResult> best;
    u64 steps_per = restarts > 0 ? steps / restarts : steps;
    for (unsigned r = 0; r < restarts; ++r) {
        SplitMix64 rng(SplitMix64::derive(seed, r));
        std::vector<std::vector<Fe>> factors;
        factors.reserve(d);
        for (u64 s : sizes) factors.push_back(random_subset_of_fq(q, s, rng));

        auto delta_of = [&](const std::vector<std::vector<Fe>>& fs) {
            PointSet E = PointSet::product(field, fs);
            return static_cast<u64>(support(distance_spectrum(E, E)).size());
        };

        u64 cur = delta_of(factors);
        std::vector<std::pair<u64, u64>> trail{{0, cur}};
        u64 steps_here = (r + 1 == restarts) ? steps - steps_per * (restarts - 1) : steps_per;
        for (u64 step = 1; step <= steps_here; ++step) {
            std::uint32_t fi = static_cast<std::uint32_t>(rng.below(d));
            auto& fac = factors[fi];
            if (fac.size() == q) continue; // nothing to swap in
            std::size_t out_pos = static_cast<std::size_t>(rng.below(fac.size()));
            Fe incoming;
            do {
                incoming = static_cast<Fe>(rng.below(q));
            } while (std::find(fac.begin(), fac.end(), incoming) != fac.end());
            Fe outgoing = fac[out_pos];
            fac[out_pos] = incoming;
            u64 cand = delta_of(factors);
            if (cand <= cur) {
                if (cand < cur) trail.emplace_back(step, cand);
                cur = cand;
            } else {
                fac[out_pos] = outgoing;
            }
        }
        if (!best || cur < best->delta_size) {
            SearchResult res{PointSet::product(field, factors), cur, factors, trail, steps_here};
            best = std::move(res);
        }
    }
    return *best;
}

} // namespace fqdist
