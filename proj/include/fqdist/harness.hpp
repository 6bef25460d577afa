#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fqdist/analysis.hpp"

namespace fqdist {

inline constexpr const char* kCodeVersion = "fqdist-0.1.0";

/// Writes the versioned line-oriented point-set format:
/// `FQSET 1 p k modulus d n` then n lines of d canonical integers,
/// ascending by index. Round trips are bit exact.
void save_pointset(const PointSet& E, const std::string& path);
PointSet load_pointset(const std::string& path);

std::string pointset_to_string(const PointSet& E);
PointSet pointset_from_string(const std::string& text);

/// JSON-lines mirror of the same data (one header object, one object per point).
std::string pointset_to_jsonl(const PointSet& E);
PointSet pointset_from_jsonl(const std::string& text);

/// q -> (p, k) for prime powers; throws NonPrime otherwise.
std::pair<std::uint32_t, std::uint32_t> factor_prime_power(std::uint32_t q);

struct SizeSpec {
    bool power = false; // n = round(q^alpha) when set, else the absolute count
    double alpha = 1.0;
    u64 absolute = 0;
    std::string raw;

    u64 resolve(std::uint32_t q, u64 universe) const;
};

enum class PinPolicy { all, best, fixed };

/// One sweep description: the cross product of the axes below, `seeds` runs
/// per cell. Parsed from a flat `key = value` file (schema in the README).
struct ExperimentConfig {
    std::vector<std::uint32_t> qs;
    std::vector<std::uint32_t> dims;
    std::string family = "random"; // random|product|line|sphere|full|grid
    std::vector<SizeSpec> sizes;
    PinPolicy pin_policy = PinPolicy::best;
    PinSpec fixed_pin{1, 0};
    Metric metric = Metric::distance;
    Engine engine = Engine::direct;
    std::vector<std::string> checks;
    u64 seeds = 1;
    u64 seed_base = 0;
    Fe sphere_t = 1;
    std::uint32_t grid_m = 2;

    static ExperimentConfig parse_file(const std::string& path);
    static ExperimentConfig parse_string(const std::string& text);
    std::string canonical_string() const;
    u64 hash() const; // FNV-1a of the canonical string
};

/// One flattened DiagnosticsReport plus provenance.
struct ResultRow {
    std::string config_hash;
    std::string cell_id;
    u64 seed = 0;
    std::string engine;
    std::string code_version = kCodeVersion;
    std::string timestamp; // empty unless stamping was requested
    DiagnosticsReport report;

    static std::string csv_header();
    std::string csv_row() const;
    std::string jsonl_row() const;
};

struct SweepStats {
    u64 cells = 0;
    u64 rows_written = 0;
    u64 rows_skipped = 0;
    u64 failures = 0; // rows whose asserted flags did not all pass
};

/// Runs the sweep, appending missing rows to out_csv. Cells already present
/// (keyed by config hash + cell id) are skipped, so interrupted sweeps can
/// resume. Output bytes depend only on the config and seeds.
SweepStats sweep(const ExperimentConfig& cfg, const std::string& out_csv,
                 bool jsonl_mirror = false, bool timestamps = false);

struct SearchResult {
    PointSet best;
    u64 delta_size = 0; // |support| of the distance spectrum, zero included
    std::vector<std::vector<Fe>> factors;
    std::vector<std::pair<u64, u64>> trail; // (step, delta_size) improvements
    u64 steps_done = 0;
};

/// Hill climb over product sets: swap one element of one factor per step,
/// accept when |support| does not increase. Seeded restarts split the step
/// budget evenly. The result is the best visited state, never claimed optimal.
SearchResult search_extremal(FieldRef field, std::uint32_t d, u64 target_size, u64 steps,
                             u64 seed, unsigned restarts = 1);

/// Balanced factorization of n into d factors within [1, q]; used by the
/// product family and the extremal search.
std::vector<u64> balanced_factors(u64 n, std::uint32_t d, std::uint32_t q);

} // namespace fqdist
