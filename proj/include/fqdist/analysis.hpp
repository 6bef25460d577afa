#pragma once

#include <map>
#include <optional>
#include <string>

#include "fqdist/spectra.hpp"

namespace fqdist {

enum class Metric { distance, dot };

const char* metric_name(Metric m);
Metric metric_from_string(const std::string& s);

/// Everything a proof-step verification measures. Fields are optional because
/// each operation fills only the quantities it computes; `flags` holds the
/// asserted pass booleans, `observed` results that are logged but never
/// asserted (see README on the stated-vs-derived guarantee constants).
struct DiagnosticsReport {
    std::string check;
    Metric metric = Metric::distance;
    std::uint32_t p = 0, k = 0, q = 0, d = 0;
    std::optional<std::uint32_t> pin_j;
    std::optional<Fe> pin_z;
    std::optional<bool> pin_valid;
    u64 size_E = 0;
    std::optional<u64> size_Ez;

    std::optional<u64> first_moment;            // sum nu
    std::optional<u128> second_moment;          // sum nu^2
    std::optional<u64> support_size;            // |support(nu)|, zero included
    std::optional<u64> support_size_excl_zero;
    std::optional<u128> cs_lower_bound;         // ceil((sum nu)^2 / sum nu^2)

    std::optional<Rational> main_term;          // q^{-1} |Ez|^2 |E|^2
    std::optional<u128> identity_lhs;           // |Ez| * |{(x,y,y'): form(x,y)=form(x,y')}|
    std::optional<double> R_term;               // character-sum remainder (II for dot)
    std::optional<double> residual;
    std::optional<u64> char_summands;

    std::optional<u128> A_term;                 // slab-count decomposition, exact
    std::optional<u128> B_term;
    std::optional<int> kappa_paper;             // 3 for distance, 2 for dot
    std::optional<double> kappa_emp;            // tightest constant measured

    std::optional<Rational> C;                  // |E||Ez| / q^d
    std::optional<Rational> guarantee_derived;  // qC/(C+kappa)
    std::optional<Rational> guarantee_paper_stated;

    std::map<std::string, bool> flags;
    std::map<std::string, bool> observed;

    bool passed() const;
    std::string to_json_string() const;
};

struct IdentityOptions {
    double tol_per_summand = 1e-6;
    u64 max_summands = 200'000'000; // character-sum budget
    unsigned sample_triples = 64;   // spot checks of the square-expansion identity
};

/// Cauchy-Schwarz chain (sum nu)^2 <= |support| * sum nu^2, exact integers.
/// The engine choice applies to the distance metric only.
DiagnosticsReport cs_chain(const PointSet& F, const PointSet& E, Metric metric,
                           Engine engine = Engine::direct);

/// Second-moment expansion |Ez|*T = q^{-1}|Ez|^2|E|^2 + R with T counted
/// exactly and R summed directly from characters.
DiagnosticsReport second_moment_identity(const PointSet& E, PinSpec pin, Metric metric,
                                         const IdentityOptions& opts = {});

/// sum nu^2 <= q^{-1}|E|^2|Ez|^2 + kappa q^{d-1}|E||Ez| in exact arithmetic,
/// with the slab A/B decomposition counted directly. Odd characteristic only;
/// dot metric requires z != 0.
DiagnosticsReport second_moment_bound(const PointSet& E, PinSpec pin, Metric metric);

/// Pinned distance guarantee |support| >= qC/(C+3), C = |E||Ez|/q^d.
DiagnosticsReport theorem_check_distpinned(const PointSet& E, PinSpec pin);

/// Pinned dot-product guarantee |support| >= qC/(C+2), z != 0.
DiagnosticsReport theorem_check_dot(const PointSet& E, PinSpec pin);

/// Pin maximizing |E|*|pin_slice|; for product sets the pigeonhole bound
/// |Ez| >= |E|^{(d-1)/d} is asserted. Feeds theorem_check_distpinned.
std::pair<PinSpec, DiagnosticsReport> best_slice(const PointSet& E);

/// A.A+A.A coverage: F_q^* containment when |A|^4 > q^3, and the size bound
/// |A.A+A.A| >= q|A|^3/(q^2+|A|^3).
DiagnosticsReport check_sumproduct(const PointSet& A);

/// If |E| >= 4q^{(d+1)/2} (checked as |E|^2 >= 16q^{d+1}), the distance set
/// must be all of F_q.
DiagnosticsReport check_ir_threshold(const PointSet& E);

/// Whether E equals the product of its coordinate projections.
bool is_product_set(const PointSet& E);

} // namespace fqdist
