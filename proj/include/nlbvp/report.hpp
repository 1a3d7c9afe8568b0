#ifndef NLBVP_REPORT_HPP
#define NLBVP_REPORT_HPP

#include "nlbvp/document.hpp"
#include "nlbvp/poisson_bench.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nlbvp {

struct DiagnosticReport {
    std::string family;
    std::size_t omega_size = 0;
    std::size_t gamma_size = 0;
    std::size_t weakly_coupled = 0;
    double symmetry_defect = 0.0;
    std::size_t nullspace_dim = 0;
    double nullspace_tolerance = 0.0;
    double spectral_gap = 0.0;
    double friedrichs_constant = 0.0;
    double poincare_constant_omega = 0.0;
    double poincare_constant_full = 0.0;
    bool strong_poincare = false;
    double compatibility_defect = 0.0;
    std::optional<bool> max_principle; // Dirichlet solve of the document data; empty when not applicable
    double trace_c = 1.0;
    std::vector<double> trace_weight_sufficient;
    std::vector<double> trace_weight_necessary;
    double trace_weighted_sum = 0.0; // sum_Gamma g^2 m / K(y, Omega)
    bool trace_passes = true;
};

DiagnosticReport diagnose(const BuiltProblem& problem);

/// "key<TAB>value" lines; arrays as comma-separated values.
void write_report_table(std::ostream& out, const DiagnosticReport& report);
std::string report_json(const DiagnosticReport& report);

void write_bench_table(std::ostream& out, const std::vector<BenchRow>& rows,
                       const std::vector<IdentityCheck>& checks);
std::string bench_json(const std::vector<BenchRow>& rows, const std::vector<IdentityCheck>& checks);

/// "x1 .. xd value" rows over Omega u Gamma.
void write_plot_data(std::ostream& out, const AtomicMeasure& measure, const NonlocalDomain& domain,
                     const NodeFunction& u);

} // namespace nlbvp

#endif
