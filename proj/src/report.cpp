#include "nlbvp/report.hpp"

#include "nlbvp/analysis.hpp"
#include "nlbvp/error.hpp"
#include "nlbvp/io.hpp"
#include "nlbvp/solvers.hpp"

#include <cmath>
#include <ostream>

#include <json.hpp>

namespace nlbvp {

using json = nlohmann::ordered_json;

DiagnosticReport diagnose(const BuiltProblem& problem)
{
    const auto& form = problem.form;
    DiagnosticReport r;
    r.family = to_string(problem.kernel.family());
    r.omega_size = form.m();
    r.gamma_size = form.l();
    r.weakly_coupled = problem.domain.weakly_coupled().size();
    r.symmetry_defect = symmetry_defect(problem.kernel, problem.measure);

    const auto basis = nullspace(form);
    r.nullspace_dim = basis.dimension();
    r.nullspace_tolerance = basis.tolerance;
    r.spectral_gap = basis.gap;
    r.strong_poincare = strong_poincare_check(basis);

    const auto friedrichs = friedrichs_constant(form);
    r.friedrichs_constant = friedrichs.constant;
    r.poincare_constant_omega = poincare_constant(form, basis, PoincareNorm::Omega).constant;
    r.poincare_constant_full = poincare_constant(form, basis, PoincareNorm::Full).constant;
    r.compatibility_defect = compatibility_defect(form, problem.f, problem.g, basis);

    if (form.l() > 0 && friedrichs.holds()) {
        SolveOptions options;
        options.tol = problem.tol;
        const auto solution = solve_dirichlet({form, problem.f, problem.g}, options);
        r.max_principle = max_principle_check(form, solution.u);
    }

    if (!problem.c.empty() && problem.c[0] > 0.0) r.trace_c = problem.c[0];
    const auto sufficient = trace_weight(problem.kernel, problem.domain, TraceVariant::Sufficient);
    const auto necessary = trace_weight(problem.kernel, problem.domain, TraceVariant::Necessary, r.trace_c);
    r.trace_weight_sufficient = sufficient.omega_weight.values();
    r.trace_weight_necessary = necessary.omega_weight.values();
    const auto functional = continuous_functional_check(form, problem.g, sufficient);
    r.trace_weighted_sum = functional.weighted_sum;
    r.trace_passes = functional.passes();
    return r;
}

namespace {

std::string join(const std::vector<double>& values)
{
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += format_double(values[i]);
    }
    return out;
}

json number(double value)
{
    if (std::isfinite(value)) return value;
    return format_double(value);
}

json numbers(const std::vector<double>& values)
{
    json out = json::array();
    for (double v : values) out.push_back(number(v));
    return out;
}

} // namespace

void write_report_table(std::ostream& out, const DiagnosticReport& r)
{
    out << "family\t" << r.family << '\n'
        << "omega_size\t" << r.omega_size << '\n'
        << "gamma_size\t" << r.gamma_size << '\n'
        << "weakly_coupled\t" << r.weakly_coupled << '\n'
        << "symmetry_defect\t" << format_double(r.symmetry_defect) << '\n'
        << "nullspace_dim\t" << r.nullspace_dim << '\n'
        << "nullspace_tolerance\t" << format_double(r.nullspace_tolerance) << '\n'
        << "spectral_gap\t" << format_double(r.spectral_gap) << '\n'
        << "friedrichs_constant\t" << format_double(r.friedrichs_constant) << '\n'
        << "poincare_constant_omega\t" << format_double(r.poincare_constant_omega) << '\n'
        << "poincare_constant_full\t" << format_double(r.poincare_constant_full) << '\n'
        << "strong_poincare\t" << (r.strong_poincare ? "true" : "false") << '\n'
        << "compatibility_defect\t" << format_double(r.compatibility_defect) << '\n'
        << "max_principle\t" << (r.max_principle ? (*r.max_principle ? "true" : "false") : "n/a") << '\n'
        << "trace_c\t" << format_double(r.trace_c) << '\n'
        << "trace_weight_sufficient\t" << join(r.trace_weight_sufficient) << '\n'
        << "trace_weight_necessary\t" << join(r.trace_weight_necessary) << '\n'
        << "trace_weighted_sum\t" << format_double(r.trace_weighted_sum) << '\n'
        << "trace_passes\t" << (r.trace_passes ? "true" : "false") << '\n';
}

std::string report_json(const DiagnosticReport& r)
{
    json doc;
    doc["family"] = r.family;
    doc["omega_size"] = r.omega_size;
    doc["gamma_size"] = r.gamma_size;
    doc["weakly_coupled"] = r.weakly_coupled;
    doc["symmetry_defect"] = number(r.symmetry_defect);
    doc["nullspace_dim"] = r.nullspace_dim;
    doc["nullspace_tolerance"] = number(r.nullspace_tolerance);
    doc["spectral_gap"] = number(r.spectral_gap);
    doc["friedrichs_constant"] = number(r.friedrichs_constant);
    doc["poincare_constant_omega"] = number(r.poincare_constant_omega);
    doc["poincare_constant_full"] = number(r.poincare_constant_full);
    doc["strong_poincare"] = r.strong_poincare;
    doc["compatibility_defect"] = number(r.compatibility_defect);
    doc["max_principle"] = r.max_principle ? json(*r.max_principle) : json(nullptr);
    doc["trace_c"] = number(r.trace_c);
    doc["trace_weight_sufficient"] = numbers(r.trace_weight_sufficient);
    doc["trace_weight_necessary"] = numbers(r.trace_weight_necessary);
    doc["trace_weighted_sum"] = number(r.trace_weighted_sum);
    doc["trace_passes"] = r.trace_passes;
    return doc.dump(2) + "\n";
}

void write_bench_table(std::ostream& out, const std::vector<BenchRow>& rows, const std::vector<IdentityCheck>& checks)
{
    for (const auto& c : checks)
        out << "# check " << c.name << ' ' << (c.passed ? "pass" : "FAIL") << (c.detail.empty() ? "" : " ")
            << c.detail << '\n';
    out << "h\tm\tl\tmax_error\torder\tfriedrichs_C\tpoincare_C\truntime_ms\n";
    for (const auto& r : rows)
        out << format_double(r.h) << '\t' << r.m << '\t' << r.l << '\t' << format_double(r.max_error) << '\t'
            << format_double(r.order) << '\t' << format_double(r.friedrichs_C) << '\t'
            << format_double(r.poincare_C) << '\t' << format_double(r.runtime_ms) << '\n';
}

std::string bench_json(const std::vector<BenchRow>& rows, const std::vector<IdentityCheck>& checks)
{
    json doc;
    json table = json::array();
    for (const auto& r : rows)
        table.push_back({{"h", number(r.h)},
                         {"m", r.m},
                         {"l", r.l},
                         {"max_error", number(r.max_error)},
                         {"order", number(r.order)},
                         {"friedrichs_C", number(r.friedrichs_C)},
                         {"poincare_C", number(r.poincare_C)},
                         {"runtime_ms", number(r.runtime_ms)},
                         {"strong_residual", number(r.strong_residual)}});
    doc["rows"] = std::move(table);
    json list = json::array();
    for (const auto& c : checks) list.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    doc["checks"] = std::move(list);
    return doc.dump(2) + "\n";
}

void write_plot_data(std::ostream& out, const AtomicMeasure& measure, const NonlocalDomain& domain,
                     const NodeFunction& u)
{
    NLBVP_REQUIRE(u.size() == domain.size(), ErrorCode::DimensionMismatch, "solution has the wrong length");
    for (std::size_t k = 1; k <= measure.dimension(); ++k) out << 'x' << k << '\t';
    out << "value\n";
    for (std::size_t i = 0; i < domain.size(); ++i) {
        for (double c : measure.point(domain.node_at(i))) out << format_double(c) << '\t';
        out << format_double(u[i]) << '\n';
    }
}

} // namespace nlbvp
