#include "nlbvp/nlbvp.h"

#include "nlbvp/document.hpp"
#include "nlbvp/error.hpp"
#include "nlbvp/io.hpp"
#include "nlbvp/poisson_bench.hpp"
#include "nlbvp/report.hpp"
#include "nlbvp/solvers.hpp"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <new>
#include <sstream>
#include <string>

struct nlbvp_problem {
    nlbvp::ProblemDocument document;
    std::shared_ptr<const nlbvp::BuiltProblem> built;
    std::string out_path;
};

struct nlbvp_solution {
    std::shared_ptr<const nlbvp::BuiltProblem> problem;
    nlbvp::Solution solution;
    nlbvp::StrongResidual strong;
};

struct nlbvp_report {
    nlbvp::DiagnosticReport report;
};

struct nlbvp_bench {
    std::size_t dimension = 0;
    std::vector<std::size_t> inverse_steps;
    std::vector<nlbvp::BenchRow> rows;
    std::vector<nlbvp::IdentityCheck> checks;
};

namespace {

thread_local std::string last_error;

int fail(int status, std::string message)
{
    last_error = std::move(message);
    return status;
}

template <typename Fn>
int guarded(Fn&& fn)
{
    try {
        last_error.clear();
        return fn();
    } catch (const nlbvp::Error& e) {
        return fail(static_cast<int>(e.code()) + 1, e.what());
    } catch (const std::bad_alloc&) {
        return fail(NLBVP_INTERNAL_ERROR, "out of memory");
    } catch (const std::exception& e) {
        return fail(NLBVP_INTERNAL_ERROR, e.what());
    } catch (...) {
        return fail(NLBVP_INTERNAL_ERROR, "unknown error");
    }
}

int null_argument(const char* name)
{
    return fail(NLBVP_INVALID_ARGUMENT, std::string("argument '") + name + "' is NULL");
}

int copy_text(const std::string& text, char** out)
{
    char* buffer = static_cast<char*>(std::malloc(text.size() + 1));
    if (!buffer) return fail(NLBVP_INTERNAL_ERROR, "out of memory");
    std::memcpy(buffer, text.c_str(), text.size() + 1);
    *out = buffer;
    return NLBVP_OK;
}

int load(nlbvp::ProblemDocument document, const std::filesystem::path& base_dir, nlbvp_problem** out)
{
    auto built = std::make_shared<const nlbvp::BuiltProblem>(nlbvp::build_problem(document, base_dir));
    auto handle = std::make_unique<nlbvp_problem>();
    handle->out_path = document.out.value_or("");
    handle->document = std::move(document);
    handle->built = std::move(built);
    *out = handle.release();
    return NLBVP_OK;
}

nlbvp::BoundaryKind boundary_kind(nlbvp::ProblemKind kind)
{
    return kind == nlbvp::ProblemKind::Dirichlet ? nlbvp::BoundaryKind::Dirichlet : nlbvp::BoundaryKind::Neumann;
}

} // namespace

extern "C" {

const char* nlbvp_last_error(void)
{
    return last_error.c_str();
}

const char* nlbvp_status_name(int status)
{
    if (status == NLBVP_OK) return "Ok";
    if (status == NLBVP_INTERNAL_ERROR) return "InternalError";
    if (status > 0 && status < NLBVP_INTERNAL_ERROR) return nlbvp::to_string(static_cast<nlbvp::ErrorCode>(status - 1));
    return "Unknown";
}

void nlbvp_string_free(char* text)
{
    std::free(text);
}

int nlbvp_problem_load_file(const char* path, nlbvp_problem** out)
{
    if (!path) return null_argument("path");
    if (!out) return null_argument("out");
    return guarded([&]() -> int {
        const std::filesystem::path p(path);
        return load(nlbvp::load_document(p), p.parent_path(), out);
    });
}

int nlbvp_problem_load_string(const char* json, const char* base_dir, nlbvp_problem** out)
{
    if (!json) return null_argument("json");
    if (!out) return null_argument("out");
    return guarded([&]() -> int {
        return load(nlbvp::parse_document(json), base_dir ? std::filesystem::path(base_dir) : std::filesystem::path(),
                    out);
    });
}

void nlbvp_problem_free(nlbvp_problem* problem)
{
    delete problem;
}

int nlbvp_problem_sizes(const nlbvp_problem* problem, size_t* omega_size, size_t* gamma_size)
{
    if (!problem) return null_argument("problem");
    if (omega_size) *omega_size = problem->built->form.m();
    if (gamma_size) *gamma_size = problem->built->form.l();
    return NLBVP_OK;
}

int nlbvp_problem_kind(const nlbvp_problem* problem, int* kind)
{
    if (!problem) return null_argument("problem");
    if (!kind) return null_argument("kind");
    *kind = static_cast<int>(problem->built->kind);
    return NLBVP_OK;
}

int nlbvp_problem_tolerance(const nlbvp_problem* problem, double* tol)
{
    if (!problem) return null_argument("problem");
    if (!tol) return null_argument("tol");
    *tol = problem->document.tol.value_or(0.0);
    return NLBVP_OK;
}

const char* nlbvp_problem_output_path(const nlbvp_problem* problem)
{
    if (!problem || problem->out_path.empty()) return nullptr;
    return problem->out_path.c_str();
}

int nlbvp_problem_output_format(const nlbvp_problem* problem)
{
    if (!problem || !problem->document.format) return -1;
    return *problem->document.format == "structured" ? NLBVP_FORMAT_STRUCTURED : NLBVP_FORMAT_TABLE;
}

int nlbvp_solve(const nlbvp_problem* problem, double tol, nlbvp_solution** out)
{
    if (!problem) return null_argument("problem");
    if (!out) return null_argument("out");
    return guarded([&]() -> int {
        const auto& p = *problem->built;
        nlbvp::SolveOptions options;
        options.tol = tol > 0.0 ? tol : p.tol;
        auto handle = std::make_unique<nlbvp_solution>();
        handle->problem = problem->built;
        switch (p.kind) {
        case nlbvp::ProblemKind::Dirichlet:
            handle->solution = nlbvp::solve_dirichlet({p.form, p.f, p.g}, options);
            break;
        case nlbvp::ProblemKind::Neumann:
            handle->solution =
                nlbvp::solve_neumann({p.form, p.f, p.g, p.compat_tol}, nlbvp::nullspace(p.form), options);
            break;
        case nlbvp::ProblemKind::Regularized:
            handle->solution = nlbvp::solve_regularized({p.form, p.f, p.g, p.compat_tol}, p.c, options);
            break;
        }
        handle->strong = nlbvp::strong_residual(handle->solution.u, p.kernel, p.domain, p.f, p.g,
                                                boundary_kind(p.kind), p.c.span());
        *out = handle.release();
        return NLBVP_OK;
    });
}

void nlbvp_solution_free(nlbvp_solution* solution)
{
    delete solution;
}

int nlbvp_solution_values(const nlbvp_solution* solution, double* buffer, size_t capacity, size_t* count)
{
    if (!solution) return null_argument("solution");
    const auto& u = solution->solution.u;
    if (count) *count = u.size();
    if (buffer)
        for (std::size_t i = 0; i < u.size() && i < capacity; ++i) buffer[i] = u[i];
    return NLBVP_OK;
}

int nlbvp_solution_summary(const nlbvp_solution* solution, double* residual, size_t* iterations, int* projected)
{
    if (!solution) return null_argument("solution");
    if (residual) *residual = solution->solution.residual;
    if (iterations) *iterations = solution->solution.iterations;
    if (projected) *projected = solution->solution.projected ? 1 : 0;
    return NLBVP_OK;
}

int nlbvp_solution_strong_residual(const nlbvp_solution* solution, double* omega, double* gamma)
{
    if (!solution) return null_argument("solution");
    if (omega) *omega = solution->strong.omega;
    if (gamma) *gamma = solution->strong.gamma;
    return NLBVP_OK;
}

int nlbvp_solution_format(const nlbvp_solution* solution, int format, char** text)
{
    if (!solution) return null_argument("solution");
    if (!text) return null_argument("text");
    return guarded([&]() -> int {
        const auto& p = *solution->problem;
        const nlbvp::SolutionSummary summary{nlbvp::to_string(p.kind), solution->solution.residual,
                                             solution->solution.iterations, solution->solution.projected};
        if (format == NLBVP_FORMAT_STRUCTURED)
            return copy_text(nlbvp::solution_json(p.measure, p.domain, solution->solution.u, summary), text);
        if (format != NLBVP_FORMAT_TABLE) return fail(NLBVP_INVALID_ARGUMENT, "unknown output format");
        std::ostringstream out;
        nlbvp::write_solution_table(out, p.measure, p.domain, solution->solution.u, summary);
        return copy_text(out.str(), text);
    });
}

int nlbvp_diagnose(const nlbvp_problem* problem, nlbvp_report** out)
{
    if (!problem) return null_argument("problem");
    if (!out) return null_argument("out");
    return guarded([&]() -> int {
        auto handle = std::make_unique<nlbvp_report>();
        handle->report = nlbvp::diagnose(*problem->built);
        *out = handle.release();
        return NLBVP_OK;
    });
}

void nlbvp_report_free(nlbvp_report* report)
{
    delete report;
}

int nlbvp_report_get(const nlbvp_report* report, const char* key, double* value)
{
    if (!report) return null_argument("report");
    if (!key) return null_argument("key");
    if (!value) return null_argument("value");
    const auto& r = report->report;
    const std::map<std::string, double> fields = {
        {"omega_size", static_cast<double>(r.omega_size)},
        {"gamma_size", static_cast<double>(r.gamma_size)},
        {"weakly_coupled", static_cast<double>(r.weakly_coupled)},
        {"symmetry_defect", r.symmetry_defect},
        {"nullspace_dim", static_cast<double>(r.nullspace_dim)},
        {"nullspace_tolerance", r.nullspace_tolerance},
        {"spectral_gap", r.spectral_gap},
        {"friedrichs_constant", r.friedrichs_constant},
        {"poincare_constant_omega", r.poincare_constant_omega},
        {"poincare_constant_full", r.poincare_constant_full},
        {"strong_poincare", r.strong_poincare ? 1.0 : 0.0},
        {"compatibility_defect", r.compatibility_defect},
        {"max_principle", r.max_principle ? (*r.max_principle ? 1.0 : 0.0) : -1.0},
        {"trace_weighted_sum", r.trace_weighted_sum},
        {"trace_passes", r.trace_passes ? 1.0 : 0.0},
    };
    const auto it = fields.find(key);
    if (it == fields.end()) return fail(NLBVP_INVALID_ARGUMENT, std::string("unknown report field '") + key + "'");
    *value = it->second;
    return NLBVP_OK;
}

int nlbvp_report_format(const nlbvp_report* report, int format, char** text)
{
    if (!report) return null_argument("report");
    if (!text) return null_argument("text");
    return guarded([&]() -> int {
        if (format == NLBVP_FORMAT_STRUCTURED) return copy_text(nlbvp::report_json(report->report), text);
        if (format != NLBVP_FORMAT_TABLE) return fail(NLBVP_INVALID_ARGUMENT, "unknown output format");
        std::ostringstream out;
        nlbvp::write_report_table(out, report->report);
        return copy_text(out.str(), text);
    });
}

int nlbvp_bench_run(int dimension, const size_t* inverse_steps, size_t count, int exact, int threads,
                    nlbvp_bench** out)
{
    if (!inverse_steps && count) return null_argument("inverse_steps");
    if (!out) return null_argument("out");
    return guarded([&]() -> int {
        if (dimension < 1 || dimension > 3) return fail(NLBVP_INVALID_ARGUMENT, "dimension must be 1, 2 or 3");
        if (count == 0) return fail(NLBVP_BAD_STEP, "no step sizes given");
        if (exact != NLBVP_EXACT_SINE && exact != NLBVP_EXACT_QUADRATIC)
            return fail(NLBVP_INVALID_ARGUMENT, "unknown exact solution");
        const auto d = static_cast<std::size_t>(dimension);
        auto handle = std::make_unique<nlbvp_bench>();
        handle->dimension = d;
        handle->inverse_steps.assign(inverse_steps, inverse_steps + count);
        nlbvp::ConvergenceOptions options;
        options.threads = threads > 0 ? static_cast<std::size_t>(threads) : 1;
        const bool sine = exact == NLBVP_EXACT_SINE;
        handle->rows = nlbvp::convergence_study(d, sine ? nlbvp::sine_solution(d) : nlbvp::quadratic_solution(d),
                                                sine ? nlbvp::sine_load(d) : nlbvp::quadratic_load(d),
                                                handle->inverse_steps, options);
        handle->checks = nlbvp::identity_suite(nlbvp::unit_cube_grid(d, handle->inverse_steps.back()));
        *out = handle.release();
        return NLBVP_OK;
    });
}

void nlbvp_bench_free(nlbvp_bench* bench)
{
    delete bench;
}

size_t nlbvp_bench_row_count(const nlbvp_bench* bench)
{
    return bench ? bench->rows.size() : 0;
}

int nlbvp_bench_row(const nlbvp_bench* bench, size_t index, double values[9])
{
    if (!bench) return null_argument("bench");
    if (!values) return null_argument("values");
    if (index >= bench->rows.size()) return fail(NLBVP_INVALID_ARGUMENT, "row index out of range");
    const auto& r = bench->rows[index];
    const double row[9] = {r.h,       static_cast<double>(r.m), static_cast<double>(r.l), r.max_error,      r.order,
                           r.friedrichs_C, r.poincare_C,        r.runtime_ms,             r.strong_residual};
    std::copy(row, row + 9, values);
    return NLBVP_OK;
}

int nlbvp_bench_checks_passed(const nlbvp_bench* bench, int* passed)
{
    if (!bench) return null_argument("bench");
    if (!passed) return null_argument("passed");
    *passed = 1;
    for (const auto& c : bench->checks)
        if (!c.passed) *passed = 0;
    return NLBVP_OK;
}

int nlbvp_bench_format(const nlbvp_bench* bench, int format, char** text)
{
    if (!bench) return null_argument("bench");
    if (!text) return null_argument("text");
    return guarded([&]() -> int {
        if (format == NLBVP_FORMAT_STRUCTURED) return copy_text(nlbvp::bench_json(bench->rows, bench->checks), text);
        if (format != NLBVP_FORMAT_TABLE) return fail(NLBVP_INVALID_ARGUMENT, "unknown output format");
        std::ostringstream out;
        nlbvp::write_bench_table(out, bench->rows, bench->checks);
        return copy_text(out.str(), text);
    });
}

int nlbvp_bench_write_plots(const nlbvp_bench* bench, const char* directory)
{
    if (!bench) return null_argument("bench");
    if (!directory) return null_argument("directory");
    return guarded([&]() -> int {
        const std::filesystem::path dir(directory);
        std::filesystem::create_directories(dir);
        for (std::size_t k = 0; k < bench->rows.size(); ++k) {
            const auto grid = nlbvp::unit_cube_grid(bench->dimension, bench->inverse_steps[k]);
            const auto path = dir / ("solution_d" + std::to_string(bench->dimension) + "_n" +
                                     std::to_string(bench->inverse_steps[k]) + ".tsv");
            std::ofstream out(path);
            if (!out) return fail(NLBVP_IO_ERROR, "cannot write '" + path.string() + "'");
            nlbvp::write_plot_data(out, grid.measure, grid.domain, bench->rows[k].solution);
        }
        return static_cast<int>(NLBVP_OK);
    });
}

int nlbvp_parse_step(const char* text, size_t* inverse_step)
{
    if (!text) return null_argument("text");
    if (!inverse_step) return null_argument("inverse_step");
    return guarded([&]() -> int {
        *inverse_step = nlbvp::parse_step(text);
        return NLBVP_OK;
    });
}

} // extern "C"
