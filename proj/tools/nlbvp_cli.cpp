#include "nlbvp/nlbvp.h"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

enum ExitCode { kOk = 0, kInvalid = 1, kIncompatible = 2, kIllPosed = 3, kFailure = 4 };

int exit_code_for(int status)
{
    switch (status) {
    case NLBVP_OK: return kOk;
    case NLBVP_INCOMPATIBLE_DATA: return kIncompatible;
    case NLBVP_FRIEDRICHS_VIOLATED:
    case NLBVP_POINCARE_VIOLATED: return kIllPosed;
    case NLBVP_EIGENSOLVER_FAILURE:
    case NLBVP_NO_CONVERGENCE:
    case NLBVP_SINGULAR_AFTER_REGULARIZATION:
    case NLBVP_HYPOTHESIS_VIOLATED:
    case NLBVP_INTERNAL_ERROR: return kFailure;
    default: return kInvalid;
    }
}

int report_failure(int status)
{
    std::cerr << "nlbvp: " << nlbvp_status_name(status) << ": " << nlbvp_last_error() << '\n';
    return exit_code_for(status);
}

template <typename T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};
using ProblemPtr = std::unique_ptr<nlbvp_problem, Deleter<nlbvp_problem, nlbvp_problem_free>>;
using SolutionPtr = std::unique_ptr<nlbvp_solution, Deleter<nlbvp_solution, nlbvp_solution_free>>;
using ReportPtr = std::unique_ptr<nlbvp_report, Deleter<nlbvp_report, nlbvp_report_free>>;
using BenchPtr = std::unique_ptr<nlbvp_bench, Deleter<nlbvp_bench, nlbvp_bench_free>>;
using TextPtr = std::unique_ptr<char, Deleter<char, nlbvp_string_free>>;

int format_code(const std::string& name)
{
    return name == "structured" ? NLBVP_FORMAT_STRUCTURED : NLBVP_FORMAT_TABLE;
}

int emit(const char* text, const std::string& path)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return kOk;
    }
    std::ofstream out(path);
    if (!out || !(out << text)) {
        std::cerr << "nlbvp: cannot write '" << path << "'\n";
        return kInvalid;
    }
    return kOk;
}

struct OutputFlags {
    std::string out;
    std::string format;
};

// Flags win over the document's own out / format fields.
void resolve_output(const nlbvp_problem* problem, OutputFlags& flags)
{
    if (flags.out.empty())
        if (const char* doc_out = nlbvp_problem_output_path(problem)) flags.out = doc_out;
    if (flags.format.empty()) {
        const int doc_format = nlbvp_problem_output_format(problem);
        flags.format = doc_format == NLBVP_FORMAT_STRUCTURED ? "structured" : "table";
    }
}

int cmd_solve(const std::string& path, double tol, OutputFlags flags)
{
    nlbvp_problem* raw = nullptr;
    if (int s = nlbvp_problem_load_file(path.c_str(), &raw)) return report_failure(s);
    ProblemPtr problem(raw);
    resolve_output(problem.get(), flags);

    nlbvp_solution* raw_solution = nullptr;
    if (int s = nlbvp_solve(problem.get(), tol, &raw_solution)) return report_failure(s);
    SolutionPtr solution(raw_solution);

    char* text = nullptr;
    if (int s = nlbvp_solution_format(solution.get(), format_code(flags.format), &text)) return report_failure(s);
    TextPtr owned(text);
    return emit(owned.get(), flags.out);
}

int cmd_diagnose(const std::string& path, OutputFlags flags)
{
    nlbvp_problem* raw = nullptr;
    if (int s = nlbvp_problem_load_file(path.c_str(), &raw)) return report_failure(s);
    ProblemPtr problem(raw);
    resolve_output(problem.get(), flags);

    nlbvp_report* raw_report = nullptr;
    if (int s = nlbvp_diagnose(problem.get(), &raw_report)) return report_failure(s);
    ReportPtr report(raw_report);

    char* text = nullptr;
    if (int s = nlbvp_report_format(report.get(), format_code(flags.format), &text)) return report_failure(s);
    TextPtr owned(text);
    return emit(owned.get(), flags.out);
}

int thread_count()
{
    const char* env = std::getenv("NLBVP_THREADS");
    if (!env) return 1;
    try {
        const int n = std::stoi(env);
        return n > 0 ? n : 1;
    } catch (const std::exception&) {
        return 1;
    }
}

int cmd_bench(int d, const std::string& steps, const std::string& exact, const std::string& plot_dir,
              OutputFlags flags)
{
    std::vector<size_t> inverse_steps;
    std::stringstream list(steps);
    for (std::string item; std::getline(list, item, ',');) {
        size_t n = 0;
        if (int s = nlbvp_parse_step(item.c_str(), &n)) return report_failure(s);
        inverse_steps.push_back(n);
    }
    const int exact_code = exact == "quadratic" ? NLBVP_EXACT_QUADRATIC : NLBVP_EXACT_SINE;

    nlbvp_bench* raw = nullptr;
    if (int s = nlbvp_bench_run(d, inverse_steps.data(), inverse_steps.size(), exact_code, thread_count(), &raw))
        return report_failure(s);
    BenchPtr bench(raw);

    char* text = nullptr;
    if (int s = nlbvp_bench_format(bench.get(), format_code(flags.format.empty() ? "table" : flags.format), &text))
        return report_failure(s);
    TextPtr owned(text);
    if (int rc = emit(owned.get(), flags.out)) return rc;

    if (!plot_dir.empty())
        if (int s = nlbvp_bench_write_plots(bench.get(), plot_dir.c_str())) return report_failure(s);

    int passed = 0;
    nlbvp_bench_checks_passed(bench.get(), &passed);
    if (!passed) {
        std::cerr << "nlbvp: identity suite reported failures\n";
        return kFailure;
    }
    return kOk;
}

void add_output_flags(CLI::App* cmd, OutputFlags& flags)
{
    cmd->add_option("--out", flags.out, "Output path (default: stdout or the document's 'out')");
    cmd->add_option("--format", flags.format, "Output format")->check(CLI::IsMember({"table", "structured"}));
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Nonlocal Dirichlet and Neumann boundary-value problems"};
    app.require_subcommand(1);

    std::string path;
    double tol = 0.0;
    OutputFlags solve_flags, diagnose_flags, bench_flags;

    auto* solve = app.add_subcommand("solve", "Solve the problem described by a JSON document");
    solve->add_option("document", path, "Problem document")->required();
    solve->add_option("--tol", tol, "Relative residual tolerance (default: document or 1e-12)")
        ->check(CLI::PositiveNumber);
    add_output_flags(solve, solve_flags);

    auto* diagnose = app.add_subcommand("diagnose", "Report symmetry, nullspace and inequality constants");
    diagnose->add_option("document", path, "Problem document")->required();
    add_output_flags(diagnose, diagnose_flags);

    int d = 2;
    std::string steps = "1/8,1/16,1/32";
    std::string exact = "sine";
    std::string plot_dir;
    auto* bench = app.add_subcommand("bench", "Convergence study and identity checks on the unit cube");
    bench->set_help_flag("--help", "Print this help message and exit");
    bench->add_option("--d", d, "Dimension (1, 2 or 3)");
    bench->add_option("--h", steps, "Comma-separated steps, e.g. 1/8,1/16");
    bench->add_option("--exact", exact, "Manufactured solution")->check(CLI::IsMember({"sine", "quadratic"}));
    bench->add_option("--plot-dir", plot_dir, "Directory for plot-data files");
    add_output_flags(bench, bench_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInvalid;
    }

    if (*solve) return cmd_solve(path, tol, solve_flags);
    if (*diagnose) return cmd_diagnose(path, diagnose_flags);
    return cmd_bench(d, steps, exact, plot_dir, bench_flags);
}
