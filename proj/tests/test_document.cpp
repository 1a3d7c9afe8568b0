#include "nlbvp/document.hpp"
#include "nlbvp/error.hpp"
#include "nlbvp/expression.hpp"
#include "nlbvp/io.hpp"
#include "nlbvp/report.hpp"
#include "nlbvp/solvers.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <fstream>
#include <sstream>

using namespace nlbvp;

namespace {

ErrorCode code_of(const std::function<void()>& action)
{
    try {
        action();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no exception";
    return ErrorCode::InvalidArgument;
}

const char* kStencilDoc = R"j({
  "family": "stencil", "dimension": 1, "h": "1/4",
  "nodes": [0, 0.25, 0.5, 0.75, 1],
  "omega": [1, 2, 3],
  "problem": "dirichlet", "f": 1, "g": 0
})j";

} // namespace

TEST(Expression, Arithmetic)
{
    const Expression e("1 + 2*3 - 4/8", {});
    EXPECT_DOUBLE_EQ(e(std::span<const double>{}), 6.5);
    EXPECT_DOUBLE_EQ(Expression("2^3^2", {})(std::span<const double>{}), 512.0);
    EXPECT_DOUBLE_EQ(Expression("-2^2", {})(std::span<const double>{}), -4.0);
    EXPECT_DOUBLE_EQ(Expression("(1+2)*-3", {})(std::span<const double>{}), -9.0);
    EXPECT_DOUBLE_EQ(Expression("1e-3 * 2.5E2", {})(std::span<const double>{}), 0.25);
}

TEST(Expression, FunctionsAndVariables)
{
    const auto vars = coordinate_variables(2);
    EXPECT_EQ(vars, (std::vector<std::string>{"x1", "x2", "x", "y"}));
    const Expression e("sin(pi*x)*sin(pi*y) + exp(0) + sqrt(abs(-4)) + log(e) + cos(0) + tan(0)", vars);
    const std::vector<double> at{0.5, 0.5, 0.5, 0.5};
    EXPECT_NEAR(e(at), 1.0 + 1.0 + 2.0 + 1.0 + 1.0, 1e-15);
    const Expression f("x1 * (1 - x2)", vars);
    EXPECT_DOUBLE_EQ(f(std::vector<double>{0.25, 0.75, 0.25, 0.75}), 0.0625);
    EXPECT_EQ(density_variables(1), (std::vector<std::string>{"x1", "y1", "r"}));
}

TEST(Expression, Errors)
{
    for (const char* bad : {"", "1 +", "(1", "foo(2)", "x", "2 3", "sin 2", "1)"}) {
        EXPECT_EQ(code_of([&] { Expression(bad, {}); }), ErrorCode::ParseError) << bad;
    }
}

TEST(Document, ParseStencil)
{
    const auto doc = parse_document(kStencilDoc);
    EXPECT_EQ(doc.family, KernelFamily::Stencil);
    ASSERT_TRUE(doc.h.has_value());
    EXPECT_DOUBLE_EQ(*doc.h, 0.25);
    EXPECT_EQ(doc.h_text, "1/4");
    EXPECT_EQ(doc.nodes.size(), 5u);
    EXPECT_EQ(doc.omega, (std::vector<NodeIndex>{1, 2, 3}));
    EXPECT_EQ(doc.f.kind, DataSpec::Kind::Number);
}

TEST(Document, RoundTrip)
{
    const char* text = R"j({
      "family": "quadrature", "dimension": 2, "delta": 0.3,
      "nodes": [[0, 0], {"coords": [0.25, 0], "mass": 0.5}, [0.5, 0]],
      "omega": [1], "gamma": "exp(-r)", "problem": "regularized",
      "f": "x*y", "g": [1, 2], "c": {"table": "c.tsv"}, "tol": 1e-10, "compat_tol": 1e-6,
      "out": "sol.tsv", "format": "structured"
    })j";
    const auto doc = parse_document(text);
    EXPECT_EQ(parse_document(serialize_document(doc)), doc);

    const char* graph = R"j({"family": "graph", "vertices": 3, "edges": [[0, 1, 2.0], {"a": 1, "b": 2}],
                           "omega": [1], "problem": "neumann", "f": 0, "g": [1, -1]})j";
    const auto g = parse_document(graph);
    EXPECT_EQ(g.edges.size(), 2u);
    EXPECT_DOUBLE_EQ(g.edges[1].conductance, 1.0);
    EXPECT_EQ(parse_document(serialize_document(g)), g);

    const char* grid = R"j({"family": "stencil", "dimension": 2, "grid": {"inverse_h": 4}, "omega": "interior",
                          "f": "2*pi^2*sin(pi*x)*sin(pi*y)"})j";
    const auto gr = parse_document(grid);
    EXPECT_TRUE(gr.omega_interior);
    EXPECT_EQ(parse_document(serialize_document(gr)), gr);
}

TEST(Document, ParseErrors)
{
    for (const char* bad : {
             "not json",
             "[]",
             R"j({"dimension": 1})j",
             R"j({"family": "spline"})j",
             R"j({"family": "stencil", "unknown": 1})j",
             R"j({"family": "stencil", "dimension": 2, "nodes": [[0]]})j",
             R"j({"family": "stencil", "h": "1/"})j",
             R"j({"family": "stencil", "problem": "robin"})j",
             R"j({"family": "stencil", "format": "xml"})j",
             R"j({"family": "stencil", "omega": "all"})j",
             R"j({"family": "stencil", "f": true})j",
             R"j({"family": "graph", "edges": [[0]]})j",
         }) {
        EXPECT_EQ(code_of([&] { parse_document(bad); }), ErrorCode::ParseError) << bad;
    }
    EXPECT_EQ(code_of([] { load_document("/nonexistent/problem.json"); }), ErrorCode::IoError);
}

TEST(Document, BuildStencilAndSolve)
{
    const auto built = build_problem(parse_document(kStencilDoc));
    EXPECT_EQ(built.form.m(), 3u);
    EXPECT_EQ(built.form.l(), 2u);
    EXPECT_DOUBLE_EQ(built.tol, 1e-12);
    const auto sol = solve_dirichlet({built.form, built.f, built.g});
    EXPECT_NEAR(sol.u[1], 0.125, 1e-14);
}

TEST(Document, BuildFromGridWithExpressions)
{
    const auto built = build_problem(parse_document(R"j({
      "family": "stencil", "dimension": 2, "grid": {"inverse_h": 4}, "omega": "interior",
      "problem": "dirichlet", "f": "x1 + 2*x2", "g": "x*y"})j"));
    EXPECT_EQ(built.form.m(), 9u);
    EXPECT_EQ(built.form.l(), 12u);
    for (std::size_t i = 0; i < built.form.m(); ++i) {
        const auto p = built.measure.point(built.domain.omega()[i]);
        EXPECT_DOUBLE_EQ(built.f[i], p[0] + 2 * p[1]);
    }
    for (std::size_t j = 0; j < built.form.l(); ++j) {
        const auto p = built.measure.point(built.domain.gamma()[j]);
        EXPECT_DOUBLE_EQ(built.g[j], p[0] * p[1]);
    }
}

TEST(Document, BuildQuadratureAndGraph)
{
    const auto q = build_problem(parse_document(R"j({
      "family": "quadrature", "dimension": 1, "delta": 0.3,
      "nodes": [{"coords": 0, "mass": 0.25}, {"coords": 0.25, "mass": 0.25}, {"coords": 0.5, "mass": 0.25},
                {"coords": 0.75, "mass": 0.25}, {"coords": 1, "mass": 0.25}],
      "omega": [2], "gamma": "1", "problem": "dirichlet", "f": 1, "g": 0})j"));
    EXPECT_EQ(q.domain.gamma_size(), 2u);
    EXPECT_DOUBLE_EQ(q.kernel.weight(2, 1), 0.25);

    const auto g = build_problem(parse_document(R"j({
      "family": "graph", "vertices": 3, "edges": [[0, 1], [1, 2]], "omega": [1],
      "problem": "dirichlet", "f": [1], "g": [0, 0, 0]})j"));
    EXPECT_DOUBLE_EQ(g.measure.mass(1), 2.0);
    EXPECT_EQ(g.f, NodeFunction{1.0});
    EXPECT_EQ(g.g, (NodeFunction{0.0, 0.0}));
}

TEST(Document, BuildErrors)
{
    EXPECT_EQ(code_of([] {
                  build_problem(parse_document(
                      R"j({"family": "stencil", "h": 0.25, "nodes": [0, 0.25, 0.5], "omega": []})j"));
              }),
              ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([] {
                  build_problem(parse_document(
                      R"j({"family": "stencil", "h": 0.25, "nodes": [0, 0.25, 0.5], "omega": [7]})j"));
              }),
              ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([] {
                  build_problem(parse_document(
                      R"j({"family": "stencil", "h": 0.25, "nodes": [0, 0.25, 0.5], "omega": [1], "f": [1, 2]})j"));
              }),
              ErrorCode::DimensionMismatch);
    EXPECT_EQ(code_of([] {
                  build_problem(parse_document(R"j({"family": "stencil", "h": 0.25, "nodes": [0, 0.25, 0.5],
                                                   "omega": [1], "problem": "regularized"})j"));
              }),
              ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([] {
                  build_problem(parse_document(
                      R"j({"family": "stencil", "h": 0.3, "nodes": [0, 0.25, 0.5], "omega": [1]})j"));
              }),
              ErrorCode::NonCommensurateGrid);
    EXPECT_EQ(code_of([] {
                  build_problem(parse_document(R"j({"family": "quadrature", "delta": 1, "gamma": "1 + x1",
                                                   "nodes": [0, 0.5, 1], "omega": [1]})j"));
              }),
              ErrorCode::AsymmetricDensity);
    EXPECT_EQ(code_of([] {
                  build_problem(parse_document(R"j({"family": "stencil", "h": 0.5, "nodes": [0, 0.5, 1],
                                                   "omega": [1], "g": {"table": "missing.tsv"}})j"));
              }),
              ErrorCode::IoError);
}

TEST(SolutionTable, RoundTripIsBitExact)
{
    const auto built = build_problem(parse_document(R"j({
      "family": "stencil", "dimension": 2, "grid": {"inverse_h": 6}, "omega": "interior",
      "problem": "dirichlet", "f": "sin(3*x)*exp(y)", "g": "x/3 + y/7"})j"));
    const auto sol = solve_dirichlet({built.form, built.f, built.g});
    std::stringstream table;
    write_solution_table(table, built.measure, built.domain, sol.u, {"dirichlet", sol.residual, sol.iterations, false});
    const auto rows = read_solution_table(table);
    ASSERT_EQ(rows.size(), built.form.n());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i].node, built.domain.node_at(i));
        EXPECT_EQ(rows[i].value, sol.u[i]);
        EXPECT_EQ(rows[i].region, i < built.form.m() ? Region::Omega : Region::Gamma);
        const auto p = built.measure.point(rows[i].node);
        EXPECT_EQ(rows[i].coords, std::vector<double>(p.begin(), p.end()));
    }

    // Re-read as g data: Gamma values come back unchanged.
    const auto dir = std::filesystem::temp_directory_path() / "nlbvp_test_document";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "u.tsv") << table.str();
    const auto again = build_problem(parse_document(R"j({
      "family": "stencil", "dimension": 2, "grid": {"inverse_h": 6}, "omega": "interior",
      "problem": "dirichlet", "f": 0, "g": {"table": "u.tsv"}})j"),
                                     dir);
    for (std::size_t j = 0; j < again.form.l(); ++j) EXPECT_EQ(again.g[j], built.g[j]);
    std::filesystem::remove_all(dir);
}

TEST(SolutionTable, MalformedRows)
{
    std::istringstream bad("node\tx1\tregion\tvalue\n0\t0.5\tsomewhere\t1\n");
    EXPECT_EQ(code_of([&] { read_solution_table(bad); }), ErrorCode::ParseError);
}

TEST(SolutionJson, Structure)
{
    const auto built = build_problem(parse_document(kStencilDoc));
    const auto sol = solve_dirichlet({built.form, built.f, built.g});
    const auto j = nlohmann::json::parse(
        solution_json(built.measure, built.domain, sol.u, {"dirichlet", sol.residual, sol.iterations, false}));
    EXPECT_EQ(j["summary"]["kind"], "dirichlet");
    ASSERT_EQ(j["nodes"].size(), 5u);
    EXPECT_EQ(j["nodes"][1]["value"].get<double>(), sol.u[1]);
    EXPECT_EQ(j["nodes"][3]["region"], "gamma");
    EXPECT_EQ(format_double(0.125), "0.125");
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
}

TEST(Diagnose, StencilZeroKernelAndInterleaved)
{
    const auto stencil = diagnose(build_problem(parse_document(kStencilDoc)));
    EXPECT_EQ(stencil.symmetry_defect, 0.0);
    EXPECT_EQ(stencil.nullspace_dim, 1u);
    EXPECT_TRUE(stencil.strong_poincare);
    EXPECT_NEAR(stencil.friedrichs_constant, 0.10669, 1e-5);
    EXPECT_EQ(stencil.max_principle, std::optional<bool>(false)); // f = 1 pushes the maximum inside
    EXPECT_EQ(stencil.trace_weight_sufficient, (std::vector<double>{16.0, 16.0}));

    const auto zero = diagnose(build_problem(parse_document(R"j({
      "family": "quadrature", "dimension": 1, "delta": 1, "gamma": "0",
      "grid": {"inverse_h": 4}, "omega": "interior", "f": 1})j")));
    EXPECT_EQ(zero.gamma_size, 0u);
    EXPECT_EQ(zero.friedrichs_constant, std::numeric_limits<double>::infinity());
    EXPECT_EQ(zero.nullspace_dim, 3u);
    EXPECT_FALSE(zero.max_principle.has_value());

    const auto inter = diagnose(build_problem(parse_document(R"j({
      "family": "stencil", "dimension": 1, "h": 0.25, "grid": {"inverse_h": 8}, "omega": "interior"})j")));
    EXPECT_EQ(inter.nullspace_dim, 2u);
    EXPECT_FALSE(inter.strong_poincare);
    EXPECT_EQ(inter.friedrichs_constant, std::numeric_limits<double>::infinity());

    std::ostringstream table;
    write_report_table(table, inter);
    EXPECT_NE(table.str().find("nullspace_dim\t2"), std::string::npos);
    const auto j = nlohmann::json::parse(report_json(zero));
    EXPECT_EQ(j["friedrichs_constant"], "inf");
}
