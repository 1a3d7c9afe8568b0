#include "nlbvp/document.hpp"

#include "nlbvp/error.hpp"
#include "nlbvp/expression.hpp"
#include "nlbvp/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace nlbvp {

using json = nlohmann::ordered_json;

const char* to_string(ProblemKind kind) noexcept
{
    switch (kind) {
    case ProblemKind::Dirichlet: return "dirichlet";
    case ProblemKind::Neumann: return "neumann";
    case ProblemKind::Regularized: return "regularized";
    }
    return "?";
}

namespace {

[[noreturn]] void parse_fail(const std::string& msg)
{
    raise(ErrorCode::ParseError, msg);
}

double as_number(const json& value, const std::string& field)
{
    if (!value.is_number()) parse_fail("field '" + field + "' must be a number");
    return value.get<double>();
}

std::size_t as_count(const json& value, const std::string& field)
{
    if (!value.is_number_integer() || value.get<long long>() < 0)
        parse_fail("field '" + field + "' must be a non-negative integer");
    return value.get<std::size_t>();
}

double constant_expression(const std::string& text, const std::string& field)
{
    try {
        return Expression(text, {})(std::span<const double>{});
    } catch (const Error& e) {
        parse_fail("field '" + field + "': " + e.what());
    }
}

DataSpec parse_data(const json& value, const std::string& field)
{
    DataSpec spec;
    if (value.is_number()) {
        spec.kind = DataSpec::Kind::Number;
        spec.number = value.get<double>();
    } else if (value.is_string()) {
        spec.kind = DataSpec::Kind::Expression;
        spec.text = value.get<std::string>();
    } else if (value.is_array()) {
        spec.kind = DataSpec::Kind::Values;
        for (const auto& v : value) spec.values.push_back(as_number(v, field));
    } else if (value.is_object() && value.contains("table") && value["table"].is_string()) {
        spec.kind = DataSpec::Kind::Table;
        spec.text = value["table"].get<std::string>();
    } else {
        parse_fail("field '" + field + "' must be a number, an expression, an array or {\"table\": path}");
    }
    return spec;
}

json data_to_json(const DataSpec& spec)
{
    switch (spec.kind) {
    case DataSpec::Kind::None: return nullptr;
    case DataSpec::Kind::Number: return spec.number;
    case DataSpec::Kind::Expression: return spec.text;
    case DataSpec::Kind::Values: return spec.values;
    case DataSpec::Kind::Table: return json{{"table", spec.text}};
    }
    return nullptr;
}

KernelFamily parse_family(const std::string& name)
{
    if (name == "stencil") return KernelFamily::Stencil;
    if (name == "graph") return KernelFamily::Graph;
    if (name == "quadrature") return KernelFamily::Quadrature;
    parse_fail("unknown family '" + name + "' (expected stencil, graph or quadrature)");
}

ProblemKind parse_kind(const std::string& name)
{
    if (name == "dirichlet") return ProblemKind::Dirichlet;
    if (name == "neumann") return ProblemKind::Neumann;
    if (name == "regularized") return ProblemKind::Regularized;
    parse_fail("unknown problem kind '" + name + "' (expected dirichlet, neumann or regularized)");
}

const std::vector<std::string> kKnownFields = {"family", "dimension", "h", "delta", "nodes", "grid",
                                                "vertices", "edges", "omega", "gamma", "problem", "f",
                                                "g", "c", "tol", "compat_tol", "out", "format"};

} // namespace

ProblemDocument parse_document(std::string_view json_text)
{
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        parse_fail(std::string("malformed JSON: ") + e.what());
    }
    if (!root.is_object()) parse_fail("problem document must be a JSON object");
    for (const auto& [key, _] : root.items())
        if (std::find(kKnownFields.begin(), kKnownFields.end(), key) == kKnownFields.end())
            parse_fail("unknown field '" + key + "'");

    ProblemDocument doc;
    if (!root.contains("family") || !root["family"].is_string()) parse_fail("missing string field 'family'");
    doc.family = parse_family(root["family"].get<std::string>());
    if (root.contains("dimension")) doc.dimension = as_count(root["dimension"], "dimension");
    if (doc.dimension == 0) parse_fail("field 'dimension' must be positive");

    if (root.contains("h")) {
        const auto& h = root["h"];
        if (h.is_string()) {
            doc.h_text = h.get<std::string>();
            doc.h = constant_expression(doc.h_text, "h");
        } else {
            doc.h = as_number(h, "h");
        }
    }
    if (root.contains("delta")) doc.delta = as_number(root["delta"], "delta");

    if (root.contains("nodes")) {
        if (!root["nodes"].is_array()) parse_fail("field 'nodes' must be an array");
        for (const auto& entry : root["nodes"]) {
            NodeSpec node;
            const json* coords = &entry;
            if (entry.is_object()) {
                if (!entry.contains("coords")) parse_fail("node objects need 'coords'");
                coords = &entry["coords"];
                if (entry.contains("mass")) node.mass = as_number(entry["mass"], "nodes.mass");
            }
            if (coords->is_number()) {
                node.coords.push_back(coords->get<double>());
            } else if (coords->is_array()) {
                for (const auto& c : *coords) node.coords.push_back(as_number(c, "nodes"));
            } else {
                parse_fail("node coordinates must be a number or an array");
            }
            if (node.coords.size() != doc.dimension)
                parse_fail("node " + std::to_string(doc.nodes.size()) + " has " + std::to_string(node.coords.size()) +
                           " coordinates, dimension is " + std::to_string(doc.dimension));
            doc.nodes.push_back(std::move(node));
        }
    }
    if (root.contains("grid")) {
        const auto& g = root["grid"];
        if (!g.is_object() || !g.contains("inverse_h")) parse_fail("field 'grid' needs 'inverse_h'");
        GridSpec grid;
        grid.inverse_h = as_count(g["inverse_h"], "grid.inverse_h");
        if (g.contains("lower")) grid.lower = as_number(g["lower"], "grid.lower");
        if (g.contains("upper")) grid.upper = as_number(g["upper"], "grid.upper");
        if (grid.inverse_h < 1 || !(grid.upper > grid.lower)) parse_fail("field 'grid' describes an empty lattice");
        doc.grid = grid;
    }
    if (root.contains("vertices")) doc.vertices = as_count(root["vertices"], "vertices");
    if (root.contains("edges")) {
        if (!root["edges"].is_array()) parse_fail("field 'edges' must be an array");
        for (const auto& e : root["edges"]) {
            EdgeSpec edge;
            if (e.is_array() && (e.size() == 2 || e.size() == 3)) {
                edge.a = as_count(e[0], "edges");
                edge.b = as_count(e[1], "edges");
                if (e.size() == 3) edge.conductance = as_number(e[2], "edges");
            } else if (e.is_object() && e.contains("a") && e.contains("b")) {
                edge.a = as_count(e["a"], "edges.a");
                edge.b = as_count(e["b"], "edges.b");
                if (e.contains("conductance")) edge.conductance = as_number(e["conductance"], "edges.conductance");
            } else {
                parse_fail("edges must be [a, b, conductance] or {\"a\", \"b\", \"conductance\"}");
            }
            doc.edges.push_back(edge);
        }
    }
    if (root.contains("omega")) {
        const auto& o = root["omega"];
        if (o.is_string() && o.get<std::string>() == "interior") {
            doc.omega_interior = true;
        } else if (o.is_array()) {
            for (const auto& i : o) doc.omega.push_back(as_count(i, "omega"));
        } else {
            parse_fail("field 'omega' must be an array of node indices or \"interior\"");
        }
    }
    if (root.contains("gamma")) {
        if (!root["gamma"].is_string()) parse_fail("field 'gamma' must be an expression string");
        doc.gamma = root["gamma"].get<std::string>();
    }
    if (root.contains("problem")) {
        if (!root["problem"].is_string()) parse_fail("field 'problem' must be a string");
        doc.problem = parse_kind(root["problem"].get<std::string>());
    }
    if (root.contains("f")) doc.f = parse_data(root["f"], "f");
    if (root.contains("g")) doc.g = parse_data(root["g"], "g");
    if (root.contains("c")) doc.c = parse_data(root["c"], "c");
    if (root.contains("tol")) doc.tol = as_number(root["tol"], "tol");
    if (root.contains("compat_tol")) doc.compat_tol = as_number(root["compat_tol"], "compat_tol");
    if (root.contains("out")) {
        if (!root["out"].is_string()) parse_fail("field 'out' must be a string");
        doc.out = root["out"].get<std::string>();
    }
    if (root.contains("format")) {
        if (!root["format"].is_string()) parse_fail("field 'format' must be a string");
        doc.format = root["format"].get<std::string>();
        if (*doc.format != "table" && *doc.format != "structured")
            parse_fail("field 'format' must be \"table\" or \"structured\"");
    }
    return doc;
}

ProblemDocument load_document(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open problem document '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_document(text.str());
}

std::string serialize_document(const ProblemDocument& doc)
{
    json root;
    root["family"] = to_string(doc.family);
    root["dimension"] = doc.dimension;
    if (!doc.h_text.empty())
        root["h"] = doc.h_text;
    else if (doc.h)
        root["h"] = *doc.h;
    if (doc.delta) root["delta"] = *doc.delta;
    if (!doc.nodes.empty()) {
        json nodes = json::array();
        for (const auto& n : doc.nodes) {
            if (n.mass)
                nodes.push_back({{"coords", n.coords}, {"mass", *n.mass}});
            else
                nodes.push_back(n.coords);
        }
        root["nodes"] = std::move(nodes);
    }
    if (doc.grid)
        root["grid"] = {{"inverse_h", doc.grid->inverse_h}, {"lower", doc.grid->lower}, {"upper", doc.grid->upper}};
    if (doc.vertices) root["vertices"] = doc.vertices;
    if (!doc.edges.empty()) {
        json edges = json::array();
        for (const auto& e : doc.edges) edges.push_back({e.a, e.b, e.conductance});
        root["edges"] = std::move(edges);
    }
    if (doc.omega_interior)
        root["omega"] = "interior";
    else
        root["omega"] = doc.omega;
    if (doc.family == KernelFamily::Quadrature || doc.gamma != "1") root["gamma"] = doc.gamma;
    root["problem"] = to_string(doc.problem);
    if (doc.f.kind != DataSpec::Kind::None) root["f"] = data_to_json(doc.f);
    if (doc.g.kind != DataSpec::Kind::None) root["g"] = data_to_json(doc.g);
    if (doc.c.kind != DataSpec::Kind::None) root["c"] = data_to_json(doc.c);
    if (doc.tol) root["tol"] = *doc.tol;
    if (doc.compat_tol) root["compat_tol"] = *doc.compat_tol;
    if (doc.out) root["out"] = *doc.out;
    if (doc.format) root["format"] = *doc.format;
    return root.dump(2) + "\n";
}

namespace {

NodeFunction evaluate_data(const DataSpec& spec, const std::string& field, const AtomicMeasure& measure,
                           std::span<const NodeIndex> nodes, const std::filesystem::path& base_dir)
{
    NodeFunction out(nodes.size());
    switch (spec.kind) {
    case DataSpec::Kind::None: break;
    case DataSpec::Kind::Number:
        for (auto& v : out) v = spec.number;
        break;
    case DataSpec::Kind::Expression: {
        const std::size_t d = measure.dimension();
        const Expression expr(spec.text, coordinate_variables(d));
        std::vector<double> values(d + std::min<std::size_t>(d, 3));
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const auto p = measure.point(nodes[i]);
            for (std::size_t k = 0; k < d; ++k) values[k] = p[k];
            for (std::size_t k = 0; k < std::min<std::size_t>(d, 3); ++k) values[d + k] = p[k];
            out[i] = expr(values);
        }
        break;
    }
    case DataSpec::Kind::Values:
        if (spec.values.size() == nodes.size()) {
            out = NodeFunction(spec.values);
        } else if (spec.values.size() == measure.size()) {
            for (std::size_t i = 0; i < nodes.size(); ++i) out[i] = spec.values[nodes[i]];
        } else {
            raise(ErrorCode::DimensionMismatch, "field '" + field + "' has " + std::to_string(spec.values.size()) +
                                                    " values; expected " + std::to_string(nodes.size()) +
                                                    " (region) or " + std::to_string(measure.size()) + " (all nodes)");
        }
        break;
    case DataSpec::Kind::Table: {
        const auto path = base_dir.empty() ? std::filesystem::path(spec.text) : base_dir / spec.text;
        std::ifstream in(path);
        if (!in) raise(ErrorCode::IoError, "cannot open table '" + path.string() + "' for field '" + field + "'");
        std::map<NodeIndex, double> by_node;
        for (const auto& row : read_solution_table(in)) by_node[row.node] = row.value;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const auto it = by_node.find(nodes[i]);
            NLBVP_REQUIRE(it != by_node.end(), ErrorCode::InvalidArgument,
                          "table '" + path.string() + "' has no value for node " + std::to_string(nodes[i]));
            out[i] = it->second;
        }
        break;
    }
    }
    for (double v : out)
        NLBVP_REQUIRE(std::isfinite(v), ErrorCode::InvalidArgument, "field '" + field + "' has a non-finite value");
    return out;
}

std::vector<double> lattice(std::size_t d, const GridSpec& grid, std::vector<NodeIndex>& interior)
{
    const std::size_t side = grid.inverse_h + 1;
    std::size_t count = 1;
    for (std::size_t k = 0; k < d; ++k) count *= side;
    std::vector<double> coords(count * d);
    const double step = (grid.upper - grid.lower) / static_cast<double>(grid.inverse_h);
    for (std::size_t node = 0; node < count; ++node) {
        std::size_t rest = node;
        bool inside = true;
        for (std::size_t k = d; k-- > 0;) {
            const std::size_t digit = rest % side;
            rest /= side;
            coords[node * d + k] = digit == grid.inverse_h ? grid.upper : grid.lower + static_cast<double>(digit) * step;
            inside = inside && digit != 0 && digit != grid.inverse_h;
        }
        if (inside) interior.push_back(node);
    }
    return coords;
}

} // namespace

BuiltProblem build_problem(const ProblemDocument& doc, const std::filesystem::path& base_dir)
{
    const std::size_t d = doc.dimension;
    std::vector<NodeIndex> interior;
    std::optional<AtomicMeasure> measure;
    std::optional<TransitionKernel> kernel;

    if (doc.family == KernelFamily::Graph) {
        const std::size_t count =
            doc.vertices ? doc.vertices : (doc.nodes.empty() ? 0 : doc.nodes.size());
        NLBVP_REQUIRE(count > 0, ErrorCode::InvalidArgument, "graph documents need 'vertices' and 'edges'");
        std::vector<GraphEdge> edges;
        for (const auto& e : doc.edges) edges.push_back({e.a, e.b, e.conductance});
        auto graph = graph_kernel(count, edges);
        measure.emplace(std::move(graph.measure));
        kernel.emplace(std::move(graph.kernel));
    } else {
        std::vector<double> coords;
        std::vector<double> masses;
        if (doc.grid) {
            NLBVP_REQUIRE(doc.nodes.empty(), ErrorCode::InvalidArgument, "give either 'nodes' or 'grid', not both");
            coords = lattice(d, *doc.grid, interior);
            masses.assign(coords.size() / d, 1.0);
        } else {
            for (const auto& n : doc.nodes) {
                coords.insert(coords.end(), n.coords.begin(), n.coords.end());
                masses.push_back(n.mass.value_or(1.0));
            }
        }
        NLBVP_REQUIRE(!masses.empty(), ErrorCode::InvalidArgument, "document has no nodes");
        measure.emplace(d, std::move(coords), std::move(masses));

        if (doc.family == KernelFamily::Stencil) {
            double h = 0.0;
            if (doc.h)
                h = *doc.h;
            else if (doc.grid)
                h = (doc.grid->upper - doc.grid->lower) / static_cast<double>(doc.grid->inverse_h);
            NLBVP_REQUIRE(h > 0.0, ErrorCode::InvalidArgument, "stencil documents need a positive 'h'");
            kernel.emplace(stencil_kernel(d, h, *measure));
        } else {
            NLBVP_REQUIRE(doc.delta && *doc.delta > 0.0, ErrorCode::InvalidArgument,
                          "quadrature documents need a positive 'delta'");
            const auto density = std::make_shared<Expression>(doc.gamma, density_variables(d));
            const DensityFunction gamma = [density, d](std::span<const double> x, std::span<const double> y) {
                std::vector<double> values(2 * d + 1);
                double r2 = 0.0;
                for (std::size_t k = 0; k < d; ++k) {
                    values[k] = x[k];
                    values[d + k] = y[k];
                    r2 += (x[k] - y[k]) * (x[k] - y[k]);
                }
                values[2 * d] = std::sqrt(r2);
                return (*density)(values);
            };
            kernel.emplace(quadrature_kernel(gamma, *doc.delta, *measure));
        }
    }

    std::vector<NodeIndex> omega = doc.omega;
    if (doc.omega_interior) {
        NLBVP_REQUIRE(doc.grid.has_value(), ErrorCode::InvalidArgument, "\"omega\": \"interior\" requires a grid");
        omega = interior;
    }
    NLBVP_REQUIRE(!omega.empty(), ErrorCode::InvalidArgument, "Omega is empty: the document lists no omega nodes");
    for (NodeIndex x : omega)
        NLBVP_REQUIRE(x < measure->size(), ErrorCode::InvalidArgument,
                      "omega references node " + std::to_string(x) + " but there are only " +
                          std::to_string(measure->size()) + " nodes");
    auto domain = nonlocal_boundary(*kernel, omega, *measure);
    auto form = assemble_form(*kernel, *measure, domain);

    NodeFunction f = evaluate_data(doc.f, "f", *measure, domain.omega(), base_dir);
    NodeFunction g = evaluate_data(doc.g, "g", *measure, domain.gamma(), base_dir);
    NodeFunction c;
    if (doc.problem == ProblemKind::Regularized) {
        NLBVP_REQUIRE(doc.c.kind != DataSpec::Kind::None, ErrorCode::InvalidArgument,
                      "regularized problems need the field 'c'");
        c = evaluate_data(doc.c, "c", *measure, domain.omega(), base_dir);
    }
    const double tol = doc.tol.value_or(1e-12);
    NLBVP_REQUIRE(tol > 0.0, ErrorCode::InvalidArgument, "field 'tol' must be positive");

    return {std::move(*measure), std::move(*kernel), std::move(domain), std::move(form), doc.problem,
            std::move(f), std::move(g), std::move(c), tol, doc.compat_tol};
}

} // namespace nlbvp
