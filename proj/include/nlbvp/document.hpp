#ifndef NLBVP_DOCUMENT_HPP
#define NLBVP_DOCUMENT_HPP

#include "nlbvp/assembly.hpp"
#include "nlbvp/measure_kernel.hpp"
#include "nlbvp/node_function.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nlbvp {

enum class ProblemKind { Dirichlet, Neumann, Regularized };

const char* to_string(ProblemKind kind) noexcept;

/// Per-node data: a constant, an expression over coordinates, explicit
/// values (region order, or indexed by node when the array covers every
/// node), or a solution table read from disk.
struct DataSpec {
    enum class Kind { None, Number, Expression, Values, Table } kind = Kind::None;
    double number = 0.0;
    std::string text; // expression or table path
    std::vector<double> values;

    friend bool operator==(const DataSpec&, const DataSpec&) = default;
};

struct NodeSpec {
    std::vector<double> coords;
    std::optional<double> mass;

    friend bool operator==(const NodeSpec&, const NodeSpec&) = default;
};

/// Lattice {lower + k (upper - lower) / inverse_h}^d.
struct GridSpec {
    std::size_t inverse_h = 0;
    double lower = 0.0;
    double upper = 1.0;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct EdgeSpec {
    NodeIndex a = 0;
    NodeIndex b = 0;
    double conductance = 1.0;

    friend bool operator==(const EdgeSpec&, const EdgeSpec&) = default;
};

struct ProblemDocument {
    KernelFamily family = KernelFamily::Stencil;
    std::size_t dimension = 1;
    std::optional<double> h;
    std::string h_text; // original string form of h, if given as an expression
    std::optional<double> delta;
    std::vector<NodeSpec> nodes;
    std::optional<GridSpec> grid;
    std::size_t vertices = 0; // graph family
    std::vector<EdgeSpec> edges;
    std::vector<NodeIndex> omega;
    bool omega_interior = false; // "omega": "interior" with a grid
    std::string gamma = "1";     // quadrature density over x1.., y1.., r
    ProblemKind problem = ProblemKind::Dirichlet;
    DataSpec f;
    DataSpec g;
    DataSpec c;
    std::optional<double> tol;
    std::optional<double> compat_tol;
    std::optional<std::string> out;
    std::optional<std::string> format;

    friend bool operator==(const ProblemDocument&, const ProblemDocument&) = default;
};

/// Throws ParseError for malformed JSON, unknown values or missing fields.
ProblemDocument parse_document(std::string_view json_text);
ProblemDocument load_document(const std::filesystem::path& path);
std::string serialize_document(const ProblemDocument& doc);

struct BuiltProblem {
    AtomicMeasure measure;
    TransitionKernel kernel;
    NonlocalDomain domain;
    AssembledForm form;
    ProblemKind kind;
    NodeFunction f; // on Omega
    NodeFunction g; // on Gamma
    NodeFunction c; // on Omega; empty unless regularized
    double tol;
    std::optional<double> compat_tol;
};

/// Builds measure, kernel, domain and form, and evaluates the data. Table
/// paths are resolved against `base_dir`.
BuiltProblem build_problem(const ProblemDocument& doc, const std::filesystem::path& base_dir = {});

} // namespace nlbvp

#endif
