#ifndef NLBVP_IO_HPP
#define NLBVP_IO_HPP

#include "nlbvp/measure_kernel.hpp"
#include "nlbvp/node_function.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace nlbvp {

struct SolutionSummary {
    std::string kind; // dirichlet | neumann | regularized
    double residual = 0.0;
    std::size_t iterations = 0;
    bool projected = false;
};

struct TableRow {
    NodeIndex node = 0;
    std::vector<double> coords;
    Region region = Region::Omega;
    double value = 0.0;
};

/// Tab-separated "node x1 .. xd region value" rows for Omega u Gamma in
/// canonical order, preceded by "# key value" summary lines. Numbers use 17
/// significant digits.
void write_solution_table(std::ostream& out, const AtomicMeasure& measure, const NonlocalDomain& domain,
                          const NodeFunction& u, const SolutionSummary& summary);

/// Throws ParseError on malformed rows.
std::vector<TableRow> read_solution_table(std::istream& in);

/// JSON object with "summary" and "nodes".
std::string solution_json(const AtomicMeasure& measure, const NonlocalDomain& domain, const NodeFunction& u,
                          const SolutionSummary& summary);

std::string format_double(double value);

const char* region_name(Region region) noexcept;

} // namespace nlbvp

#endif
