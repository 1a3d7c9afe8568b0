#include "nlbvp/io.hpp"

#include "nlbvp/error.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace nlbvp {

std::string format_double(double value)
{
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

const char* region_name(Region region) noexcept
{
    switch (region) {
    case Region::Omega: return "omega";
    case Region::Gamma: return "gamma";
    case Region::Exterior: return "exterior";
    }
    return "?";
}

void write_solution_table(std::ostream& out, const AtomicMeasure& measure, const NonlocalDomain& domain,
                          const NodeFunction& u, const SolutionSummary& summary)
{
    NLBVP_REQUIRE(u.size() == domain.size(), ErrorCode::DimensionMismatch, "solution has the wrong length");
    out << "# kind " << summary.kind << '\n'
        << "# residual " << format_double(summary.residual) << '\n'
        << "# iterations " << summary.iterations << '\n'
        << "# projected " << (summary.projected ? 1 : 0) << '\n'
        << "node";
    for (std::size_t k = 1; k <= measure.dimension(); ++k) out << "\tx" << k;
    out << "\tregion\tvalue\n";
    for (std::size_t i = 0; i < domain.size(); ++i) {
        const NodeIndex node = domain.node_at(i);
        out << node;
        for (double c : measure.point(node)) out << '\t' << format_double(c);
        out << '\t' << region_name(domain.region(node)) << '\t' << format_double(u[i]) << '\n';
    }
}

std::vector<TableRow> read_solution_table(std::istream& in)
{
    std::vector<TableRow> rows;
    std::string line;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            if (line.rfind("node", 0) == 0) continue;
        }
        std::vector<std::string> fields;
        std::istringstream split(line);
        for (std::string field; std::getline(split, field, '\t');) fields.push_back(field);
        NLBVP_REQUIRE(fields.size() >= 3, ErrorCode::ParseError,
                      "solution table line " + std::to_string(line_no) + " has too few columns");
        TableRow row;
        try {
            std::size_t used = 0;
            row.node = std::stoull(fields.front(), &used);
            NLBVP_REQUIRE(used == fields.front().size(), ErrorCode::ParseError, "bad node index");
            for (std::size_t k = 1; k + 2 < fields.size(); ++k) row.coords.push_back(std::stod(fields[k]));
            row.value = std::stod(fields.back());
        } catch (const std::logic_error&) {
            raise(ErrorCode::ParseError, "solution table line " + std::to_string(line_no) + " is malformed");
        }
        const auto& region = fields[fields.size() - 2];
        if (region == "omega")
            row.region = Region::Omega;
        else if (region == "gamma")
            row.region = Region::Gamma;
        else
            raise(ErrorCode::ParseError,
                  "solution table line " + std::to_string(line_no) + " has unknown region '" + region + "'");
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string solution_json(const AtomicMeasure& measure, const NonlocalDomain& domain, const NodeFunction& u,
                          const SolutionSummary& summary)
{
    NLBVP_REQUIRE(u.size() == domain.size(), ErrorCode::DimensionMismatch, "solution has the wrong length");
    nlohmann::ordered_json doc;
    doc["summary"] = {{"kind", summary.kind},
                      {"residual", summary.residual},
                      {"iterations", summary.iterations},
                      {"projected", summary.projected}};
    auto nodes = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < domain.size(); ++i) {
        const NodeIndex node = domain.node_at(i);
        const auto p = measure.point(node);
        nodes.push_back({{"node", node},
                         {"coords", std::vector<double>(p.begin(), p.end())},
                         {"region", region_name(domain.region(node))},
                         {"value", u[i]}});
    }
    doc["nodes"] = std::move(nodes);
    return doc.dump(2) + "\n";
}

} // namespace nlbvp
