#include "nlbvp/measure_kernel.hpp"

#include "nlbvp/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace nlbvp {

namespace {

double distance(std::span<const double> a, std::span<const double> b)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        sum += diff * diff;
    }
    return std::sqrt(sum);
}

std::string describe_point(std::span<const double> p)
{
    std::ostringstream out;
    out.precision(17);
    out << '(';
    for (std::size_t i = 0; i < p.size(); ++i) out << (i ? ", " : "") << p[i];
    out << ')';
    return out.str();
}

// Sort by target, merge duplicate targets, drop zero weights and self loops.
std::vector<KernelEntry> normalize_support(NodeIndex self, std::vector<KernelEntry> entries,
                                           std::size_t node_count)
{
    std::sort(entries.begin(), entries.end(),
              [](const KernelEntry& a, const KernelEntry& b) { return a.target < b.target; });
    std::vector<KernelEntry> merged;
    merged.reserve(entries.size());
    for (const auto& e : entries) {
        NLBVP_REQUIRE(e.target < node_count, ErrorCode::InvalidArgument,
                      "kernel entry targets node " + std::to_string(e.target) + " outside the measure");
        NLBVP_REQUIRE(e.weight >= 0.0 && std::isfinite(e.weight), ErrorCode::InvalidArgument,
                      "kernel weights must be finite and non-negative");
        if (e.target == self) continue;
        if (!merged.empty() && merged.back().target == e.target)
            merged.back().weight += e.weight;
        else
            merged.push_back(e);
    }
    std::erase_if(merged, [](const KernelEntry& e) { return e.weight == 0.0; });
    return merged;
}

} // namespace

// ---------------------------------------------------------------------------
// SpatialIndex

std::size_t SpatialIndex::KeyHash::operator()(const std::vector<std::int64_t>& key) const noexcept
{
    std::size_t seed = key.size();
    for (auto k : key)
        seed ^= std::hash<std::int64_t>{}(k) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
    return seed;
}

SpatialIndex::SpatialIndex(std::size_t dimension, std::span<const double> coordinates, double cell)
    : dimension_(dimension), coordinates_(coordinates), cell_(cell)
{
    NLBVP_REQUIRE(dimension > 0, ErrorCode::InvalidArgument, "dimension must be positive");
    NLBVP_REQUIRE(cell > 0.0 && std::isfinite(cell), ErrorCode::InvalidArgument,
                  "spatial index cell size must be positive");
    const std::size_t n = coordinates.size() / dimension;
    for (NodeIndex i = 0; i < n; ++i)
        cells_[key_of(coordinates.subspan(i * dimension, dimension))].push_back(i);
}

std::vector<std::int64_t> SpatialIndex::key_of(std::span<const double> point) const
{
    constexpr double limit = 4e18;
    std::vector<std::int64_t> key(dimension_);
    for (std::size_t i = 0; i < dimension_; ++i) {
        const double scaled = std::floor(point[i] / cell_);
        NLBVP_REQUIRE(std::isfinite(scaled) && std::abs(scaled) < limit, ErrorCode::InvalidArgument,
                      "coordinate " + std::to_string(point[i]) + " too large for lookup tolerance");
        key[i] = static_cast<std::int64_t>(scaled);
    }
    return key;
}

void SpatialIndex::for_each_within(std::span<const double> point, double radius,
                                   const std::function<void(NodeIndex, double)>& visit) const
{
    const auto center = key_of(point);
    const auto reach = static_cast<std::int64_t>(std::ceil(radius / cell_));
    std::vector<std::int64_t> offset(dimension_, -reach);
    std::vector<std::int64_t> key(dimension_);
    while (true) {
        for (std::size_t i = 0; i < dimension_; ++i) key[i] = center[i] + offset[i];
        if (auto it = cells_.find(key); it != cells_.end()) {
            for (NodeIndex node : it->second) {
                const double dist = distance(point, coordinates_.subspan(node * dimension_, dimension_));
                if (dist <= radius) visit(node, dist);
            }
        }
        std::size_t axis = 0;
        while (axis < dimension_ && offset[axis] == reach) offset[axis++] = -reach;
        if (axis == dimension_) break;
        ++offset[axis];
    }
}

std::optional<NodeIndex> SpatialIndex::nearest_within(std::span<const double> point, double radius) const
{
    std::optional<NodeIndex> best;
    double best_dist = std::numeric_limits<double>::infinity();
    for_each_within(point, radius, [&](NodeIndex node, double dist) {
        if (dist < best_dist || (dist == best_dist && best && node < *best)) {
            best = node;
            best_dist = dist;
        }
    });
    return best;
}

// ---------------------------------------------------------------------------
// AtomicMeasure

AtomicMeasure::AtomicMeasure(std::size_t dimension, std::vector<double> coordinates,
                             std::vector<double> masses, double tolerance)
    : dimension_(dimension),
      coordinates_(std::make_shared<const std::vector<double>>(std::move(coordinates))),
      masses_(std::move(masses)),
      tolerance_(tolerance)
{
    NLBVP_REQUIRE(dimension_ > 0, ErrorCode::InvalidArgument, "measure dimension must be positive");
    NLBVP_REQUIRE(tolerance_ > 0.0, ErrorCode::InvalidArgument, "lookup tolerance must be positive");
    NLBVP_REQUIRE(coordinates_->size() == masses_.size() * dimension_, ErrorCode::DimensionMismatch,
                  "coordinate count does not match node count times dimension");
    for (double c : *coordinates_)
        NLBVP_REQUIRE(std::isfinite(c), ErrorCode::InvalidArgument, "node coordinates must be finite");
    for (std::size_t i = 0; i < masses_.size(); ++i)
        NLBVP_REQUIRE(masses_[i] > 0.0 && std::isfinite(masses_[i]), ErrorCode::InvalidArgument,
                      "mass of node " + std::to_string(i) + " is not strictly positive");

    index_ = std::make_shared<const SpatialIndex>(dimension_, std::span<const double>(*coordinates_),
                                                  tolerance_);
    for (NodeIndex i = 0; i < size(); ++i) {
        index_->for_each_within(point(i), tolerance_, [&](NodeIndex other, double) {
            NLBVP_REQUIRE(other == i, ErrorCode::InvalidArgument,
                          "nodes " + std::to_string(std::min(i, other)) + " and " +
                              std::to_string(std::max(i, other)) + " coincide at " +
                              describe_point(point(i)));
        });
    }
}

AtomicMeasure AtomicMeasure::with_unit_masses(std::size_t dimension, std::vector<double> coordinates,
                                              double tolerance)
{
    NLBVP_REQUIRE(dimension > 0, ErrorCode::InvalidArgument, "measure dimension must be positive");
    const std::size_t n = coordinates.size() / dimension;
    return AtomicMeasure(dimension, std::move(coordinates), std::vector<double>(n, 1.0), tolerance);
}

std::span<const double> AtomicMeasure::point(NodeIndex i) const
{
    NLBVP_REQUIRE(i < size(), ErrorCode::InvalidArgument, "node index out of range");
    return std::span<const double>(*coordinates_).subspan(i * dimension_, dimension_);
}

double AtomicMeasure::total_mass() const noexcept
{
    return std::accumulate(masses_.begin(), masses_.end(), 0.0);
}

std::optional<NodeIndex> AtomicMeasure::find(std::span<const double> p) const
{
    NLBVP_REQUIRE(p.size() == dimension_, ErrorCode::DimensionMismatch, "point dimension mismatch");
    return index_->nearest_within(p, tolerance_);
}

// ---------------------------------------------------------------------------
// TransitionKernel

const char* to_string(KernelFamily family) noexcept
{
    switch (family) {
    case KernelFamily::Stencil: return "stencil";
    case KernelFamily::Graph: return "graph";
    case KernelFamily::Quadrature: return "quadrature";
    }
    return "unknown";
}

TransitionKernel::TransitionKernel(KernelFamily family, std::vector<std::vector<KernelEntry>> supports,
                                   KernelParameters parameters)
    : family_(family), parameters_(parameters), supports_(std::move(supports))
{
    for (NodeIndex x = 0; x < supports_.size(); ++x)
        supports_[x] = normalize_support(x, std::move(supports_[x]), supports_.size());
}

std::size_t TransitionKernel::entry_count() const noexcept
{
    std::size_t count = 0;
    for (const auto& s : supports_) count += s.size();
    return count;
}

double TransitionKernel::weight(NodeIndex x, NodeIndex y) const
{
    const auto& s = supports_.at(x);
    auto it = std::lower_bound(s.begin(), s.end(), y,
                               [](const KernelEntry& e, NodeIndex t) { return e.target < t; });
    return (it != s.end() && it->target == y) ? it->weight : 0.0;
}

double TransitionKernel::mass_on(NodeIndex x, const std::function<bool(NodeIndex)>& in_set) const
{
    double sum = 0.0;
    for (const auto& e : supports_.at(x))
        if (in_set(e.target)) sum += e.weight;
    return sum;
}

double TransitionKernel::total(NodeIndex x) const
{
    double sum = 0.0;
    for (const auto& e : supports_.at(x)) sum += e.weight;
    return sum;
}

// ---------------------------------------------------------------------------
// Kernel families

TransitionKernel stencil_kernel(std::size_t dimension, double h, const AtomicMeasure& measure)
{
    NLBVP_REQUIRE(h > 0.0 && std::isfinite(h), ErrorCode::InvalidArgument, "stencil step h must be positive");
    NLBVP_REQUIRE(dimension == measure.dimension(), ErrorCode::DimensionMismatch,
                  "stencil dimension differs from the measure dimension");

    const double tol = h * 1e-9;
    const SpatialIndex index(dimension, measure.coordinates(), tol);
    const double weight = 1.0 / (h * h);

    // Per-axis coordinate ranges of nodes sharing the remaining coordinates,
    // used to tell "absent beyond the lattice" from "between two nodes".
    auto lies_between_nodes = [&](std::span<const double> target, std::size_t axis) {
        bool below = false;
        bool above = false;
        for (NodeIndex j = 0; j < measure.size() && !(below && above); ++j) {
            const auto q = measure.point(j);
            bool same_line = true;
            for (std::size_t k = 0; k < dimension && same_line; ++k)
                if (k != axis && std::abs(q[k] - target[k]) > tol) same_line = false;
            if (!same_line) continue;
            if (q[axis] < target[axis]) below = true;
            if (q[axis] > target[axis]) above = true;
        }
        return below && above;
    };

    std::vector<std::vector<KernelEntry>> supports(measure.size());
    std::vector<double> target(dimension);
    for (NodeIndex x = 0; x < measure.size(); ++x) {
        const auto p = measure.point(x);
        for (std::size_t axis = 0; axis < dimension; ++axis) {
            for (double sign : {1.0, -1.0}) {
                std::copy(p.begin(), p.end(), target.begin());
                target[axis] += sign * h;
                if (auto y = index.nearest_within(target, tol)) {
                    supports[x].push_back({*y, weight});
                } else if (lies_between_nodes(target, axis)) {
                    raise(ErrorCode::NonCommensurateGrid,
                          "stencil target " + describe_point(target) + " of node " + std::to_string(x) +
                              " falls between lattice nodes; h is not commensurate with the grid");
                }
            }
        }
    }
    return TransitionKernel(KernelFamily::Stencil, std::move(supports), {h, dimension, 0.0});
}

GraphKernel graph_kernel(std::size_t vertex_count, std::span<const GraphEdge> edges)
{
    NLBVP_REQUIRE(vertex_count > 0, ErrorCode::InvalidArgument, "graph needs at least one vertex");
    std::vector<double> degree(vertex_count, 0.0);
    for (const auto& e : edges) {
        NLBVP_REQUIRE(e.a < vertex_count && e.b < vertex_count, ErrorCode::InvalidArgument,
                      "edge references a vertex outside the graph");
        NLBVP_REQUIRE(e.a != e.b, ErrorCode::InvalidArgument, "self loops are not allowed");
        NLBVP_REQUIRE(e.conductance > 0.0 && std::isfinite(e.conductance),
                      ErrorCode::NonPositiveConductance,
                      "conductance of edge " + std::to_string(e.a) + "-" + std::to_string(e.b) +
                          " is not strictly positive");
        degree[e.a] += e.conductance;
        degree[e.b] += e.conductance;
    }
    for (std::size_t v = 0; v < vertex_count; ++v)
        NLBVP_REQUIRE(degree[v] > 0.0, ErrorCode::IsolatedVertex,
                      "vertex " + std::to_string(v) + " has no incident edge");

    std::vector<std::vector<KernelEntry>> supports(vertex_count);
    for (const auto& e : edges) {
        supports[e.a].push_back({e.b, e.conductance / degree[e.a]});
        supports[e.b].push_back({e.a, e.conductance / degree[e.b]});
    }
    std::vector<double> coordinates(vertex_count);
    std::iota(coordinates.begin(), coordinates.end(), 0.0);
    return {TransitionKernel(KernelFamily::Graph, std::move(supports), {0.0, 1, 0.0}),
            AtomicMeasure(1, std::move(coordinates), std::move(degree))};
}

TransitionKernel quadrature_kernel(const DensityFunction& gamma, double delta, const AtomicMeasure& measure)
{
    NLBVP_REQUIRE(delta > 0.0 && std::isfinite(delta), ErrorCode::InvalidArgument,
                  "interaction radius delta must be positive");
    NLBVP_REQUIRE(static_cast<bool>(gamma), ErrorCode::InvalidArgument, "density evaluator is empty");

    const SpatialIndex index(measure.dimension(), measure.coordinates(), delta);
    const double reach = delta * (1.0 + 1e-12);
    std::vector<std::vector<KernelEntry>> supports(measure.size());
    for (NodeIndex x = 0; x < measure.size(); ++x) {
        const auto px = measure.point(x);
        index.for_each_within(px, reach, [&](NodeIndex y, double dist) {
            if (y == x || dist == 0.0) return;
            const auto py = measure.point(y);
            const double forward = gamma(px, py);
            const double backward = gamma(py, px);
            NLBVP_REQUIRE(std::isfinite(forward) && forward >= 0.0, ErrorCode::InvalidArgument,
                          "density must be finite and non-negative");
            const double scale = std::max({std::abs(forward), std::abs(backward), 1e-300});
            NLBVP_REQUIRE(std::abs(forward - backward) <= 1e-12 * scale, ErrorCode::AsymmetricDensity,
                          "density is not symmetric at " + describe_point(px) + ", " + describe_point(py));
            supports[x].push_back({y, forward * measure.mass(y)});
        });
    }
    return TransitionKernel(KernelFamily::Quadrature, std::move(supports),
                            {0.0, measure.dimension(), delta});
}

// ---------------------------------------------------------------------------
// Domain

NonlocalDomain::NonlocalDomain(std::size_t node_count, std::vector<NodeIndex> omega,
                               std::vector<NodeIndex> gamma, std::vector<NodeIndex> weakly_coupled)
    : omega_(std::move(omega)),
      gamma_(std::move(gamma)),
      region_(node_count, Region::Exterior),
      local_(node_count, npos),
      weakly_coupled_(std::move(weakly_coupled))
{
    std::size_t local = 0;
    for (NodeIndex x : omega_) {
        NLBVP_REQUIRE(x < node_count, ErrorCode::InvalidArgument, "omega node out of range");
        NLBVP_REQUIRE(region_[x] == Region::Exterior, ErrorCode::InvalidArgument,
                      "node " + std::to_string(x) + " listed twice in the domain");
        region_[x] = Region::Omega;
        local_[x] = local++;
    }
    for (NodeIndex y : gamma_) {
        NLBVP_REQUIRE(y < node_count, ErrorCode::InvalidArgument, "gamma node out of range");
        NLBVP_REQUIRE(region_[y] == Region::Exterior, ErrorCode::InvalidArgument,
                      "node " + std::to_string(y) + " is in both omega and gamma");
        region_[y] = Region::Gamma;
        local_[y] = local++;
    }
    for (NodeIndex z = 0; z < node_count; ++z)
        if (region_[z] == Region::Exterior) exterior_.push_back(z);
}

NodeIndex NonlocalDomain::node_at(std::size_t local) const
{
    NLBVP_REQUIRE(local < size(), ErrorCode::InvalidArgument, "local index out of range");
    return local < omega_.size() ? omega_[local] : gamma_[local - omega_.size()];
}

NonlocalDomain nonlocal_boundary(const TransitionKernel& kernel, std::span<const NodeIndex> omega,
                                 const AtomicMeasure& measure)
{
    NLBVP_REQUIRE(kernel.node_count() == measure.size(), ErrorCode::DimensionMismatch,
                  "kernel and measure have different node counts");
    std::vector<NodeIndex> sorted(omega.begin(), omega.end());
    std::sort(sorted.begin(), sorted.end());
    NLBVP_REQUIRE(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
                  ErrorCode::InvalidArgument, "omega lists a node twice");
    std::vector<bool> is_omega(measure.size(), false);
    for (NodeIndex x : sorted) {
        NLBVP_REQUIRE(x < measure.size(), ErrorCode::InvalidArgument,
                      "omega node " + std::to_string(x) + " is not a node of the measure");
        is_omega[x] = true;
    }

    std::vector<NodeIndex> gamma;
    std::vector<NodeIndex> weak;
    for (NodeIndex y = 0; y < measure.size(); ++y) {
        if (is_omega[y]) continue;
        const double coupling = kernel.mass_on(y, [&](NodeIndex t) { return is_omega[t]; });
        if (coupling > 0.0) {
            gamma.push_back(y);
            if (coupling < 1e-14) weak.push_back(y);
        }
    }
    return NonlocalDomain(measure.size(), std::move(sorted), std::move(gamma), std::move(weak));
}

double symmetry_defect(const TransitionKernel& kernel, const AtomicMeasure& measure)
{
    NLBVP_REQUIRE(kernel.node_count() == measure.size(), ErrorCode::DimensionMismatch,
                  "kernel and measure have different node counts");
    double defect = 0.0;
    for (NodeIndex x = 0; x < kernel.node_count(); ++x) {
        for (const auto& e : kernel.support(x)) {
            const double forward = measure.mass(x) * e.weight;
            const double backward = measure.mass(e.target) * kernel.weight(e.target, x);
            defect = std::max(defect, std::abs(forward - backward));
        }
    }
    return defect;
}

} // namespace nlbvp
