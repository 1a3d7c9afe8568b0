#ifndef NLBVP_MEASURE_KERNEL_HPP
#define NLBVP_MEASURE_KERNEL_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace nlbvp {

using NodeIndex = std::size_t;

inline constexpr double kDefaultLookupTolerance = 1e-12;

// Hash grid over node coordinates. Cells have edge length `cell`; a query of
// radius r scans ceil(r / cell) neighbouring cells per axis.
class SpatialIndex {
public:
    SpatialIndex(std::size_t dimension, std::span<const double> coordinates, double cell);

    std::optional<NodeIndex> nearest_within(std::span<const double> point, double radius) const;
    void for_each_within(std::span<const double> point, double radius,
                         const std::function<void(NodeIndex, double)>& visit) const;

    double cell() const noexcept { return cell_; }

private:
    struct KeyHash {
        std::size_t operator()(const std::vector<std::int64_t>& key) const noexcept;
    };

    std::vector<std::int64_t> key_of(std::span<const double> point) const;

    std::size_t dimension_;
    std::span<const double> coordinates_;
    double cell_;
    std::unordered_map<std::vector<std::int64_t>, std::vector<NodeIndex>, KeyHash> cells_;
};

/// Finite set of weighted points in R^d.
///
/// Masses are strictly positive and nodes are pairwise distinct under the
/// lookup tolerance; both are checked on construction.
class AtomicMeasure {
public:
    AtomicMeasure(std::size_t dimension, std::vector<double> coordinates, std::vector<double> masses,
                  double tolerance = kDefaultLookupTolerance);

    static AtomicMeasure with_unit_masses(std::size_t dimension, std::vector<double> coordinates,
                                          double tolerance = kDefaultLookupTolerance);

    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t size() const noexcept { return masses_.size(); }
    double tolerance() const noexcept { return tolerance_; }

    std::span<const double> point(NodeIndex i) const;
    std::span<const double> coordinates() const noexcept { return *coordinates_; }
    double mass(NodeIndex i) const { return masses_[i]; }
    std::span<const double> masses() const noexcept { return masses_; }
    double total_mass() const noexcept;

    std::optional<NodeIndex> find(std::span<const double> point) const;

private:
    std::size_t dimension_;
    // Heap-held so the index's view survives moves of the measure.
    std::shared_ptr<const std::vector<double>> coordinates_;
    std::vector<double> masses_;
    double tolerance_;
    std::shared_ptr<const SpatialIndex> index_;
};

struct KernelEntry {
    NodeIndex target;
    double weight;
};

enum class KernelFamily { Stencil, Graph, Quadrature };

const char* to_string(KernelFamily family) noexcept;

struct KernelParameters {
    double h = 0.0;          // stencil step
    std::size_t dimension = 0;
    double delta = 0.0;      // quadrature interaction radius
};

/// Materialized transition kernel: one finite neighbour list per node.
///
/// Supports are sorted by target, carry strictly positive weights, and never
/// contain the node itself.
class TransitionKernel {
public:
    TransitionKernel(KernelFamily family, std::vector<std::vector<KernelEntry>> supports,
                     KernelParameters parameters = {});

    KernelFamily family() const noexcept { return family_; }
    const KernelParameters& parameters() const noexcept { return parameters_; }
    std::size_t node_count() const noexcept { return supports_.size(); }
    std::size_t entry_count() const noexcept;

    std::span<const KernelEntry> support(NodeIndex x) const { return supports_.at(x); }

    /// K(x, {y}).
    double weight(NodeIndex x, NodeIndex y) const;

    /// K(x, S) for the set S given as a membership predicate.
    double mass_on(NodeIndex x, const std::function<bool(NodeIndex)>& in_set) const;

    /// Total outgoing weight K(x, R^d).
    double total(NodeIndex x) const;

private:
    KernelFamily family_;
    KernelParameters parameters_;
    std::vector<std::vector<KernelEntry>> supports_;
};

/// Symmetric, non-negative density gamma(x, y) used by quadrature kernels.
using DensityFunction = std::function<double(std::span<const double>, std::span<const double>)>;

struct GraphEdge {
    NodeIndex a;
    NodeIndex b;
    double conductance;
};

struct GraphKernel {
    TransitionKernel kernel;
    AtomicMeasure measure;
};

/// (2d+1)-point stencil kernel: weight 1/h^2 towards x +- h e_i whenever that
/// lattice point is a node of the measure.
TransitionKernel stencil_kernel(std::size_t dimension, double h, const AtomicMeasure& measure);

/// Degree-normalized kernel of a weighted graph together with its degree
/// measure. Vertices are placed at integer positions on a line.
GraphKernel graph_kernel(std::size_t vertex_count, std::span<const GraphEdge> edges);

/// Quadrature of the density kernel: weight gamma(x, y) * mass(y) for every
/// node y with 0 < |x - y| <= delta. Asymmetric densities are rejected.
TransitionKernel quadrature_kernel(const DensityFunction& gamma, double delta,
                                   const AtomicMeasure& measure);

enum class Region : std::uint8_t { Omega, Gamma, Exterior };

/// Partition of the node set into Omega, its nonlocal boundary Gamma, and the
/// exterior, with the canonical Omega-then-Gamma ordering.
class NonlocalDomain {
public:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    NonlocalDomain(std::size_t node_count, std::vector<NodeIndex> omega, std::vector<NodeIndex> gamma,
                   std::vector<NodeIndex> weakly_coupled = {});

    std::span<const NodeIndex> omega() const noexcept { return omega_; }
    std::span<const NodeIndex> gamma() const noexcept { return gamma_; }
    std::span<const NodeIndex> exterior() const noexcept { return exterior_; }

    std::size_t omega_size() const noexcept { return omega_.size(); }
    std::size_t gamma_size() const noexcept { return gamma_.size(); }
    std::size_t size() const noexcept { return omega_.size() + gamma_.size(); }
    std::size_t node_count() const noexcept { return region_.size(); }

    Region region(NodeIndex node) const { return region_.at(node); }
    bool in_omega(NodeIndex node) const { return region(node) == Region::Omega; }
    bool in_gamma(NodeIndex node) const { return region(node) == Region::Gamma; }

    /// Position in the canonical ordering, or npos for exterior nodes.
    std::size_t local_index(NodeIndex node) const { return local_.at(node); }
    NodeIndex node_at(std::size_t local) const;

    /// Gamma nodes whose coupling K(y, Omega) is below 1e-14.
    std::span<const NodeIndex> weakly_coupled() const noexcept { return weakly_coupled_; }

private:
    std::vector<NodeIndex> omega_;
    std::vector<NodeIndex> gamma_;
    std::vector<NodeIndex> exterior_;
    std::vector<Region> region_;
    std::vector<std::size_t> local_;
    std::vector<NodeIndex> weakly_coupled_;
};

NonlocalDomain nonlocal_boundary(const TransitionKernel& kernel, std::span<const NodeIndex> omega,
                                 const AtomicMeasure& measure);

/// max over node pairs of |m(x) K(x,{y}) - m(y) K(y,{x})|.
double symmetry_defect(const TransitionKernel& kernel, const AtomicMeasure& measure);

} // namespace nlbvp

#endif
