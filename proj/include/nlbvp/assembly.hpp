#ifndef NLBVP_ASSEMBLY_HPP
#define NLBVP_ASSEMBLY_HPP

#include "nlbvp/linalg.hpp"
#include "nlbvp/measure_kernel.hpp"
#include "nlbvp/node_function.hpp"

#include <cstddef>
#include <vector>

namespace nlbvp {

/// Sparse matrix of the bilinear form in the canonical Omega-then-Gamma
/// ordering, plus its Omega/Gamma blocks and the node masses.
///
/// For u, v on Omega u Gamma:
///   v^T M u = 1/2 sum_{x in Omega} m_x sum_{y in Omega} K(x,{y}) (u(x)-u(y)) (v(x)-v(y))
///           +     sum_{x in Omega} m_x sum_{y in Gamma} K(x,{y}) (u(x)-u(y)) (v(x)-v(y)).
struct AssembledForm {
    SparseMatrix matrix;      // n x n
    SparseMatrix omega_block; // m x m leading block
    SparseMatrix gamma_block; // m x l coupling block
    std::vector<double> mass; // node masses over Omega u Gamma
    NonlocalDomain domain;

    std::size_t m() const noexcept { return domain.omega_size(); }
    std::size_t l() const noexcept { return domain.gamma_size(); }
    std::size_t n() const noexcept { return domain.size(); }

    std::span<const double> omega_mass() const noexcept { return std::span(mass).first(m()); }
    std::span<const double> gamma_mass() const noexcept { return std::span(mass).subspan(m()); }
};

inline constexpr double kAssemblySymmetryThreshold = 1e-10;

/// Refuses kernels whose symmetry defect exceeds kAssemblySymmetryThreshold.
AssembledForm assemble_form(const TransitionKernel& kernel, const AtomicMeasure& measure,
                            const NonlocalDomain& domain);

double bilinear(const AssembledForm& form, const NodeFunction& u, const NodeFunction& v);

/// Nonlocal operator at an Omega node: sum_y K(x,{y}) (u(x) - u(y)). The
/// argument x is a node index of the measure; u lives on Omega u Gamma.
double apply_L(const TransitionKernel& kernel, const NonlocalDomain& domain, const NodeFunction& u,
               NodeIndex x);

/// Neumann operator at a Gamma node: sum_{x in Omega} K(y,{x}) (u(y) - u(x)).
double apply_N(const TransitionKernel& kernel, const NonlocalDomain& domain, const NodeFunction& u,
               NodeIndex y);

struct IbpTerms {
    double interior = 0.0; // sum_Omega L u * v * m
    double form = 0.0;     // B(u, v)
    double boundary = 0.0; // sum_Gamma N u * v * m
    double scale = 0.0;    // sum of absolute contributions, for relative comparisons

    double residual() const noexcept;
};

IbpTerms ibp_terms(const AssembledForm& form, const TransitionKernel& kernel, const NodeFunction& u,
                   const NodeFunction& v);

/// |sum_Omega L u v m - B(u,v) + sum_Gamma N u v m|
double ibp_residual(const AssembledForm& form, const TransitionKernel& kernel, const NodeFunction& u,
                    const NodeFunction& v);

/// 1/2 B(v,v) - sum_Omega f v m, with f on Omega and v on Omega u Gamma.
double energy_dirichlet(const AssembledForm& form, const NodeFunction& f, const NodeFunction& v);

/// 1/2 B(v,v) - (sum_Omega f v m + sum_Gamma g v m).
double energy_neumann(const AssembledForm& form, const NodeFunction& f, const NodeFunction& g,
                      const NodeFunction& v);

NodeFunction positive_part(const NodeFunction& u);
NodeFunction negative_part(const NodeFunction& u);

/// sum_Omega u^2 m + sum_{x in Omega} m_x sum_y K(x,{y}) (u(x)-u(y))^2
double v_norm_squared(const AssembledForm& form, const TransitionKernel& kernel, const NodeFunction& u);

/// sum over the Omega u Gamma nodes of u^2 m.
double l2_norm_squared(const AssembledForm& form, const NodeFunction& u);

/// sum over Omega of u^2 m (u on Omega u Gamma).
double l2_omega_norm_squared(const AssembledForm& form, const NodeFunction& u);

} // namespace nlbvp

#endif
