#ifndef NLBVP_ANALYSIS_HPP
#define NLBVP_ANALYSIS_HPP

#include "nlbvp/assembly.hpp"
#include "nlbvp/measure_kernel.hpp"
#include "nlbvp/node_function.hpp"

#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace nlbvp {

/// Basis of ker B, orthonormal in the mass-weighted inner product over
/// Omega u Gamma.
struct NullspaceBasis {
    std::vector<NodeFunction> vectors;
    double tolerance = 0.0;
    // Smallest generalized eigenvalue above the tolerance; +inf when the
    // kernel is the whole space.
    double gap = std::numeric_limits<double>::infinity();

    std::size_t dimension() const noexcept { return vectors.size(); }
};

/// Default eigenvalue threshold: 1e-9 times the largest mass-scaled diagonal.
double default_nullspace_tolerance(const AssembledForm& form);

/// Generalized eigenvectors of M w = lambda D w (D = masses over Omega u Gamma)
/// with lambda below `tolerance`.
NullspaceBasis nullspace(const AssembledForm& form, std::optional<double> tolerance = std::nullopt);

/// u - P(u), where P is the mass-weighted L2(Omega) projection onto span(basis).
NodeFunction project_out_kernel(const AssembledForm& form, const NodeFunction& u, const NullspaceBasis& basis);

struct InequalityReport {
    double constant = std::numeric_limits<double>::infinity();
    double eigenvalue = 0.0;
    NodeFunction witness; // on Omega u Gamma

    bool holds() const noexcept { return constant < std::numeric_limits<double>::infinity(); }
};

/// Friedrichs constant on V_0 from the smallest eigenvalue of the Omega block
/// against the Omega masses.
InequalityReport friedrichs_constant(const AssembledForm& form, std::optional<double> tolerance = std::nullopt);

enum class PoincareNorm {
    Omega, // inf_w ||v - w||^2_{L2(Omega)} <= C B(v,v)
    Full,  // ||v||^2_{L2(Omega u Gamma)} <= C B(v,v) for v mass-orthogonal to ker B
};

InequalityReport poincare_constant(const AssembledForm& form, const NullspaceBasis& basis,
                                   PoincareNorm norm = PoincareNorm::Full);

/// True iff ker B is exactly the constants.
bool strong_poincare_check(const NullspaceBasis& basis);

/// Chain criterion: alpha_1 = min_{x in part 1} K(x, Gamma) > 0 and
/// alpha_i = min_{x in part i} K(x, part i-1) > 0. The parts must partition Omega.
bool friedrichs_chain_holds(const TransitionKernel& kernel, const NonlocalDomain& domain,
                            std::span<const std::vector<NodeIndex>> partition);

enum class TraceVariant { Sufficient, Necessary };

struct TraceWeight {
    NodeFunction omega_weight; // on Gamma
    TraceVariant variant = TraceVariant::Sufficient;
    double c = 0.0;
};

/// Sufficient: w(y) = K(y, Omega).
/// Necessary:  w(y) = sum_{s in Omega} K(y,{s}) / (K(s, Gamma) + c), c > 0.
TraceWeight trace_weight(const TransitionKernel& kernel, const NonlocalDomain& domain, TraceVariant variant,
                         double c = 0.0);

/// max over basis vectors w of |sum_Omega f w m + sum_Gamma g w m|.
double compatibility_defect(const AssembledForm& form, const NodeFunction& f, const NodeFunction& g,
                            const NullspaceBasis& basis);

struct ContinuousFunctionalReport {
    double weighted_sum = 0.0; // sum_Gamma g^2 m / w
    double min_weight = 0.0;
    bool essinf_positive = true;
    bool finite_integral = true;
    bool ill_conditioned = false; // some weight below 1e-12

    bool passes() const noexcept { return essinf_positive && finite_integral; }
};

ContinuousFunctionalReport continuous_functional_check(const AssembledForm& form, const NodeFunction& g,
                                                       const TraceWeight& weight);

/// max_Omega u <= max_Gamma u (up to 1e-12 of the data scale). Throws EmptyGamma.
bool max_principle_check(const AssembledForm& form, const NodeFunction& u);

/// Weakened form for regularized operators: max_Omega u <= max_Gamma u^+.
bool weak_max_principle_check(const AssembledForm& form, const NodeFunction& u);

} // namespace nlbvp

#endif
