#ifndef NLBVP_SOLVERS_HPP
#define NLBVP_SOLVERS_HPP

#include "nlbvp/analysis.hpp"
#include "nlbvp/assembly.hpp"
#include "nlbvp/node_function.hpp"

#include <cstddef>
#include <optional>
#include <span>

namespace nlbvp {

struct DirichletProblem {
    const AssembledForm& form;
    NodeFunction f; // on Omega
    NodeFunction g; // on Gamma
};

struct NeumannProblem {
    const AssembledForm& form;
    NodeFunction f; // on Omega
    NodeFunction g; // on Gamma
    std::optional<double> compat_tol; // default 1e-9 (|f|_1 + |g|_1)
};

struct SolveOptions {
    double tol = 1e-12; // relative residual
    std::optional<NodeFunction> initial_guess; // Omega values for Dirichlet, Omega u Gamma otherwise
    std::size_t max_iterations = 0;            // 0 -> CG default
};

struct Solution {
    NodeFunction u; // on Omega u Gamma
    double residual = 0.0;
    std::size_t iterations = 0;
    bool projected = false;
};

double default_compatibility_tolerance(const NodeFunction& f, const NodeFunction& g);

/// Throws FriedrichsViolated when the Omega block is singular, NoConvergence
/// when CG stalls.
Solution solve_dirichlet(const DirichletProblem& p, const SolveOptions& options = {});

/// Representative orthogonal to ker B in the mass product over Omega u Gamma.
/// Throws IncompatibleData, PoincareViolated or NoConvergence.
Solution solve_neumann(const NeumannProblem& p, const NullspaceBasis& basis, const SolveOptions& options = {});

/// Neumann problem for L u + c u with c >= 0 on Omega. c == 0 falls back to
/// solve_neumann; otherwise the shifted form must be positive definite.
Solution solve_regularized(const NeumannProblem& p, const NodeFunction& c, const SolveOptions& options = {});

enum class BoundaryKind { Dirichlet, Neumann };

struct StrongResidual {
    double omega = 0.0; // max |L u + c u - f|
    double gamma = 0.0; // max |u - g| (Dirichlet) or max |N u - g| (Neumann)
};

/// Nodewise residuals of the strong equations. `c` is empty or has one value
/// per Omega node.
StrongResidual strong_residual(const NodeFunction& u, const TransitionKernel& kernel, const NonlocalDomain& domain,
                               const NodeFunction& f, const NodeFunction& g, BoundaryKind kind,
                               std::span<const double> c = {});

} // namespace nlbvp

#endif
