#include "nlbvp/solvers.hpp"

#include "nlbvp/error.hpp"
#include "nlbvp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nlbvp {

namespace {

std::string format_number(double value)
{
    std::ostringstream out;
    out.precision(17);
    out << value;
    return out.str();
}

void check_lengths(const AssembledForm& form, const NodeFunction& f, const NodeFunction& g)
{
    NLBVP_REQUIRE(f.size() == form.m(), ErrorCode::DimensionMismatch,
                  "f has " + std::to_string(f.size()) + " values, Omega has " + std::to_string(form.m()));
    NLBVP_REQUIRE(g.size() == form.l(), ErrorCode::DimensionMismatch,
                  "g has " + std::to_string(g.size()) + " values, Gamma has " + std::to_string(form.l()));
}

std::vector<double> neumann_load(const AssembledForm& form, const NodeFunction& f, const NodeFunction& g)
{
    std::vector<double> load(form.n());
    for (std::size_t i = 0; i < form.m(); ++i) load[i] = f[i] * form.mass[i];
    for (std::size_t k = 0; k < form.l(); ++k) load[form.m() + k] = g[k] * form.mass[form.m() + k];
    return load;
}

// CG on D^{-1/2} (M + diag(shift)) D^{-1/2} over Omega u Gamma.
CgResult scaled_full_solve(const AssembledForm& form, std::span<const double> shift, std::span<const double> load,
                           const SolveOptions& options, const OrthonormalSet* projector)
{
    const std::size_t n = form.n();
    std::vector<double> s(n), inv_s(n);
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = std::sqrt(form.mass[i]);
        inv_s[i] = 1.0 / s[i];
    }
    const LinearOperator apply = [&](std::span<const double> x, std::span<double> y) {
        std::vector<double> tmp(n);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] * inv_s[i];
        form.matrix.multiply(tmp, y);
        for (std::size_t i = 0; i < n; ++i) {
            if (!shift.empty()) y[i] += shift[i] * tmp[i];
            y[i] *= inv_s[i];
        }
    };
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = load[i] * inv_s[i];
    std::vector<double> initial;
    if (options.initial_guess) {
        NLBVP_REQUIRE(options.initial_guess->size() == n, ErrorCode::DimensionMismatch,
                      "initial guess must have one value per Omega u Gamma node");
        initial.resize(n);
        for (std::size_t i = 0; i < n; ++i) initial[i] = (*options.initial_guess)[i] * s[i];
    }
    auto result = conjugate_gradient(apply, rhs, initial, {options.tol, options.max_iterations}, projector);
    for (std::size_t i = 0; i < n; ++i) result.x[i] *= inv_s[i];
    return result;
}

void require_converged(const CgResult& result, double tol)
{
    if (!result.converged)
        raise(ErrorCode::NoConvergence, "conjugate gradients stopped after " + std::to_string(result.iterations) +
                                            " iterations with relative residual " +
                                            format_number(result.relative_residual) + " > " + format_number(tol));
}

} // namespace

double default_compatibility_tolerance(const NodeFunction& f, const NodeFunction& g)
{
    double scale = 0.0;
    for (double v : f) scale += std::abs(v);
    for (double v : g) scale += std::abs(v);
    return 1e-9 * scale;
}

Solution solve_dirichlet(const DirichletProblem& p, const SolveOptions& options)
{
    const auto& form = p.form;
    check_lengths(form, p.f, p.g);
    NLBVP_REQUIRE(form.m() > 0, ErrorCode::InvalidArgument, "Omega is empty");
    NLBVP_REQUIRE(options.tol > 0.0, ErrorCode::InvalidArgument, "tolerance must be positive");

    const auto friedrichs = friedrichs_constant(form);
    if (!friedrichs.holds())
        raise(ErrorCode::FriedrichsViolated,
              "Friedrichs inequality violated: the Omega block is singular (smallest eigenvalue " +
                  format_number(friedrichs.eigenvalue) + "), the Dirichlet problem is not well-posed");

    const std::size_t m = form.m();
    // Zero extension of g into Omega; B(g chi_Gamma, v) moves to the right-hand side.
    std::vector<double> rhs(m), coupling(m);
    form.gamma_block.multiply(p.g.span(), coupling);
    for (std::size_t i = 0; i < m; ++i) rhs[i] = p.f[i] * form.mass[i] - coupling[i];

    std::vector<double> initial;
    if (options.initial_guess) {
        NLBVP_REQUIRE(options.initial_guess->size() == m, ErrorCode::DimensionMismatch,
                      "initial guess must have one value per Omega node");
        initial = options.initial_guess->values();
    }
    const LinearOperator apply = [&](std::span<const double> x, std::span<double> y) {
        form.omega_block.multiply(x, y);
    };
    const auto result = conjugate_gradient(apply, rhs, initial, {options.tol, options.max_iterations});
    require_converged(result, options.tol);

    Solution solution;
    solution.u = NodeFunction(form.n());
    for (std::size_t i = 0; i < m; ++i) solution.u[i] = result.x[i];
    for (std::size_t k = 0; k < form.l(); ++k) solution.u[m + k] = p.g[k];
    solution.residual = result.relative_residual;
    solution.iterations = result.iterations;
    return solution;
}

Solution solve_neumann(const NeumannProblem& p, const NullspaceBasis& basis, const SolveOptions& options)
{
    const auto& form = p.form;
    check_lengths(form, p.f, p.g);
    NLBVP_REQUIRE(form.n() > 0, ErrorCode::InvalidArgument, "Omega u Gamma is empty");
    NLBVP_REQUIRE(options.tol > 0.0, ErrorCode::InvalidArgument, "tolerance must be positive");

    const double tol = p.compat_tol.value_or(default_compatibility_tolerance(p.f, p.g));
    const double defect = compatibility_defect(form, p.f, p.g, basis);
    if (defect > tol)
        raise(ErrorCode::IncompatibleData, "compatibility condition violated: the load does not annihilate ker B, "
                                           "defect=" + format_number(defect) + " > " + format_number(tol));

    const auto poincare = poincare_constant(form, basis, PoincareNorm::Full);
    if (!poincare.holds())
        raise(ErrorCode::PoincareViolated,
              "Poincare inequality violated: B has a kernel direction outside the supplied basis (eigenvalue " +
                  format_number(poincare.eigenvalue) + ")");

    OrthonormalSet projector(form.n());
    for (const auto& w : basis.vectors) {
        std::vector<double> q(form.n());
        for (std::size_t i = 0; i < form.n(); ++i) q[i] = w[i] * std::sqrt(form.mass[i]);
        projector.add(q);
    }

    const auto load = neumann_load(form, p.f, p.g);
    const auto result = scaled_full_solve(form, {}, load, options, &projector);
    require_converged(result, options.tol);

    Solution solution;
    solution.u = NodeFunction(result.x);
    solution.residual = result.relative_residual;
    solution.iterations = result.iterations;
    solution.projected = true;
    return solution;
}

Solution solve_regularized(const NeumannProblem& p, const NodeFunction& c, const SolveOptions& options)
{
    const auto& form = p.form;
    check_lengths(form, p.f, p.g);
    NLBVP_REQUIRE(c.size() == form.m(), ErrorCode::DimensionMismatch, "c must have one value per Omega node");
    bool all_zero = true;
    for (double v : c) {
        NLBVP_REQUIRE(std::isfinite(v) && v >= 0.0, ErrorCode::InvalidArgument,
                      "regularization c must be finite and non-negative");
        all_zero = all_zero && v == 0.0;
    }
    if (all_zero) return solve_neumann(p, nullspace(form), options);

    std::vector<double> shift(form.n(), 0.0);
    for (std::size_t i = 0; i < form.m(); ++i) shift[i] = c[i] * form.mass[i];

    // Positive definiteness of D^{-1/2}(M + diag(c m))D^{-1/2}.
    std::vector<double> inv_s(form.n());
    double norm_bound = 0.0, max_diagonal = 0.0;
    for (std::size_t i = 0; i < form.n(); ++i) inv_s[i] = 1.0 / std::sqrt(form.mass[i]);
    {
        const auto rows = form.matrix.row_pointers();
        const auto cols = form.matrix.column_indices();
        const auto vals = form.matrix.values();
        for (std::size_t r = 0; r < form.n(); ++r) {
            double sum = shift[r] * inv_s[r] * inv_s[r];
            double diag = sum;
            for (std::size_t k = rows[r]; k < rows[r + 1]; ++k) {
                const double scaled = vals[k] * inv_s[r] * inv_s[cols[k]];
                sum += std::abs(scaled);
                if (cols[k] == r) diag += scaled;
            }
            norm_bound = std::max(norm_bound, sum);
            max_diagonal = std::max(max_diagonal, diag);
        }
    }
    const LinearOperator apply = [&](std::span<const double> x, std::span<double> y) {
        std::vector<double> tmp(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) tmp[i] = x[i] * inv_s[i];
        form.matrix.multiply(tmp, y);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = (y[i] + shift[i] * tmp[i]) * inv_s[i];
    };
    EigenOptions eig;
    eig.shift = -1e-8 * norm_bound;
    eig.residual_tolerance = 1e-12 * norm_bound;
    const auto lowest = smallest_eigenpair(form.n(), apply, OrthonormalSet(form.n()), eig);
    if (lowest.value <= 1e-9 * max_diagonal)
        raise(ErrorCode::SingularAfterRegularization,
              "regularized form is still singular (smallest eigenvalue " + format_number(lowest.value) +
                  "); some component of Omega u Gamma carries no positive c");

    const auto load = neumann_load(form, p.f, p.g);
    const auto result = scaled_full_solve(form, shift, load, options, nullptr);
    require_converged(result, options.tol);

    Solution solution;
    solution.u = NodeFunction(result.x);
    solution.residual = result.relative_residual;
    solution.iterations = result.iterations;
    return solution;
}

StrongResidual strong_residual(const NodeFunction& u, const TransitionKernel& kernel, const NonlocalDomain& domain,
                               const NodeFunction& f, const NodeFunction& g, BoundaryKind kind,
                               std::span<const double> c)
{
    const std::size_t m = domain.omega_size();
    NLBVP_REQUIRE(u.size() == domain.size(), ErrorCode::DimensionMismatch, "u has the wrong length");
    NLBVP_REQUIRE(f.size() == m && g.size() == domain.gamma_size(), ErrorCode::DimensionMismatch,
                  "f must live on Omega and g on Gamma");
    NLBVP_REQUIRE(c.empty() || c.size() == m, ErrorCode::DimensionMismatch, "c must live on Omega");

    StrongResidual res;
    for (std::size_t i = 0; i < m; ++i) {
        double value = apply_L(kernel, domain, u, domain.node_at(i));
        if (!c.empty()) value += c[i] * u[i];
        res.omega = std::max(res.omega, std::abs(value - f[i]));
    }
    for (std::size_t k = 0; k < domain.gamma_size(); ++k) {
        const double value =
            kind == BoundaryKind::Dirichlet ? u[m + k] : apply_N(kernel, domain, u, domain.node_at(m + k));
        res.gamma = std::max(res.gamma, std::abs(value - g[k]));
    }
    return res;
}

} // namespace nlbvp
