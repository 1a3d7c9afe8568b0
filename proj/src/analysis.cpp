#include "nlbvp/analysis.hpp"

#include "nlbvp/error.hpp"
#include "nlbvp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace nlbvp {

namespace {

constexpr double kRelativeTolerance = 1e-9;
constexpr double kResidualFactor = 1e-12;
constexpr double kShiftFactor = 1e-8;
constexpr double kInfinity = std::numeric_limits<double>::infinity();

// D^{-1/2} A D^{-1/2} for a square sparse block and its diagonal masses.
struct ScaledOperator {
    const SparseMatrix* matrix;
    std::vector<double> inv_sqrt_mass;
    double norm_bound = 0.0;
    double max_diagonal = 0.0;

    ScaledOperator(const SparseMatrix& a, std::span<const double> mass) : matrix(&a), inv_sqrt_mass(mass.size())
    {
        for (std::size_t i = 0; i < mass.size(); ++i) inv_sqrt_mass[i] = 1.0 / std::sqrt(mass[i]);
        const auto rows = a.row_pointers();
        const auto cols = a.column_indices();
        const auto vals = a.values();
        for (std::size_t r = 0; r < a.rows(); ++r) {
            double sum = 0.0;
            for (std::size_t k = rows[r]; k < rows[r + 1]; ++k) {
                const double scaled = std::abs(vals[k]) * inv_sqrt_mass[r] * inv_sqrt_mass[cols[k]];
                sum += scaled;
                if (cols[k] == r) max_diagonal = std::max(max_diagonal, scaled);
            }
            norm_bound = std::max(norm_bound, sum);
        }
    }

    LinearOperator op() const
    {
        return [this](std::span<const double> x, std::span<double> y) {
            std::vector<double> tmp(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) tmp[i] = x[i] * inv_sqrt_mass[i];
            matrix->multiply(tmp, y);
            for (std::size_t i = 0; i < y.size(); ++i) y[i] *= inv_sqrt_mass[i];
        };
    }
};

EigenOptions eigen_options(double norm_bound)
{
    EigenOptions options;
    const double scale = norm_bound > 0.0 ? norm_bound : 1.0;
    options.shift = -kShiftFactor * scale;
    options.residual_tolerance = kResidualFactor * scale;
    return options;
}

double threshold_from(double max_diagonal)
{
    return kRelativeTolerance * (max_diagonal > 0.0 ? max_diagonal : 1.0);
}

std::vector<double> gamma_diagonal(const AssembledForm& form)
{
    std::vector<double> d(form.l());
    for (std::size_t k = 0; k < form.l(); ++k) d[k] = form.matrix.at(form.m() + k, form.m() + k);
    return d;
}

} // namespace

double default_nullspace_tolerance(const AssembledForm& form)
{
    return threshold_from(ScaledOperator(form.matrix, form.mass).max_diagonal);
}

NullspaceBasis nullspace(const AssembledForm& form, std::optional<double> tolerance)
{
    const std::size_t n = form.n();
    NLBVP_REQUIRE(n > 0, ErrorCode::InvalidArgument, "nullspace of an empty domain");
    const ScaledOperator scaled(form.matrix, form.mass);
    NullspaceBasis basis;
    basis.tolerance = tolerance.value_or(threshold_from(scaled.max_diagonal));
    NLBVP_REQUIRE(basis.tolerance > 0.0, ErrorCode::InvalidArgument, "nullspace tolerance must be positive");

    const auto apply = scaled.op();
    const auto options = eigen_options(scaled.norm_bound);
    OrthonormalSet found(n);
    while (found.size() < n) {
        const auto pair = smallest_eigenpair(n, apply, found, options);
        if (pair.value > basis.tolerance) {
            basis.gap = pair.value;
            break;
        }
        if (!found.add(pair.vector)) break;
        NodeFunction w(n);
        const auto& q = found.vectors().back();
        for (std::size_t i = 0; i < n; ++i) w[i] = q[i] * scaled.inv_sqrt_mass[i];
        basis.vectors.push_back(std::move(w));
    }
    return basis;
}

NodeFunction project_out_kernel(const AssembledForm& form, const NodeFunction& u, const NullspaceBasis& basis)
{
    NLBVP_REQUIRE(u.size() == form.n(), ErrorCode::DimensionMismatch, "u has the wrong length");
    const std::size_t m = form.m();
    // Orthonormalize the Omega restrictions under the Omega mass product.
    OrthonormalSet omega_basis(m);
    std::vector<double> sqrt_mass(m);
    for (std::size_t i = 0; i < m; ++i) sqrt_mass[i] = std::sqrt(form.mass[i]);

    // P(u) = sum_k c_k w_k with c solving the Omega Gram system; computed by
    // Gram-Schmidt on the full vectors weighted by the Omega masses only.
    std::vector<std::vector<double>> full; // full-length vectors matching omega_basis entries
    for (const auto& w : basis.vectors) {
        std::vector<double> scaled_omega(m);
        for (std::size_t i = 0; i < m; ++i) scaled_omega[i] = w[i] * sqrt_mass[i];
        std::vector<double> candidate(w.begin(), w.end());
        // Mirror the Gram-Schmidt steps on the full vector.
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t k = 0; k < omega_basis.size(); ++k) {
                const double c = dot(omega_basis.vectors()[k], scaled_omega);
                for (std::size_t i = 0; i < m; ++i) scaled_omega[i] -= c * omega_basis.vectors()[k][i];
                for (std::size_t i = 0; i < candidate.size(); ++i) candidate[i] -= c * full[k][i];
            }
        }
        const double norm = norm2(scaled_omega);
        if (norm <= 1e-10) continue;
        for (double& v : candidate) v /= norm;
        for (double& v : scaled_omega) v /= norm;
        omega_basis.add(scaled_omega, 0.0);
        full.push_back(std::move(candidate));
    }

    NodeFunction result = u;
    for (std::size_t k = 0; k < full.size(); ++k) {
        double c = 0.0;
        for (std::size_t i = 0; i < m; ++i) c += u[i] * full[k][i] * form.mass[i];
        for (std::size_t i = 0; i < result.size(); ++i) result[i] -= c * full[k][i];
    }
    return result;
}

InequalityReport friedrichs_constant(const AssembledForm& form, std::optional<double> tolerance)
{
    const std::size_t m = form.m();
    NLBVP_REQUIRE(m > 0, ErrorCode::InvalidArgument, "Friedrichs constant of an empty Omega");
    const ScaledOperator scaled(form.omega_block, form.omega_mass());
    const double tol = tolerance.value_or(threshold_from(scaled.max_diagonal));

    const auto pair = smallest_eigenpair(m, scaled.op(), OrthonormalSet(m), eigen_options(scaled.norm_bound));
    InequalityReport report;
    report.eigenvalue = pair.value;
    report.constant = pair.value > tol ? 1.0 / pair.value : kInfinity;
    report.witness = NodeFunction(form.n());
    for (std::size_t i = 0; i < m; ++i) report.witness[i] = pair.vector[i] * scaled.inv_sqrt_mass[i];
    return report;
}

InequalityReport poincare_constant(const AssembledForm& form, const NullspaceBasis& basis, PoincareNorm norm)
{
    const std::size_t n = form.n();
    const std::size_t m = form.m();
    InequalityReport report;
    report.witness = NodeFunction(n);

    if (norm == PoincareNorm::Full) {
        const ScaledOperator scaled(form.matrix, form.mass);
        OrthonormalSet deflation(n);
        for (const auto& w : basis.vectors) {
            std::vector<double> q(n);
            for (std::size_t i = 0; i < n; ++i) q[i] = w[i] / scaled.inv_sqrt_mass[i];
            deflation.add(q);
        }
        if (deflation.size() >= n) {
            report.eigenvalue = kInfinity;
            report.constant = 0.0;
            return report;
        }
        const auto pair = smallest_eigenpair(n, scaled.op(), deflation, eigen_options(scaled.norm_bound));
        report.eigenvalue = pair.value;
        report.constant = pair.value > basis.tolerance ? 1.0 / pair.value : kInfinity;
        for (std::size_t i = 0; i < n; ++i) report.witness[i] = pair.vector[i] * scaled.inv_sqrt_mass[i];
        return report;
    }

    NLBVP_REQUIRE(m > 0, ErrorCode::InvalidArgument, "Poincare constant of an empty Omega");
    // Minimizing B over the Gamma values for fixed Omega values leaves the
    // Schur complement S = M_OO - M_OG diag(M_GG)^{-1} M_GO (no Gamma-Gamma coupling).
    const auto gdiag = gamma_diagonal(form);
    for (double d : gdiag)
        NLBVP_REQUIRE(d > 0.0, ErrorCode::InvalidArgument, "Gamma node without coupling to Omega");
    const ScaledOperator scaled(form.omega_block, form.omega_mass());
    const std::size_t l = form.l();
    const LinearOperator schur = [&](std::span<const double> x, std::span<double> y) {
        std::vector<double> tmp(m), gx(l);
        for (std::size_t i = 0; i < m; ++i) tmp[i] = x[i] * scaled.inv_sqrt_mass[i];
        form.omega_block.multiply(tmp, y);
        form.gamma_block.multiply_transpose(tmp, gx);
        for (std::size_t k = 0; k < l; ++k) gx[k] /= gdiag[k];
        std::vector<double> back(m);
        form.gamma_block.multiply(gx, back);
        for (std::size_t i = 0; i < m; ++i) y[i] = (y[i] - back[i]) * scaled.inv_sqrt_mass[i];
    };

    OrthonormalSet deflation(m);
    for (const auto& w : basis.vectors) {
        std::vector<double> q(m);
        for (std::size_t i = 0; i < m; ++i) q[i] = w[i] / scaled.inv_sqrt_mass[i];
        deflation.add(q);
    }
    if (deflation.size() >= m) {
        report.eigenvalue = kInfinity;
        report.constant = 0.0;
        return report;
    }
    const auto pair = smallest_eigenpair(m, schur, deflation, eigen_options(scaled.norm_bound));
    report.eigenvalue = pair.value;
    report.constant = pair.value > basis.tolerance ? 1.0 / pair.value : kInfinity;

    std::vector<double> omega_part(m), gx(l);
    for (std::size_t i = 0; i < m; ++i) omega_part[i] = pair.vector[i] * scaled.inv_sqrt_mass[i];
    form.gamma_block.multiply_transpose(omega_part, gx);
    for (std::size_t i = 0; i < m; ++i) report.witness[i] = omega_part[i];
    for (std::size_t k = 0; k < l; ++k) report.witness[m + k] = -gx[k] / gdiag[k];
    return report;
}

bool strong_poincare_check(const NullspaceBasis& basis)
{
    if (basis.dimension() != 1) return false;
    const auto& w = basis.vectors.front();
    if (w.empty()) return false;
    const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
    const double scale = std::max(std::abs(*lo), std::abs(*hi));
    return scale > 0.0 && (*hi - *lo) <= 1e-10 * scale;
}

bool friedrichs_chain_holds(const TransitionKernel& kernel, const NonlocalDomain& domain,
                            std::span<const std::vector<NodeIndex>> partition)
{
    NLBVP_REQUIRE(!partition.empty(), ErrorCode::InvalidArgument, "partition is empty");
    std::vector<std::size_t> part_of(domain.node_count(), NonlocalDomain::npos);
    std::size_t covered = 0;
    for (std::size_t p = 0; p < partition.size(); ++p) {
        NLBVP_REQUIRE(!partition[p].empty(), ErrorCode::InvalidArgument, "partition has an empty part");
        for (NodeIndex x : partition[p]) {
            NLBVP_REQUIRE(x < domain.node_count() && domain.in_omega(x), ErrorCode::InvalidArgument,
                          "partition node " + std::to_string(x) + " is not in Omega");
            NLBVP_REQUIRE(part_of[x] == NonlocalDomain::npos, ErrorCode::InvalidArgument,
                          "partition parts overlap at node " + std::to_string(x));
            part_of[x] = p;
            ++covered;
        }
    }
    NLBVP_REQUIRE(covered == domain.omega_size(), ErrorCode::InvalidArgument, "partition does not cover Omega");

    for (std::size_t p = 0; p < partition.size(); ++p) {
        for (NodeIndex x : partition[p]) {
            const double alpha =
                p == 0 ? kernel.mass_on(x, [&](NodeIndex t) { return domain.in_gamma(t); })
                       : kernel.mass_on(x, [&](NodeIndex t) { return part_of[t] == p - 1; });
            if (!(alpha > 0.0)) return false;
        }
    }
    return true;
}

TraceWeight trace_weight(const TransitionKernel& kernel, const NonlocalDomain& domain, TraceVariant variant,
                         double c)
{
    TraceWeight weight;
    weight.variant = variant;
    weight.c = c;
    weight.omega_weight = NodeFunction(domain.gamma_size());
    auto in_omega = [&](NodeIndex t) { return domain.in_omega(t); };
    auto in_gamma = [&](NodeIndex t) { return domain.in_gamma(t); };

    if (variant == TraceVariant::Necessary)
        NLBVP_REQUIRE(c > 0.0, ErrorCode::NonPositiveC, "regularization constant c must be positive");

    for (std::size_t k = 0; k < domain.gamma_size(); ++k) {
        const NodeIndex y = domain.gamma()[k];
        if (variant == TraceVariant::Sufficient) {
            weight.omega_weight[k] = kernel.mass_on(y, in_omega);
        } else {
            double sum = 0.0;
            for (const auto& e : kernel.support(y))
                if (in_omega(e.target)) sum += e.weight / (kernel.mass_on(e.target, in_gamma) + c);
            weight.omega_weight[k] = sum;
        }
    }
    return weight;
}

double compatibility_defect(const AssembledForm& form, const NodeFunction& f, const NodeFunction& g,
                            const NullspaceBasis& basis)
{
    NLBVP_REQUIRE(f.size() == form.m(), ErrorCode::DimensionMismatch, "f must live on Omega");
    NLBVP_REQUIRE(g.size() == form.l(), ErrorCode::DimensionMismatch, "g must live on Gamma");
    double defect = 0.0;
    for (const auto& w : basis.vectors) {
        double value = 0.0;
        for (std::size_t i = 0; i < form.m(); ++i) value += f[i] * w[i] * form.mass[i];
        for (std::size_t k = 0; k < form.l(); ++k)
            value += g[k] * w[form.m() + k] * form.mass[form.m() + k];
        defect = std::max(defect, std::abs(value));
    }
    return defect;
}

ContinuousFunctionalReport continuous_functional_check(const AssembledForm& form, const NodeFunction& g,
                                                       const TraceWeight& weight)
{
    NLBVP_REQUIRE(g.size() == form.l() && weight.omega_weight.size() == form.l(), ErrorCode::DimensionMismatch,
                  "g and the trace weight must live on Gamma");
    ContinuousFunctionalReport report;
    report.min_weight = form.l() ? kInfinity : 0.0;
    for (std::size_t k = 0; k < form.l(); ++k) {
        const double w = weight.omega_weight[k];
        report.min_weight = std::min(report.min_weight, w);
        report.weighted_sum += g[k] * g[k] * form.mass[form.m() + k] / w;
    }
    report.essinf_positive = form.l() == 0 || report.min_weight > 0.0;
    report.finite_integral = std::isfinite(report.weighted_sum);
    report.ill_conditioned = form.l() > 0 && report.min_weight < 1e-12;
    return report;
}

namespace {

bool compare_extrema(const AssembledForm& form, const NodeFunction& u, bool positive_part_on_gamma)
{
    NLBVP_REQUIRE(u.size() == form.n(), ErrorCode::DimensionMismatch, "u has the wrong length");
    NLBVP_REQUIRE(form.l() > 0, ErrorCode::EmptyGamma, "maximum principle is vacuous: Gamma is empty");
    if (form.m() == 0) return true;
    const auto omega = u.span().first(form.m());
    const auto gamma = u.span().subspan(form.m());
    const double max_omega = *std::max_element(omega.begin(), omega.end());
    double max_gamma = *std::max_element(gamma.begin(), gamma.end());
    if (positive_part_on_gamma) max_gamma = std::max(max_gamma, 0.0);
    double scale = 0.0;
    for (double v : u) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) scale = 1.0;
    return max_omega <= max_gamma + 1e-12 * scale;
}

} // namespace

bool max_principle_check(const AssembledForm& form, const NodeFunction& u)
{
    return compare_extrema(form, u, false);
}

bool weak_max_principle_check(const AssembledForm& form, const NodeFunction& u)
{
    return compare_extrema(form, u, true);
}

} // namespace nlbvp
