#include "nlbvp/assembly.hpp"

#include "nlbvp/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nlbvp {

namespace {

void require_full(const AssembledForm& form, const NodeFunction& u, const char* name)
{
    NLBVP_REQUIRE(u.size() == form.n(), ErrorCode::DimensionMismatch,
                  std::string(name) + " has length " + std::to_string(u.size()) + ", expected " +
                      std::to_string(form.n()));
}

double value_at(const NonlocalDomain& domain, const NodeFunction& u, NodeIndex node)
{
    const auto local = domain.local_index(node);
    NLBVP_REQUIRE(local != NonlocalDomain::npos, ErrorCode::InvalidArgument,
                  "node " + std::to_string(node) + " lies outside Omega u Gamma");
    return u[local];
}

} // namespace

AssembledForm assemble_form(const TransitionKernel& kernel, const AtomicMeasure& measure,
                            const NonlocalDomain& domain)
{
    NLBVP_REQUIRE(kernel.node_count() == measure.size() && domain.node_count() == measure.size(),
                  ErrorCode::DimensionMismatch, "kernel, measure and domain disagree on the node count");
    const double defect = symmetry_defect(kernel, measure);
    if (defect > kAssemblySymmetryThreshold) {
        std::ostringstream msg;
        msg << "kernel is not symmetric with respect to the measure (defect " << defect << ")";
        raise(ErrorCode::AsymmetricKernel, msg.str());
    }

    const std::size_t m = domain.omega_size();
    const std::size_t n = domain.size();
    std::vector<Triplet> triplets;
    triplets.reserve(4 * kernel.entry_count());

    auto add_pair = [&](std::size_t i, std::size_t j, double w) {
        triplets.push_back({i, i, w});
        triplets.push_back({j, j, w});
        triplets.push_back({i, j, -w});
        triplets.push_back({j, i, -w});
    };

    for (NodeIndex x : domain.omega()) {
        const std::size_t i = domain.local_index(x);
        const double mx = measure.mass(x);
        for (const auto& e : kernel.support(x)) {
            switch (domain.region(e.target)) {
            case Region::Omega:
                // Each ordered pair contributes half; the reverse pair supplies the rest.
                add_pair(i, domain.local_index(e.target), 0.5 * mx * e.weight);
                break;
            case Region::Gamma:
                add_pair(i, domain.local_index(e.target), mx * e.weight);
                break;
            case Region::Exterior:
                // Impossible for a symmetric kernel: the target would belong to Gamma.
                break;
            }
        }
    }

    AssembledForm form{SparseMatrix(n, n, triplets), {}, {}, {}, domain};

    std::vector<Triplet> omega_part;
    std::vector<Triplet> gamma_part;
    for (const auto& t : form.matrix.triplets()) {
        if (t.row >= m) continue;
        if (t.col < m)
            omega_part.push_back(t);
        else
            gamma_part.push_back({t.row, t.col - m, t.value});
    }
    form.omega_block = SparseMatrix(m, m, std::move(omega_part));
    form.gamma_block = SparseMatrix(m, n - m, std::move(gamma_part));

    form.mass.resize(n);
    for (std::size_t k = 0; k < n; ++k) form.mass[k] = measure.mass(domain.node_at(k));
    return form;
}

double bilinear(const AssembledForm& form, const NodeFunction& u, const NodeFunction& v)
{
    require_full(form, u, "u");
    require_full(form, v, "v");
    std::vector<double> mu(form.n());
    form.matrix.multiply(u.span(), mu);
    return dot(v.span(), mu);
}

double apply_L(const TransitionKernel& kernel, const NonlocalDomain& domain, const NodeFunction& u,
               NodeIndex x)
{
    NLBVP_REQUIRE(x < domain.node_count() && domain.in_omega(x), ErrorCode::NodeNotInOmega,
                  "node " + std::to_string(x) + " is not in Omega");
    NLBVP_REQUIRE(u.size() == domain.size(), ErrorCode::DimensionMismatch, "u has the wrong length");
    const double ux = u[domain.local_index(x)];
    double sum = 0.0;
    for (const auto& e : kernel.support(x)) sum += e.weight * (ux - value_at(domain, u, e.target));
    return sum;
}

double apply_N(const TransitionKernel& kernel, const NonlocalDomain& domain, const NodeFunction& u,
               NodeIndex y)
{
    NLBVP_REQUIRE(y < domain.node_count() && domain.in_gamma(y), ErrorCode::NodeNotInGamma,
                  "node " + std::to_string(y) + " is not in Gamma");
    NLBVP_REQUIRE(u.size() == domain.size(), ErrorCode::DimensionMismatch, "u has the wrong length");
    const double uy = u[domain.local_index(y)];
    double sum = 0.0;
    for (const auto& e : kernel.support(y))
        if (domain.in_omega(e.target)) sum += e.weight * (uy - u[domain.local_index(e.target)]);
    return sum;
}

double IbpTerms::residual() const noexcept
{
    return std::abs(interior - form + boundary);
}

IbpTerms ibp_terms(const AssembledForm& form, const TransitionKernel& kernel, const NodeFunction& u,
                   const NodeFunction& v)
{
    require_full(form, u, "u");
    require_full(form, v, "v");
    const auto& domain = form.domain;
    IbpTerms terms;
    for (std::size_t i = 0; i < form.m(); ++i) {
        const double c = apply_L(kernel, domain, u, domain.node_at(i)) * v[i] * form.mass[i];
        terms.interior += c;
        terms.scale += std::abs(c);
    }
    for (std::size_t k = form.m(); k < form.n(); ++k) {
        const double c = apply_N(kernel, domain, u, domain.node_at(k)) * v[k] * form.mass[k];
        terms.boundary += c;
        terms.scale += std::abs(c);
    }
    terms.form = bilinear(form, u, v);
    terms.scale += std::abs(terms.form);
    return terms;
}

double ibp_residual(const AssembledForm& form, const TransitionKernel& kernel, const NodeFunction& u,
                    const NodeFunction& v)
{
    return ibp_terms(form, kernel, u, v).residual();
}

double energy_dirichlet(const AssembledForm& form, const NodeFunction& f, const NodeFunction& v)
{
    NLBVP_REQUIRE(f.size() == form.m(), ErrorCode::DimensionMismatch, "f must live on Omega");
    double load = 0.0;
    for (std::size_t i = 0; i < form.m(); ++i) load += f[i] * v[i] * form.mass[i];
    return 0.5 * bilinear(form, v, v) - load;
}

double energy_neumann(const AssembledForm& form, const NodeFunction& f, const NodeFunction& g,
                      const NodeFunction& v)
{
    NLBVP_REQUIRE(g.size() == form.l(), ErrorCode::DimensionMismatch, "g must live on Gamma");
    double load = 0.0;
    for (std::size_t k = 0; k < form.l(); ++k) load += g[k] * v[form.m() + k] * form.mass[form.m() + k];
    return energy_dirichlet(form, f, v) - load;
}

NodeFunction positive_part(const NodeFunction& u)
{
    NodeFunction out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = std::max(u[i], 0.0);
    return out;
}

NodeFunction negative_part(const NodeFunction& u)
{
    NodeFunction out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = std::max(-u[i], 0.0);
    return out;
}

double v_norm_squared(const AssembledForm& form, const TransitionKernel& kernel, const NodeFunction& u)
{
    require_full(form, u, "u");
    const auto& domain = form.domain;
    double sum = 0.0;
    for (std::size_t i = 0; i < form.m(); ++i) {
        const NodeIndex x = domain.node_at(i);
        double energy = 0.0;
        for (const auto& e : kernel.support(x)) {
            const double diff = u[i] - value_at(domain, u, e.target);
            energy += e.weight * diff * diff;
        }
        sum += form.mass[i] * (u[i] * u[i] + energy);
    }
    return sum;
}

double l2_norm_squared(const AssembledForm& form, const NodeFunction& u)
{
    require_full(form, u, "u");
    double sum = 0.0;
    for (std::size_t k = 0; k < form.n(); ++k) sum += u[k] * u[k] * form.mass[k];
    return sum;
}

double l2_omega_norm_squared(const AssembledForm& form, const NodeFunction& u)
{
    require_full(form, u, "u");
    double sum = 0.0;
    for (std::size_t i = 0; i < form.m(); ++i) sum += u[i] * u[i] * form.mass[i];
    return sum;
}

} // namespace nlbvp
