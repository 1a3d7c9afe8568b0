#include "nlbvp/analysis.hpp"
#include "nlbvp/error.hpp"
#include "nlbvp/solvers.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace nlbvp;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Setup {
    AtomicMeasure measure;
    TransitionKernel kernel;
    NonlocalDomain domain;
    AssembledForm form;
};

Setup make_setup(AtomicMeasure measure, TransitionKernel kernel, const std::vector<NodeIndex>& omega)
{
    auto domain = nonlocal_boundary(kernel, omega, measure);
    auto form = assemble_form(kernel, measure, domain);
    return {std::move(measure), std::move(kernel), std::move(domain), std::move(form)};
}

std::vector<NodeIndex> interior_nodes(const AtomicMeasure& measure)
{
    std::vector<NodeIndex> omega;
    for (NodeIndex x = 0; x < measure.size(); ++x) {
        bool interior = true;
        for (double c : measure.point(x)) interior = interior && c > 1e-12 && c < 1 - 1e-12;
        if (interior) omega.push_back(x);
    }
    return omega;
}

Setup stencil_setup(std::size_t d, std::size_t n)
{
    auto measure = AtomicMeasure::with_unit_masses(d, oracle::lattice(d, n));
    auto kernel = stencil_kernel(d, 1.0 / double(n), measure);
    const auto omega = interior_nodes(measure);
    return make_setup(std::move(measure), std::move(kernel), omega);
}

// Nodes k/8 with kernel step 1/4: two sublattices that never interact.
Setup interleaved_setup()
{
    auto measure = AtomicMeasure::with_unit_masses(1, oracle::lattice(1, 8));
    auto kernel = stencil_kernel(1, 0.25, measure);
    const auto omega = interior_nodes(measure);
    return make_setup(std::move(measure), std::move(kernel), omega);
}

Setup zero_kernel_setup()
{
    auto measure = AtomicMeasure::with_unit_masses(1, oracle::lattice(1, 4));
    auto kernel = quadrature_kernel([](auto, auto) { return 0.0; }, 1.0, measure);
    return make_setup(std::move(measure), std::move(kernel), {1, 2, 3});
}

// Long-range quadrature kernel: every Omega node sees Gamma.
Setup quadrature_setup()
{
    const std::size_t n = 12;
    const auto coords = oracle::lattice(1, n);
    std::vector<double> masses(coords.size(), 1.0 / double(n));
    AtomicMeasure measure(1, coords, masses);
    auto kernel = quadrature_kernel([](auto x, auto y) { return 1.0 + 0.5 * std::cos(x[0] - y[0]); }, 0.55, measure);
    std::vector<NodeIndex> omega;
    for (NodeIndex x = 4; x <= 8; ++x) omega.push_back(x);
    return make_setup(std::move(measure), std::move(kernel), omega);
}

double mass_dot(const AssembledForm& form, const NodeFunction& a, const NodeFunction& b, std::size_t count)
{
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) s += a[i] * b[i] * form.mass[i];
    return s;
}

// Eigenvalues of the Omega block against the Omega masses, by dense solve.
Eigen::VectorXd omega_eigenvalues(const AssembledForm& form)
{
    return oracle::generalized_eigenvalues(oracle::dense(form.omega_block), form.omega_mass());
}

} // namespace

TEST(Nullspace, StencilIsConstants)
{
    for (auto [d, n] : {std::pair<std::size_t, std::size_t>{1, 4}, {1, 16}, {2, 4}, {2, 8}, {3, 4}}) {
        const auto s = stencil_setup(d, n);
        const auto basis = nullspace(s.form);
        ASSERT_EQ(basis.dimension(), 1u) << d << " " << n;
        EXPECT_TRUE(strong_poincare_check(basis));
        EXPECT_NEAR(mass_dot(s.form, basis.vectors[0], basis.vectors[0], s.form.n()), 1.0, 1e-10);
        // Spectral gap against the dense oracle.
        const auto eig = oracle::generalized_eigenvalues(oracle::dense(s.form.matrix), s.form.mass);
        EXPECT_NEAR(basis.gap, eig(1), 1e-8 * eig(1));
        EXPECT_GT(basis.gap, 1e6 * basis.tolerance);
    }
}

TEST(Nullspace, InterleavedSublatticesHaveTwoDimensions)
{
    const auto s = interleaved_setup();
    const auto basis = nullspace(s.form);
    ASSERT_EQ(basis.dimension(), 2u);
    EXPECT_FALSE(strong_poincare_check(basis));
    // Each basis vector is a combination of the two sublattice indicators.
    for (const auto& w : basis.vectors) {
        double even = 0.0, odd = 0.0;
        bool have_even = false, have_odd = false;
        for (std::size_t i = 0; i < s.form.n(); ++i) {
            const double x = s.measure.point(s.domain.node_at(i))[0];
            const bool is_even = std::lround(x * 8) % 2 == 0;
            double& ref = is_even ? even : odd;
            bool& have = is_even ? have_even : have_odd;
            if (!have) {
                ref = w[i];
                have = true;
            }
            EXPECT_NEAR(w[i], ref, 1e-8);
        }
    }
    EXPECT_NEAR(mass_dot(s.form, basis.vectors[0], basis.vectors[1], s.form.n()), 0.0, 1e-10);
}

TEST(Nullspace, ZeroKernelIsWholeSpace)
{
    const auto s = zero_kernel_setup();
    const auto basis = nullspace(s.form);
    EXPECT_EQ(basis.dimension(), s.form.n());
    EXPECT_FALSE(strong_poincare_check(basis));
    EXPECT_EQ(basis.gap, kInf);
}

TEST(Nullspace, KernelAnnihilation)
{
    std::mt19937_64 rng(31);
    for (const auto& s : {stencil_setup(2, 6), interleaved_setup(), quadrature_setup()}) {
        const auto basis = nullspace(s.form);
        for (const auto& w : basis.vectors) {
            EXPECT_LE(bilinear(s.form, w, w), basis.tolerance * s.form.matrix.infinity_norm());
            for (int trial = 0; trial < 10; ++trial) {
                const NodeFunction v(oracle::random_vector(s.form.n(), rng));
                EXPECT_LE(std::abs(bilinear(s.form, w, v)), 1e-9 * norm2(v.span()) * s.form.matrix.infinity_norm());
            }
        }
    }
}

TEST(ProjectOutKernel, Examples)
{
    const auto s = stencil_setup(1, 4);
    const auto basis = nullspace(s.form);
    const auto zero = project_out_kernel(s.form, NodeFunction(s.form.n(), 2.5), basis);
    for (double v : zero) EXPECT_NEAR(v, 0.0, 1e-12);

    const NodeFunction mean_zero{1.0, 0.0, -1.0, 7.0, -3.0};
    const auto same = project_out_kernel(s.form, mean_zero, basis);
    for (std::size_t i = 0; i < mean_zero.size(); ++i) EXPECT_NEAR(same[i], mean_zero[i], 1e-12);
}

TEST(ProjectOutKernel, MinimizesOmegaDistance)
{
    std::mt19937_64 rng(37);
    for (const auto& s : {stencil_setup(2, 4), interleaved_setup()}) {
        const auto basis = nullspace(s.form);
        for (int trial = 0; trial < 10; ++trial) {
            const NodeFunction u(oracle::random_vector(s.form.n(), rng));
            const auto r = project_out_kernel(s.form, u, basis);
            for (const auto& w : basis.vectors) EXPECT_NEAR(mass_dot(s.form, r, w, s.form.m()), 0.0, 1e-10);
            const double best = l2_omega_norm_squared(s.form, r);
            // Sampled competitors u - w for w in ker B.
            for (int k = 0; k < 50; ++k) {
                NodeFunction c = u;
                const auto coef = oracle::random_vector(basis.dimension(), rng, -2.0, 2.0);
                for (std::size_t b = 0; b < basis.dimension(); ++b)
                    for (std::size_t i = 0; i < c.size(); ++i) c[i] -= coef[b] * basis.vectors[b][i];
                EXPECT_LE(best, l2_omega_norm_squared(s.form, c) + 1e-12);
            }
            const double buu = bilinear(s.form, u, u);
            EXPECT_NEAR(bilinear(s.form, r, r), buu, 1e-10 * buu);
        }
    }
}

TEST(Friedrichs, ClosedFormOneDimensional)
{
    const auto s = stencil_setup(1, 4);
    const auto report = friedrichs_constant(s.form);
    const double lambda = 16.0 * (2.0 - 2.0 * std::cos(M_PI / 4.0));
    EXPECT_NEAR(report.eigenvalue, lambda, 1e-9);
    EXPECT_NEAR(report.constant, 1.0 / lambda, 1e-10);
    EXPECT_NEAR(report.constant, 0.10669, 1e-5);
    EXPECT_TRUE(report.holds());
}

TEST(Friedrichs, MatchesDenseOracle)
{
    for (const auto& s : {stencil_setup(2, 6), quadrature_setup()}) {
        const auto report = friedrichs_constant(s.form);
        const double lambda = omega_eigenvalues(s.form)(0);
        EXPECT_NEAR(report.eigenvalue, lambda, 1e-8 * lambda);
        // Witness is a V_0 function achieving the Rayleigh quotient.
        const auto& w = report.witness;
        for (std::size_t j = s.form.m(); j < s.form.n(); ++j) EXPECT_EQ(w[j], 0.0);
        EXPECT_NEAR(bilinear(s.form, w, w) / l2_omega_norm_squared(s.form, w), lambda, 1e-8 * lambda);
    }
}

TEST(Friedrichs, BoundedByCouplingToGamma)
{
    const auto s = quadrature_setup();
    double kappa = kInf;
    for (NodeIndex x : s.domain.omega())
        kappa = std::min(kappa, s.kernel.mass_on(x, [&](NodeIndex t) { return s.domain.in_gamma(t); }));
    ASSERT_GT(kappa, 0.0);
    const auto report = friedrichs_constant(s.form);
    EXPECT_LE(report.constant, 2.0 / kappa);
}

TEST(Friedrichs, DisconnectedComponentFails)
{
    const auto s = interleaved_setup();
    const auto report = friedrichs_constant(s.form);
    EXPECT_EQ(report.constant, kInf);
    EXPECT_FALSE(report.holds());
    EXPECT_NEAR(omega_eigenvalues(s.form)(0), 0.0, 1e-10);
    try {
        solve_dirichlet({s.form, NodeFunction(s.form.m(), 1.0), NodeFunction(s.form.l())});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::FriedrichsViolated);
    }
}

TEST(Friedrichs, EquivalentToPositiveDefiniteAndSolvable)
{
    for (const auto& s : {stencil_setup(1, 8), stencil_setup(2, 4), quadrature_setup(), interleaved_setup()}) {
        const bool finite = friedrichs_constant(s.form).holds();
        const Eigen::LLT<Eigen::MatrixXd> llt(oracle::dense(s.form.omega_block));
        const bool positive_definite =
            llt.info() == Eigen::Success && omega_eigenvalues(s.form)(0) > 1e-9 * s.form.matrix.infinity_norm();
        bool solvable = true;
        try {
            solve_dirichlet({s.form, NodeFunction(s.form.m(), 1.0), NodeFunction(s.form.l())});
        } catch (const Error&) {
            solvable = false;
        }
        EXPECT_EQ(finite, positive_definite);
        EXPECT_EQ(finite, solvable);
    }
}

TEST(Friedrichs, ChainCriterion)
{
    const auto s = stencil_setup(1, 8);
    // Layers by distance to the boundary: {1/8, 7/8}, {2/8, 6/8}, ...
    std::vector<std::vector<NodeIndex>> layers(4);
    for (NodeIndex x : s.domain.omega()) {
        const long k = std::lround(s.measure.point(x)[0] * 8);
        layers[static_cast<std::size_t>(std::min(k, 8 - k) - 1)].push_back(x);
    }
    EXPECT_TRUE(friedrichs_chain_holds(s.kernel, s.domain, layers));

    std::vector<std::vector<NodeIndex>> reversed(layers.rbegin(), layers.rend());
    EXPECT_FALSE(friedrichs_chain_holds(s.kernel, s.domain, reversed));

    std::vector<std::vector<NodeIndex>> incomplete(layers.begin(), layers.end() - 1);
    EXPECT_THROW(friedrichs_chain_holds(s.kernel, s.domain, incomplete), Error);

    const auto t = interleaved_setup();
    std::vector<std::vector<NodeIndex>> all{{t.domain.omega().begin(), t.domain.omega().end()}};
    EXPECT_FALSE(friedrichs_chain_holds(t.kernel, t.domain, all));
}

TEST(Poincare, ThreeNodeFullVariant)
{
    const auto s = stencil_setup(1, 2);
    const auto basis = nullspace(s.form);
    const auto report = poincare_constant(s.form, basis, PoincareNorm::Full);
    EXPECT_NEAR(report.eigenvalue, 4.0, 1e-10);
    EXPECT_NEAR(report.constant, 0.25, 1e-12);
}

TEST(Poincare, RandomMeanZeroVectorsNeverViolate)
{
    std::mt19937_64 rng(41);
    for (const auto& s : {stencil_setup(1, 8), stencil_setup(2, 4), quadrature_setup()}) {
        const auto basis = nullspace(s.form);
        const auto report = poincare_constant(s.form, basis, PoincareNorm::Full);
        ASSERT_TRUE(report.holds());
        const auto eig = oracle::generalized_eigenvalues(oracle::dense(s.form.matrix), s.form.mass);
        EXPECT_NEAR(report.eigenvalue, eig(1), 1e-8 * eig(1));
        int violations = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            NodeFunction v(oracle::random_vector(s.form.n(), rng));
            const double mean = mass_dot(s.form, v, NodeFunction(s.form.n(), 1.0), s.form.n()) /
                                mass_dot(s.form, NodeFunction(s.form.n(), 1.0), NodeFunction(s.form.n(), 1.0), s.form.n());
            for (auto& x : v) x -= mean;
            if (l2_norm_squared(s.form, v) > report.constant * bilinear(s.form, v, v) * (1 + 1e-10)) ++violations;
        }
        EXPECT_EQ(violations, 0);
    }
}

TEST(Poincare, OmegaVariantMatchesSchurOracle)
{
    for (const auto& s : {stencil_setup(1, 8), stencil_setup(2, 4), quadrature_setup()}) {
        const auto basis = nullspace(s.form);
        const auto report = poincare_constant(s.form, basis, PoincareNorm::Omega);
        const auto full = poincare_constant(s.form, basis, PoincareNorm::Full);
        EXPECT_EQ(report.holds(), full.holds());
        // Dense Schur complement of the Gamma block against the Omega masses.
        const auto dense = oracle::dense(s.form.matrix);
        const auto m = static_cast<Eigen::Index>(s.form.m());
        const auto l = static_cast<Eigen::Index>(s.form.l());
        const Eigen::MatrixXd schur = dense.topLeftCorner(m, m) - dense.topRightCorner(m, l) *
                                                                     dense.bottomRightCorner(l, l).inverse() *
                                                                     dense.bottomLeftCorner(l, m);
        const auto eig = oracle::generalized_eigenvalues(schur, s.form.omega_mass());
        EXPECT_NEAR(eig(0), 0.0, 1e-8);
        EXPECT_NEAR(report.eigenvalue, eig(1), 1e-8 * eig(1));
        // Witness attains the Rayleigh quotient inf_w |v - w|^2 / B(v, v).
        const auto r = project_out_kernel(s.form, report.witness, basis);
        EXPECT_NEAR(bilinear(s.form, report.witness, report.witness) / l2_omega_norm_squared(s.form, r),
                    report.eigenvalue, 1e-7 * report.eigenvalue);
    }
}

TEST(Poincare, DeficientBasisFlagsInfinity)
{
    const auto s = stencil_setup(1, 4);
    auto basis = nullspace(s.form);
    basis.vectors.clear();
    EXPECT_EQ(poincare_constant(s.form, basis, PoincareNorm::Full).constant, kInf);
    EXPECT_EQ(poincare_constant(s.form, basis, PoincareNorm::Omega).constant, kInf);
}

TEST(Poincare, InterleavedHoldsWithTwoDimensionalKernel)
{
    const auto s = interleaved_setup();
    const auto basis = nullspace(s.form);
    EXPECT_TRUE(poincare_constant(s.form, basis, PoincareNorm::Full).holds());
    EXPECT_TRUE(poincare_constant(s.form, basis, PoincareNorm::Omega).holds());
}

TEST(Poincare, ZeroKernel)
{
    const auto s = zero_kernel_setup();
    const auto basis = nullspace(s.form);
    const auto report = poincare_constant(s.form, basis, PoincareNorm::Full);
    EXPECT_EQ(report.constant, 0.0);
    EXPECT_EQ(report.eigenvalue, kInf);
}

TEST(TraceWeight, SufficientVariant)
{
    const auto s = stencil_setup(1, 2);
    const auto w = trace_weight(s.kernel, s.domain, TraceVariant::Sufficient);
    ASSERT_EQ(w.omega_weight.size(), 2u);
    EXPECT_DOUBLE_EQ(w.omega_weight[0], 4.0);
    EXPECT_DOUBLE_EQ(w.omega_weight[1], 4.0);
    const auto q = quadrature_setup();
    for (double v : trace_weight(q.kernel, q.domain, TraceVariant::Sufficient).omega_weight) EXPECT_GT(v, 0.0);
}

TEST(TraceWeight, NecessaryVariantIsMonotone)
{
    const auto s = quadrature_setup();
    double previous = kInf;
    for (double c : {1e-3, 1.0, 10.0, 1e3, 1e9}) {
        const auto w = trace_weight(s.kernel, s.domain, TraceVariant::Necessary, c);
        // Direct evaluation of sum_s K(y,{s}) / (K(s, Gamma) + c) at the first Gamma node.
        const NodeIndex y = s.domain.gamma()[0];
        double expected = 0.0;
        for (const auto& e : s.kernel.support(y))
            if (s.domain.in_omega(e.target))
                expected += e.weight /
                            (s.kernel.mass_on(e.target, [&](NodeIndex t) { return s.domain.in_gamma(t); }) + c);
        EXPECT_NEAR(w.omega_weight[0], expected, 1e-14 * expected);
        for (double v : w.omega_weight) EXPECT_GT(v, 0.0);
        EXPECT_LT(w.omega_weight[0], previous);
        previous = w.omega_weight[0];
    }
    EXPECT_LT(previous, 1e-6);
    try {
        trace_weight(s.kernel, s.domain, TraceVariant::Necessary, 0.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonPositiveC);
    }
}

TEST(Compatibility, Examples)
{
    const auto s = stencil_setup(1, 4);
    const auto basis = nullspace(s.form);
    EXPECT_NEAR(compatibility_defect(s.form, NodeFunction(3), NodeFunction(2), basis), 0.0, 1e-15);
    EXPECT_NEAR(compatibility_defect(s.form, NodeFunction(3, 1.0), NodeFunction(2), basis), 3.0 / std::sqrt(5.0),
                1e-10);
    const NodeFunction f{0.5, -2.0, 0.25};
    EXPECT_NEAR(compatibility_defect(s.form, f, NodeFunction(2), basis), 1.25 / std::sqrt(5.0), 1e-10);
}

TEST(ContinuousFunctional, Examples)
{
    const auto s = stencil_setup(1, 2);
    const auto w = trace_weight(s.kernel, s.domain, TraceVariant::Sufficient);
    const auto zero = continuous_functional_check(s.form, NodeFunction(2), w);
    EXPECT_EQ(zero.weighted_sum, 0.0);
    EXPECT_TRUE(zero.passes());
    const auto ones = continuous_functional_check(s.form, NodeFunction(2, 1.0), w);
    EXPECT_DOUBLE_EQ(ones.weighted_sum, 0.5);
    EXPECT_DOUBLE_EQ(ones.min_weight, 4.0);
    EXPECT_FALSE(ones.ill_conditioned);

    TraceWeight tiny = w;
    tiny.omega_weight[1] = 1e-15;
    const auto flagged = continuous_functional_check(s.form, NodeFunction(2, 1.0), tiny);
    EXPECT_TRUE(flagged.ill_conditioned);
    EXPECT_TRUE(flagged.passes());
}

TEST(MaxPrinciple, Examples)
{
    const auto s = stencil_setup(1, 4);
    EXPECT_TRUE(max_principle_check(s.form, NodeFunction(5, 2.0)));
    const NodeFunction u{5.0 / 32, 3.0 / 8, 21.0 / 32, 0.0, 1.0};
    EXPECT_TRUE(max_principle_check(s.form, u));
    const NodeFunction bad{1.5, 0.0, 0.0, 0.0, 1.0};
    EXPECT_FALSE(max_principle_check(s.form, bad));

    const auto z = zero_kernel_setup();
    try {
        max_principle_check(z.form, NodeFunction(3));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyGamma);
    }
}

TEST(MaxPrinciple, DirichletSolutionsWithNonpositiveLoad)
{
    std::mt19937_64 rng(43);
    for (const auto& s : {stencil_setup(2, 6), quadrature_setup()}) {
        for (int trial = 0; trial < 5; ++trial) {
            const NodeFunction f(oracle::random_vector(s.form.m(), rng, -1.0, 0.0));
            const NodeFunction g(oracle::random_vector(s.form.l(), rng));
            const auto sol = solve_dirichlet({s.form, f, g});
            EXPECT_TRUE(max_principle_check(s.form, sol.u));
        }
    }
}

TEST(MaxPrinciple, WeakVariant)
{
    const auto s = stencil_setup(1, 4);
    // max over Gamma is negative, so only u+ bounds Omega.
    const NodeFunction u{-0.5, -0.1, -0.5, -1.0, -1.0};
    EXPECT_FALSE(max_principle_check(s.form, u));
    EXPECT_TRUE(weak_max_principle_check(s.form, u));
    const NodeFunction v{0.1, -0.1, -0.5, -1.0, -1.0};
    EXPECT_FALSE(weak_max_principle_check(s.form, v));
}
