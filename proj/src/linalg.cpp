#include "nlbvp/linalg.hpp"

#include "nlbvp/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

namespace nlbvp {

double dot(std::span<const double> a, std::span<const double> b)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum;
}

double norm2(std::span<const double> a)
{
    return std::sqrt(dot(a, a));
}

// ---------------------------------------------------------------------------
// SparseMatrix

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets)
    : rows_(rows), cols_(cols)
{
    for (const auto& t : triplets)
        NLBVP_REQUIRE(t.row < rows && t.col < cols, ErrorCode::DimensionMismatch,
                      "triplet outside matrix bounds");
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    row_ptr_.assign(rows + 1, 0);
    for (std::size_t k = 0; k < triplets.size();) {
        const auto row = triplets[k].row;
        const auto col = triplets[k].col;
        double value = 0.0;
        while (k < triplets.size() && triplets[k].row == row && triplets[k].col == col)
            value += triplets[k++].value;
        col_idx_.push_back(col);
        values_.push_back(value);
        ++row_ptr_[row + 1];
    }
    for (std::size_t r = 0; r < rows; ++r) row_ptr_[r + 1] += row_ptr_[r];
}

double SparseMatrix::at(std::size_t row, std::size_t col) const
{
    NLBVP_REQUIRE(row < rows_ && col < cols_, ErrorCode::DimensionMismatch, "matrix index out of range");
    const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row]);
    const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row + 1]);
    const auto it = std::lower_bound(first, last, col);
    if (it == last || *it != col) return 0.0;
    return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const
{
    NLBVP_REQUIRE(x.size() == cols_ && y.size() == rows_, ErrorCode::DimensionMismatch,
                  "matrix-vector size mismatch");
    for (std::size_t r = 0; r < rows_; ++r) {
        double sum = 0.0;
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) sum += values_[k] * x[col_idx_[k]];
        y[r] = sum;
    }
}

void SparseMatrix::multiply_transpose(std::span<const double> x, std::span<double> y) const
{
    NLBVP_REQUIRE(x.size() == rows_ && y.size() == cols_, ErrorCode::DimensionMismatch,
                  "matrix-vector size mismatch");
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) y[col_idx_[k]] += values_[k] * x[r];
}

std::vector<double> SparseMatrix::diagonal() const
{
    std::vector<double> d(std::min(rows_, cols_), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = at(i, i);
    return d;
}

std::vector<Triplet> SparseMatrix::triplets() const
{
    std::vector<Triplet> out;
    out.reserve(values_.size());
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) out.push_back({r, col_idx_[k], values_[k]});
    return out;
}

double SparseMatrix::infinity_norm() const
{
    double best = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) {
        double sum = 0.0;
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) sum += std::abs(values_[k]);
        best = std::max(best, sum);
    }
    return best;
}

bool SparseMatrix::is_exactly_symmetric() const
{
    if (rows_ != cols_) return false;
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            if (at(col_idx_[k], r) != values_[k]) return false;
    return true;
}

SparseMatrix SparseMatrix::scaled(double factor) const
{
    SparseMatrix copy = *this;
    for (double& v : copy.values_) v *= factor;
    return copy;
}

void write_coordinate_list(std::ostream& out, const SparseMatrix& matrix)
{
    char buffer[96];
    for (const auto& t : matrix.triplets()) {
        std::snprintf(buffer, sizeof buffer, "%zu %zu %.17g\n", t.row, t.col, t.value);
        out << buffer;
    }
}

// ---------------------------------------------------------------------------
// OrthonormalSet

bool OrthonormalSet::add(std::span<const double> v, double relative_floor)
{
    NLBVP_REQUIRE(v.size() == dimension_, ErrorCode::DimensionMismatch, "vector dimension mismatch");
    std::vector<double> w(v.begin(), v.end());
    const double original = norm2(w);
    if (original == 0.0) return false;
    // Two passes of classical Gram-Schmidt keep the set orthonormal to rounding.
    for (int pass = 0; pass < 2; ++pass) project_out(w);
    const double remaining = norm2(w);
    if (remaining <= relative_floor * original) return false;
    for (double& x : w) x /= remaining;
    vectors_.push_back(std::move(w));
    return true;
}

void OrthonormalSet::project_out(std::span<double> v) const
{
    for (const auto& q : vectors_) {
        const double c = dot(q, v);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * q[i];
    }
}

// ---------------------------------------------------------------------------
// Conjugate gradients

CgResult conjugate_gradient(const LinearOperator& apply, std::span<const double> rhs,
                            std::span<const double> initial, const CgOptions& options,
                            const OrthonormalSet* projector)
{
    const std::size_t n = rhs.size();
    NLBVP_REQUIRE(initial.empty() || initial.size() == n, ErrorCode::DimensionMismatch,
                  "initial guess has the wrong length");
    const std::size_t max_iterations = options.max_iterations ? options.max_iterations : 10 * n + 100;

    auto project = [&](std::span<double> v) {
        if (projector) projector->project_out(v);
    };

    CgResult result;
    std::vector<double> b(rhs.begin(), rhs.end());
    project(b);
    const double b_norm = norm2(b);

    result.x.assign(n, 0.0);
    if (!initial.empty()) std::copy(initial.begin(), initial.end(), result.x.begin());
    project(result.x);
    if (b_norm == 0.0) {
        std::fill(result.x.begin(), result.x.end(), 0.0);
        result.converged = true;
        return result;
    }

    std::vector<double> r(n), p(n), ap(n);
    auto true_residual = [&] {
        apply(result.x, ap);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
        project(r);
        return norm2(r);
    };

    double r_norm = true_residual();
    p = r;
    double rr = r_norm * r_norm;
    const double target = options.tolerance * b_norm;

    while (true) {
        if (r_norm <= target) {
            // Confirm against the recomputed residual before accepting.
            r_norm = true_residual();
            if (r_norm <= target) {
                result.converged = true;
                break;
            }
            p = r;
            rr = r_norm * r_norm;
        }
        if (result.iterations >= max_iterations) break;

        apply(p, ap);
        project(ap);
        const double pap = dot(p, ap);
        if (!(pap > 0.0)) break; // operator not positive definite on the Krylov space
        const double alpha = rr / pap;
        for (std::size_t i = 0; i < n; ++i) {
            result.x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        project(result.x);
        project(r);
        const double rr_next = dot(r, r);
        const double beta = rr_next / rr;
        rr = rr_next;
        r_norm = std::sqrt(rr);
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
        project(p);
        ++result.iterations;
    }
    result.relative_residual = true_residual() / b_norm;
    result.converged = result.converged || result.relative_residual <= options.tolerance;
    return result;
}

// ---------------------------------------------------------------------------
// Block inverse iteration

namespace {

// Cyclic Jacobi for a small dense symmetric matrix (row-major, p x p).
// Returns eigenvalues ascending; columns of `vectors` hold the eigenvectors.
std::vector<double> jacobi_eigen(std::vector<double> a, std::size_t p, std::vector<double>& vectors)
{
    vectors.assign(p * p, 0.0);
    for (std::size_t i = 0; i < p; ++i) vectors[i * p + i] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0, total = 0.0;
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < p; ++j) {
                total += a[i * p + j] * a[i * p + j];
                if (i != j) off += a[i * p + j] * a[i * p + j];
            }
        if (off <= 1e-30 * total || off == 0.0) break;
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = i + 1; j < p; ++j) {
                const double aij = a[i * p + j];
                if (aij == 0.0) continue;
                const double theta = (a[j * p + j] - a[i * p + i]) / (2.0 * aij);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < p; ++k) {
                    const double aki = a[k * p + i], akj = a[k * p + j];
                    a[k * p + i] = c * aki - s * akj;
                    a[k * p + j] = s * aki + c * akj;
                }
                for (std::size_t k = 0; k < p; ++k) {
                    const double aik = a[i * p + k], ajk = a[j * p + k];
                    a[i * p + k] = c * aik - s * ajk;
                    a[j * p + k] = s * aik + c * ajk;
                }
                for (std::size_t k = 0; k < p; ++k) {
                    const double vki = vectors[k * p + i], vkj = vectors[k * p + j];
                    vectors[k * p + i] = c * vki - s * vkj;
                    vectors[k * p + j] = s * vki + c * vkj;
                }
            }
    }
    std::vector<std::size_t> order(p);
    for (std::size_t i = 0; i < p; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a[x * p + x] < a[y * p + y]; });
    std::vector<double> values(p), sorted(p * p);
    for (std::size_t c = 0; c < p; ++c) {
        values[c] = a[order[c] * p + order[c]];
        for (std::size_t k = 0; k < p; ++k) sorted[k * p + c] = vectors[k * p + order[c]];
    }
    vectors = std::move(sorted);
    return values;
}

// Deterministic start column k: all-ones plus a ramp, then cosine modes.
std::vector<double> start_vector(std::size_t n, std::size_t k)
{
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i + 1) / static_cast<double>(n + 1);
        x[i] = k == 0 ? 1.0 + t : std::cos(3.14159265358979323846 * static_cast<double>(k) * t) + 0.01 * t;
    }
    return x;
}

// Orthonormalizes the columns against `deflation` and each other; a column
// that collapses is replaced by a fresh unit vector.
void orthonormalize(std::vector<std::vector<double>>& block, const OrthonormalSet& deflation)
{
    const std::size_t n = deflation.dimension();
    std::size_t fresh = 0;
    for (std::size_t c = 0; c < block.size(); ++c) {
        for (int attempt = 0;; ++attempt) {
            auto& x = block[c];
            const double before = norm2(x);
            for (int pass = 0; pass < 2; ++pass) {
                deflation.project_out(x);
                for (std::size_t k = 0; k < c; ++k) {
                    const double d = dot(block[k], x);
                    for (std::size_t i = 0; i < n; ++i) x[i] -= d * block[k][i];
                }
            }
            const double after = norm2(x);
            if (after > 1e-10 * before && after > 0.0) {
                for (double& v : x) v /= after;
                break;
            }
            NLBVP_REQUIRE(attempt < static_cast<int>(n) + 1, ErrorCode::EigensolverFailure,
                          "could not build an independent start block");
            std::fill(x.begin(), x.end(), 0.0);
            x[fresh++ % n] = 1.0;
        }
    }
}

} // namespace

EigenPair smallest_eigenpair(std::size_t n, const LinearOperator& apply, const OrthonormalSet& deflation,
                             const EigenOptions& options)
{
    NLBVP_REQUIRE(n > 0, ErrorCode::InvalidArgument, "eigenproblem of dimension zero");
    NLBVP_REQUIRE(deflation.size() < n, ErrorCode::InvalidArgument,
                  "deflation set already spans the whole space");
    const std::size_t max_iterations = options.max_iterations ? options.max_iterations : 10 * n;
    const std::size_t p = std::min<std::size_t>(6, n - deflation.size());

    std::vector<std::vector<double>> block(p);
    for (std::size_t k = 0; k < p; ++k) block[k] = start_vector(n, k);
    orthonormalize(block, deflation);

    const LinearOperator shifted = [&](std::span<const double> in, std::span<double> out) {
        apply(in, out);
        for (std::size_t i = 0; i < n; ++i) out[i] -= options.shift * in[i];
    };
    // Inner solves start loose and tighten when the outer residual stalls.
    CgOptions inner{1e-10, 4 * n + 100};
    std::size_t stalled = 0;

    EigenPair pair;
    std::vector<std::vector<double>> images(p, std::vector<double>(n));
    std::vector<double> ritz_vectors;
    // Rayleigh-Ritz on the current block; leaves the Ritz vectors in `block`.
    auto rayleigh_ritz = [&] {
        for (std::size_t k = 0; k < p; ++k) apply(block[k], images[k]);
        std::vector<double> h(p * p);
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = i; j < p; ++j) h[i * p + j] = h[j * p + i] = 0.5 * (dot(block[i], images[j]) + dot(block[j], images[i]));
        const auto values = jacobi_eigen(std::move(h), p, ritz_vectors);
        std::vector<std::vector<double>> rotated(p, std::vector<double>(n, 0.0));
        std::vector<std::vector<double>> rotated_images(p, std::vector<double>(n, 0.0));
        for (std::size_t c = 0; c < p; ++c)
            for (std::size_t k = 0; k < p; ++k) {
                const double w = ritz_vectors[k * p + c];
                for (std::size_t i = 0; i < n; ++i) {
                    rotated[c][i] += w * block[k][i];
                    rotated_images[c][i] += w * images[k][i];
                }
            }
        block = std::move(rotated);
        images = std::move(rotated_images);
        pair.value = values[0];
        double res = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = images[0][i] - pair.value * block[0][i];
            res += d * d;
        }
        pair.residual = std::sqrt(res);
    };
    rayleigh_ritz();

    while (pair.residual > options.residual_tolerance) {
        if (pair.iterations >= max_iterations)
            raise(ErrorCode::EigensolverFailure,
                  "inverse iteration did not converge within " + std::to_string(max_iterations) +
                      " steps (residual " + std::to_string(pair.residual) + ")");
        for (std::size_t k = 0; k < p; ++k) {
            auto solve = conjugate_gradient(shifted, block[k], {}, inner, &deflation);
            if (!std::isfinite(norm2(solve.x)))
                raise(ErrorCode::EigensolverFailure, "inverse iteration produced a degenerate iterate");
            block[k] = std::move(solve.x);
        }
        orthonormalize(block, deflation);
        ++pair.iterations;
        const double previous = pair.residual;
        rayleigh_ritz();
        stalled = pair.residual > 0.5 * previous ? stalled + 1 : 0;
        if (stalled >= 3 && inner.tolerance > 1e-15) {
            inner.tolerance *= 0.01;
            stalled = 0;
        }
    }
    pair.vector = std::move(block[0]);
    return pair;
}

} // namespace nlbvp
