#ifndef NLBVP_LINALG_HPP
#define NLBVP_LINALG_HPP

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace nlbvp {

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Compressed-row sparse matrix. Duplicate triplets are summed on construction.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t nonzeros() const noexcept { return values_.size(); }

    std::span<const std::size_t> row_pointers() const noexcept { return row_ptr_; }
    std::span<const std::size_t> column_indices() const noexcept { return col_idx_; }
    std::span<const double> values() const noexcept { return values_; }

    double at(std::size_t row, std::size_t col) const;

    /// y = A x
    void multiply(std::span<const double> x, std::span<double> y) const;
    /// y = A^T x
    void multiply_transpose(std::span<const double> x, std::span<double> y) const;

    std::vector<double> diagonal() const;
    std::vector<Triplet> triplets() const;

    /// Max absolute row sum; bounds the spectral radius of a symmetric matrix.
    double infinity_norm() const;

    bool is_exactly_symmetric() const;

    SparseMatrix scaled(double factor) const;

    friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> col_idx_;
    std::vector<double> values_;
};

/// Coordinate-list export, one "row col value" line per stored entry,
/// values with 17 significant digits.
void write_coordinate_list(std::ostream& out, const SparseMatrix& matrix);

using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

/// Orthonormal (Euclidean) vectors used for deflation and projection.
class OrthonormalSet {
public:
    explicit OrthonormalSet(std::size_t dimension) : dimension_(dimension) {}

    /// Gram-Schmidt against the current set; returns false (and keeps the set
    /// unchanged) when the vector is numerically dependent.
    bool add(std::span<const double> v, double relative_floor = 1e-10);
    void project_out(std::span<double> v) const;

    std::size_t size() const noexcept { return vectors_.size(); }
    std::size_t dimension() const noexcept { return dimension_; }
    const std::vector<std::vector<double>>& vectors() const noexcept { return vectors_; }

private:
    std::size_t dimension_;
    std::vector<std::vector<double>> vectors_;
};

struct CgOptions {
    double tolerance = 1e-12;       // relative residual
    std::size_t max_iterations = 0; // 0 -> 10 n + 100
};

struct CgResult {
    std::vector<double> x;
    std::size_t iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

/// Conjugate gradients for a symmetric positive (semi-)definite operator.
/// When `projector` is given, the right-hand side and every iterate are
/// projected with it, which keeps the iteration in the complement of a known
/// kernel.
CgResult conjugate_gradient(const LinearOperator& apply, std::span<const double> rhs,
                            std::span<const double> initial, const CgOptions& options,
                            const OrthonormalSet* projector = nullptr);

struct EigenOptions {
    double shift = 0.0;            // iterate with (A - shift I)^{-1}; keep below the target eigenvalue
    double residual_tolerance = 0; // absolute; converged when |A v - lambda v| <= this
    std::size_t max_iterations = 0;
};

struct EigenPair {
    double value = 0.0;
    std::vector<double> vector;
    std::size_t iterations = 0;
    double residual = 0.0;
};

/// Smallest eigenpair of a symmetric operator on the orthogonal complement of
/// `deflation`, by shifted inverse iteration from a deterministic start.
EigenPair smallest_eigenpair(std::size_t n, const LinearOperator& apply, const OrthonormalSet& deflation,
                             const EigenOptions& options);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

} // namespace nlbvp

#endif
