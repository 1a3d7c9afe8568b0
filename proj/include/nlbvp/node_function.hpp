#ifndef NLBVP_NODE_FUNCTION_HPP
#define NLBVP_NODE_FUNCTION_HPP

#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace nlbvp {

/// Real values attached to the nodes of one block of a domain ordering.
///
/// A function on the whole domain is indexed Omega-first, then Gamma. Data
/// living on a single region (right-hand sides, boundary values) uses the
/// local order of that region.
class NodeFunction {
public:
    NodeFunction() = default;
    explicit NodeFunction(std::size_t size, double value = 0.0) : values_(size, value) {}
    explicit NodeFunction(std::vector<double> values) : values_(std::move(values)) {}
    NodeFunction(std::initializer_list<double> values) : values_(values) {}

    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    std::span<double> span() noexcept { return values_; }
    std::span<const double> span() const noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::vector<double>& values() noexcept { return values_; }

    auto begin() noexcept { return values_.begin(); }
    auto end() noexcept { return values_.end(); }
    auto begin() const noexcept { return values_.begin(); }
    auto end() const noexcept { return values_.end(); }

    friend bool operator==(const NodeFunction&, const NodeFunction&) = default;

private:
    std::vector<double> values_;
};

} // namespace nlbvp

#endif
