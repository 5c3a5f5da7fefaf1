#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace causal {

/// Thrown when a conditioning set makes a covariance submatrix singular.
/// Carries the offending label set so callers can report which variables
/// collided.
class ConditioningError : public std::runtime_error {
public:
    ConditioningError(const std::string& what, std::vector<std::string> labels)
        : std::runtime_error(what), labels_(std::move(labels)) {}

    const std::vector<std::string>& labels() const { return labels_; }

private:
    std::vector<std::string> labels_;
};

/// Thrown when a projection direction has (numerically) zero variance,
/// e.g. beta orthogonal to the data or beta ~ 0.
class DegenerateDirectionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace causal
