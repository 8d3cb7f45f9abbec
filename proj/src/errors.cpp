#include "agg/errors.hpp"

#include <utility>

namespace agg {

ConvergenceError::ConvergenceError(const std::string& what, std::vector<double> residual_history)
    : Error(what), history_(std::move(residual_history)) {}

}  // namespace agg
