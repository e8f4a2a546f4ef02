#pragma once

#include <stdexcept>
#include <string>

namespace imba {

// Invalid caller input: bad flags, out-of-range hyperparameters, shape mismatches.
struct invalid_argument_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Dataset cannot support the requested operation (missing class, too few samples).
struct degenerate_dataset_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Generator calibration could not reach the requested separability.
struct calibration_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A metric is undefined on the given inputs (e.g. single-class labels).
struct undefined_metric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Correlation undefined (constant input, too few points).
struct undefined_correlation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Effect size undefined (zero pooled variance).
struct undefined_effect_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace imba
