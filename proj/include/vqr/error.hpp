#pragma once

#include <stdexcept>
#include <string>

namespace vqr {

/// Invalid user-supplied configuration (counts, bounds, unknown keys).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A caller broke a precondition (shape mismatch, partial assignment, ...).
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

struct EpisodeFinishedError : std::logic_error {
    using std::logic_error::logic_error;
};

struct ActionError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

/// Exhaustive search refused because the assignment space is too large.
struct SearchSpaceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Loss or gradient became NaN/inf during training.
struct NonFiniteError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Checkpoint or config file does not match the expected layout.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
    if (!ok) throw ContractError(what);
}

} // namespace vqr
