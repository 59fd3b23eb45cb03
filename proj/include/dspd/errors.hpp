#pragma once

#include <stdexcept>
#include <string>

namespace dspd {

/// Invalid or inconsistent run configuration (bad file, schema violation,
/// out-of-range parameter).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// An estimator or view accessor tried to read data outside the
/// neighborhood it is entitled to. This is a firewall, not a recoverable
/// condition: it means a code path violates the information model.
struct LocalityError : std::logic_error {
    explicit LocalityError(const std::string& what) : std::logic_error(what) {}
};

/// Push-sum protocol violation (e.g. a weight column not stochastic, or a
/// push-sum weight reaching zero, which indicates a missing self-loop).
struct ProtocolError : std::runtime_error {
    explicit ProtocolError(const std::string& what) : std::runtime_error(what) {}
};

/// Exact computation requested on a model too large to enumerate.
struct SizeCapError : std::runtime_error {
    explicit SizeCapError(const std::string& what) : std::runtime_error(what) {}
};

/// Caller broke an interface precondition.
struct ContractError : std::logic_error {
    explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

} // namespace dspd
