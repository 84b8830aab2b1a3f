#pragma once

#include <stdexcept>
#include <string>

namespace mfuq {

// Exit-code classes used by the CLI: config (2), oracle (3), numerical (4).

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class OracleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or incompatible serialized artifact (surrogate, posterior, cache).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mfuq
