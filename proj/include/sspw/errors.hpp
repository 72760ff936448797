#pragma once

#include <stdexcept>
#include <string>

namespace sspw {

// Caller supplied an invalid configuration: mismatched dimensions,
// out-of-range parameters, unsupported geometry kinds.
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input data violates a documented precondition: negative weights,
// all-zero vectors, malformed files.
class data_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A numerical routine failed to make progress (iteration caps, cycling
// guards). Carries diagnostics in the message.
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when an operation that needs cluster members receives none; the
// clustering layer catches this and re-seeds the offending centroid.
class empty_cluster_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace sspw
