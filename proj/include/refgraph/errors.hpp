#pragma once

#include <stdexcept>
#include <string>

namespace refgraph {

/// Caller broke an operation's precondition (bad argument, sealed graph,
/// unknown domain, out-of-order input).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input data could not be used (malformed line, unsalvageable domain,
/// empty traffic).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace refgraph
