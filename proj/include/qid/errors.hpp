#pragma once

#include <stdexcept>
#include <string>

namespace qid {

struct IndexOutOfRange : std::out_of_range {
    using std::out_of_range::out_of_range;
};

struct InvalidPair : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DegenerateState : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonFiniteState : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptySeries : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct WindowTooShort : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct RegimeViolation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace qid
