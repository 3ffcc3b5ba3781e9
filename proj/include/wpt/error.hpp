// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace wpt {

/// Raised when an argument violates an operation's precondition.
class invalid_input : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline void require(bool condition, const std::string& message)
{
    if (!condition)
        throw invalid_input(message);
}

} // namespace wpt
