// SPDX-License-Identifier: MIT
//
// Common error base for the caten library.  Every typed failure condition
// thrown by a caten module derives from caten::Error, so callers can catch
// library faults separately from std exceptions.

#pragma once

#include <stdexcept>
#include <string>

namespace caten {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace caten
