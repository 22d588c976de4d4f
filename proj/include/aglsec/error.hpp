#pragma once

#include <stdexcept>
#include <string>

namespace aglsec {

// Malformed or inconsistent input data: bad files, bad formats, bad manifests.
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// A broken internal invariant. Indicates a bug, not bad input.
struct InternalError : std::logic_error {
    explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

} // namespace aglsec
