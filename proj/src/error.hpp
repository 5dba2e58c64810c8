#pragma once

#include <stdexcept>
#include <string>

namespace tmoe {

// Error taxonomy shared by the C API and the CLI exit statuses:
// usage errors -> 1, data/IO errors -> 2, failed internal checks -> 3.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CheckError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeError : DataError {
    using DataError::DataError;
};

}  // namespace tmoe
