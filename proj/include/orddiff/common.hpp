#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace orddiff {

// Error taxonomy. Shape mismatches and out-of-range arguments are caller
// bugs; contract errors are sequencing bugs (e.g. stepping an optimizer
// without gradients); io/load errors come from the filesystem.
struct DimError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct LoadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void check_dim(bool ok, const std::string &msg) {
    if (!ok) throw DimError(msg);
}
inline void check_domain(bool ok, const std::string &msg) {
    if (!ok) throw DomainError(msg);
}
inline void check_contract(bool ok, const std::string &msg) {
    if (!ok) throw ContractError(msg);
}

}  // namespace orddiff
