#pragma once

#include <cstdint>
#include <string>

namespace kacrice {

/// Numeric result with its standard error. std_error is 0 only for closed forms
/// and other deterministic evaluations.
struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    long long n = 0;           // samples or cubature nodes
    std::uint64_t seed = 0;
    std::string method;
    bool flagged = false;      // unresolved samples or numerical trouble
    bool diverged = false;     // running integral failed to settle
    long long excluded = 0;    // samples left out of the mean
};

}  // namespace kacrice
