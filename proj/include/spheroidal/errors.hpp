#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace spheroidal {

// Numerical failure: an eigensolve or series did not converge within its cap.
// The message carries the offending (kind, c, m, n, truncation) context.
class convergence_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A truncated expansion hit its mode cap before reaching the requested
// tolerance.  Carries the partial sum and the tail estimate at the cap.
class truncation_error : public std::runtime_error {
public:
    truncation_error(const std::string& msg, std::complex<double> partial, double tail)
        : std::runtime_error(msg), partial_sum(partial), tail_estimate(tail) {}
    std::complex<double> partial_sum;
    double tail_estimate;
};

class cache_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class cache_io_error : public cache_error {
public:
    using cache_error::cache_error;
};

class cache_version_error : public cache_error {
public:
    using cache_error::cache_error;
};

class cache_checksum_error : public cache_error {
public:
    using cache_error::cache_error;
};

}  // namespace spheroidal
