#ifndef FRACORBIT_ERRORS_HPP
#define FRACORBIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fracorbit {

// Numerical failure at run time (non-convergence, singular system, ...).
// The CLI maps this family to exit code 2.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid experiment configuration; message names the offending key.
// The CLI maps this family to exit code 1.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fracorbit

#endif
