#pragma once

#include <stdexcept>
#include <string>

namespace nelsonlab {

/// Invalid configuration, bad operation preconditions (wrong scheme for the
/// boundary type, mismatched snapshot times, ...).
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Solver breakdowns: non-convergence, CFL rejection, NaN contamination.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

/// A query point (or characteristic foot) left a non-periodic domain.
class out_of_domain_error : public std::runtime_error {
public:
    explicit out_of_domain_error(const std::string& what) : std::runtime_error(what) {}
};

/// Sampling too coarse for the requested measurement (loop segments too long,
/// phase increments too large, vortex core under-resolved).
class resolution_error : public std::runtime_error {
public:
    explicit resolution_error(const std::string& what) : std::runtime_error(what) {}
};

/// Inputs that collapse to a degenerate object (e.g. a pair state with
/// vanishing norm).
class degenerate_input_error : public std::runtime_error {
public:
    explicit degenerate_input_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace nelsonlab
