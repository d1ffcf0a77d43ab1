#pragma once

#include <stdexcept>
#include <string>

namespace chiralflat {

/// Base class for all errors raised by this library.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

struct near_dirac_point : error {
    explicit near_dirac_point(const std::string& w) : error(w) {}
};
struct non_invariant : error {
    explicit non_invariant(const std::string& w) : error(w) {}
};
struct truncation_unstable : error {
    explicit truncation_unstable(const std::string& w) : error(w) {}
};
struct ambiguous_cluster : error {
    explicit ambiguous_cluster(const std::string& w) : error(w) {}
};
struct empty_kernel : error {
    explicit empty_kernel(const std::string& w) : error(w) {}
};
struct non_convergent : error {
    explicit non_convergent(const std::string& w) : error(w) {}
};
struct inexact_coefficients : error {
    explicit inexact_coefficients(const std::string& w) : error(w) {}
};
struct non_quantized : error {
    explicit non_quantized(const std::string& w) : error(w) {}
};
struct contour_too_close : error {
    explicit contour_too_close(const std::string& w) : error(w) {}
};
struct singular_sample : error {
    explicit singular_sample(const std::string& w) : error(w) {}
};
struct ill_conditioned_zero : error {
    explicit ill_conditioned_zero(const std::string& w) : error(w) {}
};
struct pole_at : error {
    explicit pole_at(const std::string& w) : error(w) {}
};
struct inconclusive_gap : error {
    explicit inconclusive_gap(const std::string& w) : error(w) {}
};
struct parse_error : error {
    explicit parse_error(const std::string& w) : error(w) {}
};

} // namespace chiralflat
