#pragma once

#include <stdexcept>
#include <string>

namespace macpam {

// A rate pair in bits per real dimension.
struct RatePoint {
    double r1 = 0.0;
    double r2 = 0.0;
};

inline bool operator==(const RatePoint& a, const RatePoint& b) {
    return a.r1 == b.r1 && a.r2 == b.r2;
}

// Thrown when an iterative solve fails to bracket or converge.
class numerical_error : public std::runtime_error {
  public:
    explicit numerical_error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

// Thrown when a requested operating point lies outside the achievable region.
class infeasible_error : public std::runtime_error {
  public:
    explicit infeasible_error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

}  // namespace macpam
