#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace knudsen {

// Adaptive Simpson on [a, b] with absolute tolerance.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol, int max_depth = 48);

// Halton radical-inverse sequence, one value per (index, prime base).
double halton(std::uint64_t index, unsigned base);

// Deterministic pairwise summation (fixed reduction tree); used everywhere a
// reduction must not depend on worker count.
double pairwise_sum(const double* data, std::size_t n);
double pairwise_sum(const std::vector<double>& data);

}  // namespace knudsen
