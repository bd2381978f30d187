#pragma once

#include "resbal/data.hpp"

namespace resbal {

// Euclidean projection of v onto {x : sum(x) = total, lo <= x_i <= hi}.
// Exact up to rounding, O(n log n). Requires n*lo <= total <= n*hi.
Vector project_capped_simplex(const Vector& v, double lo, double hi, double total = 1.0);

// Euclidean projection of (v, s) onto the epigraph {(z, t) : ||z||_inf <= t}.
void project_linf_epigraph(const Vector& v, double s, Vector& z, double& t);

}  // namespace resbal
