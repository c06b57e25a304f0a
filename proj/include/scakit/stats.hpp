#pragma once

#include "scakit/types.hpp"

namespace scakit {

// Pearson correlation. Throws DegenerateError when either input has zero
// variance. Bitwise-identical inputs score exactly 1.0.
double pearson(const Vector& a, const Vector& b);

// Ranks with ties averaged (1-based).
Vector average_ranks(const Vector& v);

// Spearman rank correlation (Pearson on tie-averaged ranks).
double spearman(const Vector& a, const Vector& b);

// cos of the angle between a and b; throws DegenerateError on a zero vector.
double cosine_similarity(const Vector& a, const Vector& b);

// Strict upper triangle in row-major order, length S*(S-1)/2.
Vector upper_triangle(const Matrix& m);

}  // namespace scakit
