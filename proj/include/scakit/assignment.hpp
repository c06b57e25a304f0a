#pragma once

#include <vector>

#include "scakit/types.hpp"

namespace scakit {

// Maximum-sum linear assignment on a square score matrix (Kuhn-Munkres,
// O(n^3)). Returns perm with perm[i] = column assigned to row i.
std::vector<int> max_assignment(const Matrix& score);

}  // namespace scakit
