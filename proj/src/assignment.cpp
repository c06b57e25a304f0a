#include "scakit/assignment.hpp"

#include <limits>

namespace scakit {

// Shortest-augmenting-path formulation on the negated (cost) matrix, with
// 1-based dual arrays; see Jonker & Volgenant style implementations.
std::vector<int> max_assignment(const Matrix& score) {
    const long n = score.rows();
    if (n == 0 || score.cols() != n)
        throw DimensionError("max_assignment: matrix must be square and non-empty");
    const double inf = std::numeric_limits<double>::infinity();

    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<long> p(n + 1, 0), way(n + 1, 0);
    for (long i = 1; i <= n; ++i) {
        p[0] = i;
        long j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const long i0 = p[j0];
            long j1 = 0;
            double delta = inf;
            for (long j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = -score(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (long j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const long j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }

    std::vector<int> perm(n, -1);
    for (long j = 1; j <= n; ++j)
        if (p[j]) perm[p[j] - 1] = static_cast<int>(j - 1);
    return perm;
}

}  // namespace scakit
