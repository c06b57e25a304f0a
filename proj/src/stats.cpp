#include "scakit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace scakit {

namespace {
bool identical(const Vector& a, const Vector& b) {
    return (a.array() == b.array()).all();
}
}  // namespace

double pearson(const Vector& a, const Vector& b) {
    if (a.size() != b.size())
        throw DimensionError("pearson: length mismatch");
    if (a.size() < 2) throw DimensionError("pearson: need at least 2 values");
    const Vector da = a.array() - a.mean();
    const Vector db = b.array() - b.mean();
    const double va = da.squaredNorm();
    const double vb = db.squaredNorm();
    if (va <= 0.0 || vb <= 0.0)
        throw DegenerateError("pearson: zero-variance input");
    if (identical(a, b)) return 1.0;
    // single sqrt keeps simple rational correlations (e.g. rank rho) exact
    return da.dot(db) / std::sqrt(va * vb);
}

Vector average_ranks(const Vector& v) {
    const long n = v.size();
    std::vector<long> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0L);
    std::stable_sort(order.begin(), order.end(),
                     [&](long i, long j) { return v[i] < v[j]; });
    Vector ranks(n);
    long i = 0;
    while (i < n) {
        long j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = 0.5 * (i + j) + 1.0;  // 1-based average rank
        for (long k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double spearman(const Vector& a, const Vector& b) {
    if (a.size() != b.size())
        throw DimensionError("spearman: length mismatch");
    return pearson(average_ranks(a), average_ranks(b));
}

double cosine_similarity(const Vector& a, const Vector& b) {
    if (a.size() != b.size())
        throw DimensionError("cosine: length mismatch");
    const double na = a.norm();
    const double nb = b.norm();
    if (na <= 0.0 || nb <= 0.0)
        throw DegenerateError("cosine: zero vector");
    if (identical(a, b)) return 1.0;
    return a.dot(b) / (na * nb);
}

Vector upper_triangle(const Matrix& m) {
    const long s = m.rows();
    if (m.cols() != s) throw DimensionError("upper_triangle: matrix not square");
    Vector out(s * (s - 1) / 2);
    long k = 0;
    for (long i = 0; i < s; ++i)
        for (long j = i + 1; j < s; ++j) out[k++] = m(i, j);
    return out;
}

}  // namespace scakit
