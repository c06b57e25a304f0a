#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "scakit/decompose.hpp"
#include "scakit/types.hpp"

namespace scakit {

// Hoyer sparsity (sqrt(n) - |x|_1/|x|_2) / (sqrt(n) - 1), clamped to [0,1].
// 1 for one-hot vectors, 0 for constant ones.
double hoyer_sparsity(const Vector& x);

struct Moments {
    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;
};

// Central sample moments m_r = (1/n) sum (x_i - mean)^r.
Moments moments(const Vector& x);

// kurtosis = m4 / m2^2 (the raw fourth standardized moment; no -3).
double kurtosis(const Vector& x);

// standard: m3^2 / m2^3 (scale-invariant squared skewness).
// paper: m3^2 / m2^2 as printed in the source formula; scales with the
// square of the data scale, kept for exact comparability.
enum class SkewnessFormula { standard, paper };

std::string to_string(SkewnessFormula f);
SkewnessFormula skewness_formula_from_string(const std::string& s);

double skewness(const Vector& x, SkewnessFormula formula = SkewnessFormula::standard);

// Per-vector statistics within a factor matrix. All-zero vectors are
// skipped (flag set, stats NaN); zero-variance vectors keep hoyer but have
// NaN kurtosis/skewness.
struct VectorStats {
    long index = 0;
    bool skipped = false;
    double hoyer = 0.0;
    double kurtosis = 0.0;
    double skewness = 0.0;
};

enum class ReportAxis { rows, columns };

std::string to_string(ReportAxis a);

struct SparsityReport {
    ReportAxis axis = ReportAxis::rows;
    std::vector<VectorStats> per_vector;
    double mean_hoyer = 0.0;     // means over vectors with finite values
    double mean_kurtosis = 0.0;
    double mean_skewness = 0.0;
};

SparsityReport sparsity_report(const Matrix& m, ReportAxis axis,
                               SkewnessFormula formula = SkewnessFormula::standard);

struct FactorSparsity {
    SparsityReport w_report;  // weights by rows (one row = one component)
    SparsityReport r_report;  // responses by columns (one column = one component)
};

FactorSparsity factor_sparsity_report(const Factorization& f,
                                      SkewnessFormula formula = SkewnessFormula::standard);

nlohmann::json sparsity_report_to_json(const SparsityReport& r);
nlohmann::json factor_sparsity_to_json(const FactorSparsity& fs);

}  // namespace scakit
