#include "scakit/sparsity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scakit/errors.hpp"

namespace scakit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_finite(const std::vector<VectorStats>& stats, double VectorStats::*field) {
  double sum = 0.0;
  long n = 0;
  for (const auto& s : stats) {
    const double v = s.*field;
    if (std::isfinite(v)) {
      sum += v;
      ++n;
    }
  }
  return n > 0 ? sum / static_cast<double>(n) : kNaN;
}

}  // namespace

double hoyer_sparsity(const Vector& x) {
  const long n = x.size();
  if (n < 2) throw ValueError("hoyer_sparsity needs n >= 2 entries");
  const double l1 = x.cwiseAbs().sum();
  const double l2 = x.norm();
  if (!(l2 > 0.0)) throw DegenerateError("hoyer_sparsity undefined for the zero vector");
  const double root = std::sqrt(static_cast<double>(n));
  // (root - l1/l2) / (root - 1) rearranged so exact cases stay exact.
  const double v = (root * l2 - l1) / ((root - 1.0) * l2);
  return std::clamp(v, 0.0, 1.0);
}

Moments moments(const Vector& x) {
  const long n = x.size();
  if (n < 2) throw ValueError("moments need n >= 2 entries");
  const double mean = x.mean();
  Moments m;
  for (long i = 0; i < n; ++i) {
    const double d = x(i) - mean;
    const double d2 = d * d;
    m.m2 += d2;
    m.m3 += d2 * d;
    m.m4 += d2 * d2;
  }
  const double inv = 1.0 / static_cast<double>(n);
  m.m2 *= inv;
  m.m3 *= inv;
  m.m4 *= inv;
  return m;
}

double kurtosis(const Vector& x) {
  const Moments m = moments(x);
  if (!(m.m2 > 0.0)) throw DegenerateError("kurtosis undefined for zero-variance input");
  return m.m4 / (m.m2 * m.m2);
}

std::string to_string(SkewnessFormula f) {
  return f == SkewnessFormula::standard ? "standard" : "paper";
}

SkewnessFormula skewness_formula_from_string(const std::string& s) {
  if (s == "standard") return SkewnessFormula::standard;
  if (s == "paper") return SkewnessFormula::paper;
  throw ValueError("unknown skewness formula '" + s + "' (expected standard|paper)");
}

double skewness(const Vector& x, SkewnessFormula formula) {
  const Moments m = moments(x);
  if (!(m.m2 > 0.0)) throw DegenerateError("skewness undefined for zero-variance input");
  const double denom =
      formula == SkewnessFormula::standard ? m.m2 * m.m2 * m.m2 : m.m2 * m.m2;
  return m.m3 * m.m3 / denom;
}

std::string to_string(ReportAxis a) { return a == ReportAxis::rows ? "rows" : "columns"; }

SparsityReport sparsity_report(const Matrix& m, ReportAxis axis, SkewnessFormula formula) {
  const long count = axis == ReportAxis::rows ? m.rows() : m.cols();
  SparsityReport rep;
  rep.axis = axis;
  rep.per_vector.reserve(count);

  for (long i = 0; i < count; ++i) {
    const Vector v = axis == ReportAxis::rows ? Vector(m.row(i).transpose()) : Vector(m.col(i));
    VectorStats st;
    st.index = i;
    if (!(v.norm() > 0.0)) {
      st.skipped = true;
      st.hoyer = st.kurtosis = st.skewness = kNaN;
    } else {
      st.hoyer = hoyer_sparsity(v);
      const Moments mo = moments(v);
      if (mo.m2 > 0.0) {
        st.kurtosis = mo.m4 / (mo.m2 * mo.m2);
        const double denom =
            formula == SkewnessFormula::standard ? mo.m2 * mo.m2 * mo.m2 : mo.m2 * mo.m2;
        st.skewness = mo.m3 * mo.m3 / denom;
      } else {
        st.kurtosis = st.skewness = kNaN;
      }
    }
    rep.per_vector.push_back(st);
  }

  rep.mean_hoyer = mean_finite(rep.per_vector, &VectorStats::hoyer);
  rep.mean_kurtosis = mean_finite(rep.per_vector, &VectorStats::kurtosis);
  rep.mean_skewness = mean_finite(rep.per_vector, &VectorStats::skewness);
  return rep;
}

FactorSparsity factor_sparsity_report(const Factorization& f, SkewnessFormula formula) {
  FactorSparsity fs;
  fs.w_report = sparsity_report(f.weights, ReportAxis::rows, formula);
  fs.r_report = sparsity_report(f.responses, ReportAxis::columns, formula);
  return fs;
}

nlohmann::json sparsity_report_to_json(const SparsityReport& r) {
  nlohmann::json j;
  j["axis"] = to_string(r.axis);
  j["mean_hoyer"] = r.mean_hoyer;
  j["mean_kurtosis"] = r.mean_kurtosis;
  j["mean_skewness"] = r.mean_skewness;
  auto& pv = j["per_vector"] = nlohmann::json::array();
  for (const auto& s : r.per_vector)
    pv.push_back({{"index", s.index},
                  {"skipped", s.skipped},
                  {"hoyer", s.hoyer},
                  {"kurtosis", s.kurtosis},
                  {"skewness", s.skewness}});
  return j;
}

nlohmann::json factor_sparsity_to_json(const FactorSparsity& fs) {
  return {{"weights", sparsity_report_to_json(fs.w_report)},
          {"responses", sparsity_report_to_json(fs.r_report)}};
}

}  // namespace scakit
