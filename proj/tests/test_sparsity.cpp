#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "scakit/decompose.hpp"
#include "scakit/errors.hpp"
#include "scakit/rng.hpp"
#include "scakit/sparsity.hpp"

using namespace scakit;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<long>(v.size()));
  long i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("hoyer sparsity anchor values") {
  CHECK(hoyer_sparsity(vec({3, 4, 0, 0})) == 0.6);  // (2*5-7)/(1*5), exactly
  CHECK(hoyer_sparsity(vec({0, 0, 5, 0})) == 1.0);
  CHECK(hoyer_sparsity(vec({2, 2, 2, 2})) == 0.0);
  CHECK(hoyer_sparsity(vec({-3, 4, 0, 0})) == 0.6);  // magnitudes only
}

TEST_CASE("hoyer sparsity invariances and range") {
  const Vector x = vec({3, 4, 0, 0});
  CHECK(hoyer_sparsity(7.3 * x) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(hoyer_sparsity(vec({0, 4, 0, 3})) == doctest::Approx(0.6).epsilon(1e-12));

  Rng rng(1, "hoyer");
  for (int t = 0; t < 50; ++t) {
    Vector r(6);
    for (long i = 0; i < 6; ++i) r(i) = rng.normal();
    const double h = hoyer_sparsity(r);
    CHECK(h >= 0.0);
    CHECK(h <= 1.0);
  }
}

TEST_CASE("hoyer sparsity degenerate inputs") {
  CHECK_THROWS_AS(hoyer_sparsity(vec({0, 0, 0})), DegenerateError);
  CHECK_THROWS_AS(hoyer_sparsity(vec({5})), ValueError);  // n >= 2 needed
}

TEST_CASE("central moments") {
  const Moments zero = moments(vec({4, 4, 4}));
  CHECK(zero.m2 == 0.0);
  CHECK(zero.m3 == 0.0);
  CHECK(zero.m4 == 0.0);

  const Moments pm = moments(vec({-1, 1}));
  CHECK(pm.m2 == 1.0);
  CHECK(pm.m3 == 0.0);
  CHECK(pm.m4 == 1.0);

  // (0,0,0,4): mean 1, deviations (-1,-1,-1,3)
  const Moments spike = moments(vec({0, 0, 0, 4}));
  CHECK(spike.m2 == 3.0);
  CHECK(spike.m3 == 6.0);
  CHECK(spike.m4 == 21.0);

  CHECK_THROWS_AS(moments(vec({1})), ValueError);
}

TEST_CASE("kurtosis") {
  CHECK(kurtosis(vec({-1, 1})) == 1.0);
  CHECK(kurtosis(vec({0, 0, 0, 4})) == doctest::Approx(21.0 / 9.0).epsilon(1e-12));
  CHECK_THROWS_AS(kurtosis(vec({2, 2, 2})), DegenerateError);

  // large-sample kurtosis of a normal converges to 3
  Rng rng(2, "kurt");
  Vector x(20000);
  for (long i = 0; i < x.size(); ++i) x(i) = rng.normal();
  CHECK(std::abs(kurtosis(x) - 3.0) < 3.0 * std::sqrt(24.0 / 20000.0));
}

TEST_CASE("skewness under both formulas") {
  const Vector spike = vec({0, 0, 0, 4});
  // m3^2/m2^3 = 36/27; m3^2/m2^2 = 36/9
  CHECK(skewness(spike) == doctest::Approx(36.0 / 27.0).epsilon(1e-12));
  CHECK(skewness(spike, SkewnessFormula::paper) == doctest::Approx(4.0).epsilon(1e-12));

  const Vector scaled = 5.0 * spike;
  CHECK(skewness(scaled) == doctest::Approx(36.0 / 27.0).epsilon(1e-12));  // scale-free
  CHECK(skewness(scaled, SkewnessFormula::paper) ==
        doctest::Approx(100.0).epsilon(1e-12));  // grows as a^2

  CHECK(skewness(vec({-1, 1, -1, 1})) == 0.0);  // symmetric
  CHECK_THROWS_AS(skewness(vec({3, 3})), DegenerateError);

  CHECK(skewness_formula_from_string("standard") == SkewnessFormula::standard);
  CHECK(skewness_formula_from_string("paper") == SkewnessFormula::paper);
  CHECK_THROWS_AS(skewness_formula_from_string("fisher"), ValueError);
  CHECK(to_string(SkewnessFormula::paper) == "paper");
}

TEST_CASE("sparsity_report over rows") {
  Matrix m(3, 4);
  m << 0, 0, 5, 0,   // one-hot
       0, 0, 0, 0,   // all zero: skipped
       3, 4, 0, 0;
  const SparsityReport rep = sparsity_report(m, ReportAxis::rows);
  CHECK(rep.axis == ReportAxis::rows);
  REQUIRE(rep.per_vector.size() == 3);

  CHECK(rep.per_vector[0].index == 0);
  CHECK_FALSE(rep.per_vector[0].skipped);
  CHECK(rep.per_vector[0].hoyer == 1.0);

  CHECK(rep.per_vector[1].skipped);
  CHECK(std::isnan(rep.per_vector[1].hoyer));
  CHECK(std::isnan(rep.per_vector[1].kurtosis));

  CHECK(rep.per_vector[2].hoyer == 0.6);
  CHECK(rep.per_vector[2].kurtosis == kurtosis(vec({3, 4, 0, 0})));
  CHECK(rep.per_vector[2].skewness == skewness(vec({3, 4, 0, 0})));

  // aggregates ignore the skipped row
  CHECK(rep.mean_hoyer == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("zero-variance vectors keep hoyer but lose higher moments") {
  Matrix m(2, 3);
  m << 2, 2, 2,
       1, 0, 0;
  const SparsityReport rep = sparsity_report(m, ReportAxis::rows);
  CHECK_FALSE(rep.per_vector[0].skipped);
  CHECK(rep.per_vector[0].hoyer == 0.0);
  CHECK(std::isnan(rep.per_vector[0].kurtosis));
  CHECK(std::isnan(rep.per_vector[0].skewness));
  CHECK(rep.per_vector[1].hoyer == 1.0);

  // means over finite values only: kurtosis mean comes from row 1 alone
  CHECK(rep.mean_hoyer == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(rep.mean_kurtosis == doctest::Approx(kurtosis(vec({1, 0, 0}))).epsilon(1e-12));
}

TEST_CASE("report axis selects rows or columns") {
  Matrix m(2, 3);
  m << 1, 0, 0,
       1, 1, 1;
  const SparsityReport rows = sparsity_report(m, ReportAxis::rows);
  REQUIRE(rows.per_vector.size() == 2);
  CHECK(rows.per_vector[0].hoyer == 1.0);
  CHECK(rows.per_vector[1].hoyer == 0.0);

  const SparsityReport cols = sparsity_report(m, ReportAxis::columns);
  REQUIRE(cols.per_vector.size() == 3);
  // column 0 = (1,1): constant (sqrt(2)*sqrt(2) rounds a hair above 2, so
  // the clamp can't land it on exactly zero); columns 1 and 2 are one-hot
  CHECK(cols.per_vector[0].hoyer >= 0.0);
  CHECK(cols.per_vector[0].hoyer < 1e-12);
  CHECK(cols.per_vector[1].hoyer == 1.0);
  CHECK(cols.per_vector[2].hoyer == 1.0);
  CHECK(to_string(ReportAxis::columns) == "columns");
}

TEST_CASE("factor_sparsity_report wires weights rows and responses columns") {
  Factorization f;
  f.responses = Matrix(4, 2);
  f.responses << 1, 0,
                 2, 0,
                 0, 3,
                 0, 4;
  f.weights = Matrix(2, 4);
  f.weights << 5, 0, 0, 0,
               1, 1, 1, 1;
  const FactorSparsity fs = factor_sparsity_report(f);
  CHECK(fs.w_report.axis == ReportAxis::rows);
  CHECK(fs.r_report.axis == ReportAxis::columns);
  REQUIRE(fs.w_report.per_vector.size() == 2);
  REQUIRE(fs.r_report.per_vector.size() == 2);
  CHECK(fs.w_report.per_vector[0].hoyer == 1.0);
  CHECK(fs.w_report.per_vector[1].hoyer == 0.0);
  const double half_hoyer = hoyer_sparsity(vec({1, 2, 0, 0}));
  CHECK(fs.r_report.per_vector[0].hoyer == doctest::Approx(half_hoyer).epsilon(1e-12));
}

TEST_CASE("sparsity json layout") {
  Matrix m(2, 2);
  m << 1, 0,
       0, 0;
  const SparsityReport rep = sparsity_report(m, ReportAxis::rows);
  const nlohmann::json j = sparsity_report_to_json(rep);
  CHECK(j.at("axis") == "rows");
  REQUIRE(j.at("per_vector").size() == 2);
  CHECK(j.at("per_vector")[0].at("index") == 0);
  CHECK(j.at("per_vector")[0].at("hoyer") == 1.0);
  CHECK(j.at("per_vector")[1].at("skipped") == true);
  CHECK(std::isnan(j.at("per_vector")[1].at("hoyer").get<double>()));
  CHECK(j.dump().find("null") != std::string::npos);  // NaN serializes as null
  CHECK(j.at("mean_hoyer") == 1.0);

  Factorization f;
  f.responses = m;
  f.weights = Matrix::Ones(2, 2);
  const nlohmann::json fj = factor_sparsity_to_json(factor_sparsity_report(f));
  CHECK(fj.contains("weights"));
  CHECK(fj.contains("responses"));
  CHECK(fj.at("weights").at("axis") == "rows");
  CHECK(fj.at("responses").at("axis") == "columns");
}
