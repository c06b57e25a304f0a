#include <doctest.h>

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "scakit/alignment.hpp"
#include "scakit/errors.hpp"
#include "scakit/rng.hpp"
#include "scakit/stats.hpp"

using namespace scakit;

namespace {

ConnectivityMatrix icm3(double e01, double e02, double e12) {
  Matrix m(3, 3);
  m << 1.0, e01, e02, e01, 1.0, e12, e02, e12, 1.0;
  return ConnectivityMatrix(std::move(m), ConnectivityKind::icm, make_default_ids("s", 3));
}

ConnectivityMatrix rdm3(double e01, double e02, double e12) {
  Matrix m(3, 3);
  m << 0.0, e01, e02, e01, 0.0, e12, e02, e12, 0.0;
  return ConnectivityMatrix(std::move(m), ConnectivityKind::rdm, make_default_ids("s", 3));
}

Matrix random_matrix(long rows, long cols, std::uint64_t seed) {
  Rng rng(seed, "testdata");
  Matrix m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

ResponseMatrix block_data(std::uint64_t seed) {
  Rng rng(seed, "blocks");
  Matrix x = Matrix::Zero(20, 10);
  for (long s = 0; s < 20; ++s)
    for (long v = 0; v < 10; ++v) {
      const bool active = (s < 10) == (v < 5);
      x(s, v) = (active ? 1.0 : 0.0) + 0.02 * rng.uniform();
    }
  return ResponseMatrix::with_default_ids(x);
}

double brute_force_cms(const Matrix& x, const Matrix& y, bool absolute,
                       SimilarityKind similarity) {
  const long c = x.cols();
  Matrix score(c, c);
  for (long i = 0; i < c; ++i)
    for (long j = 0; j < c; ++j) {
      double v = similarity == SimilarityKind::pearson ? pearson(x.col(i), y.col(j))
                                                       : cosine_similarity(x.col(i), y.col(j));
      score(i, j) = absolute ? std::abs(v) : v;
    }
  std::vector<int> perm(c);
  std::iota(perm.begin(), perm.end(), 0);
  double best = -std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (long i = 0; i < c; ++i) total += score(i, perm[i]);
    best = std::max(best, total / static_cast<double>(c));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST_CASE("component_assignments takes the argmax, ties to the lowest index") {
  Matrix r(3, 3);
  r << 0.1, 0.9, 0.2,
       0.7, 0.7, 0.1,   // tie between components 0 and 1
       0.0, 0.0, 0.0;   // all-tie
  const auto a = component_assignments(r);
  CHECK(a == std::vector<int>{1, 0, 0});
}

TEST_CASE("icm_from_assignments basic co-assignment counting") {
  const auto ids = make_default_ids("s", 3);
  const ConnectivityMatrix one = icm_from_assignments({{0, 0, 1}}, ids);
  CHECK(one.data()(0, 1) == 1.0);
  CHECK(one.data()(0, 2) == 0.0);
  CHECK(one.data()(1, 2) == 0.0);
  CHECK(one.data()(0, 0) == 1.0);
  CHECK(one.kind() == ConnectivityKind::icm);

  // two runs disagree on exactly the (0,1) pair
  const ConnectivityMatrix two = icm_from_assignments({{0, 0, 1}, {0, 1, 1}}, ids);
  CHECK(two.data()(0, 1) == 0.5);
  CHECK(two.data()(0, 2) == 0.0);
  CHECK(two.data()(1, 2) == 0.5);

  CHECK_THROWS_AS(icm_from_assignments({}, ids), ValueError);
  CHECK_THROWS_AS(icm_from_assignments({{0, 0}}, ids), DimensionError);
}

TEST_CASE("build_icm separates the stimulus blocks") {
  const ResponseMatrix d = block_data(1);
  GibbsConfig cfg;
  cfg.n_sweeps = 60;
  cfg.burn_in = 30;
  const ConnectivityMatrix icm = build_icm(d, 2, 20, cfg, 3);

  double within = 0.0, between = 0.0;
  long nw = 0, nb = 0;
  for (long i = 0; i < 20; ++i)
    for (long j = i + 1; j < 20; ++j) {
      if ((i < 10) == (j < 10)) {
        within += icm.data()(i, j);
        ++nw;
      } else {
        between += icm.data()(i, j);
        ++nb;
      }
    }
  CHECK(within / nw > 0.9);
  CHECK(between / nb < 0.1);

  const ConnectivityMatrix again = build_icm(d, 2, 20, cfg, 3);
  CHECK((again.data().array() == icm.data().array()).all());
}

TEST_CASE("sca_score exactness and hand oracle") {
  const ConnectivityMatrix a = icm3(0.9, 0.1, 0.1);
  CHECK(sca_score(a, a).value == 1.0);  // identical triangles: exactly one

  const ConnectivityMatrix b = icm3(0.8, 0.2, 0.0);
  const AlignmentScore s = sca_score(a, b);
  CHECK(s.value == doctest::Approx(0.9707253433941508).epsilon(1e-12));
  CHECK(s.metric == MetricKind::sca);
  CHECK(s.n_stimuli == 3);
  CHECK(sca_score(b, a).value == doctest::Approx(s.value).epsilon(1e-15));

  CHECK_THROWS_AS(sca_score(a, icm3(0.5, 0.5, 0.5)), DegenerateError);
  CHECK_THROWS_AS(sca_score(a, rdm3(1, 2, 3)), ValueError);

  Matrix m(4, 4);
  m.setIdentity();
  const ConnectivityMatrix other_set(m, ConnectivityKind::icm, make_default_ids("s", 4));
  CHECK_THROWS_AS(sca_score(a, other_set), DimensionError);
  const ConnectivityMatrix renamed(icm3(0.9, 0.1, 0.1).data(), ConnectivityKind::icm,
                                   {"x0", "x1", "x2"});
  CHECK_THROWS_AS(sca_score(a, renamed), ValueError);
}

TEST_CASE("build_rdm correlation entries") {
  Matrix x(3, 3);
  x << 1, 2, 3,
       3, 2, 1,
       2, 4, 6;
  const ResponseMatrix d = ResponseMatrix::with_default_ids(x);
  const ConnectivityMatrix rdm = build_rdm(d, RdmMetric::correlation);
  CHECK(rdm.kind() == ConnectivityKind::rdm);
  CHECK(rdm.data()(0, 1) == doctest::Approx(2.0).epsilon(1e-12));   // perfect anticorrelation
  CHECK(rdm.data()(0, 2) == doctest::Approx(0.0).epsilon(1e-12));   // perfect correlation
  CHECK(rdm.data()(0, 2) >= 0.0);                                    // clamped, never negative
  CHECK(rdm.data()(0, 0) == 0.0);
  CHECK(rdm.data()(2, 1) == rdm.data()(1, 2));

  Matrix with_dup = x;
  with_dup.row(1) = with_dup.row(0);
  const auto rdm_dup = build_rdm(ResponseMatrix::with_default_ids(with_dup), RdmMetric::correlation);
  CHECK(rdm_dup.data()(0, 1) == 0.0);  // identical rows: exactly zero

  Matrix with_const = x;
  with_const.row(1).setConstant(5.0);
  CHECK_THROWS_AS(build_rdm(ResponseMatrix::with_default_ids(with_const), RdmMetric::correlation),
                  DegenerateError);

  Matrix two_rows(2, 3);
  two_rows << 1, 2, 3, 4, 5, 6;
  CHECK_THROWS_AS(build_rdm(ResponseMatrix::with_default_ids(two_rows), RdmMetric::correlation),
                  ValueError);
}

TEST_CASE("correlation rdm is invariant to positive affine row transforms") {
  const Matrix x = random_matrix(6, 12, 2);
  Matrix y = x;
  Rng rng(3, "affine");
  for (long i = 0; i < y.rows(); ++i)
    y.row(i) = (y.row(i).array() * (0.5 + rng.uniform()) + rng.normal()).matrix();
  const auto ra = build_rdm(ResponseMatrix::with_default_ids(x), RdmMetric::correlation);
  const auto rb = build_rdm(ResponseMatrix::with_default_ids(y), RdmMetric::correlation);
  CHECK((ra.data() - rb.data()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("build_rdm euclidean entries") {
  Matrix x(3, 2);
  x << 0, 0,
       3, 4,
       0, 0;
  const auto rdm = build_rdm(ResponseMatrix::with_default_ids(x), RdmMetric::euclidean);
  CHECK(rdm.data()(0, 1) == 5.0);
  CHECK(rdm.data()(0, 2) == 0.0);
  CHECK(rdm.data()(1, 2) == 5.0);
  // constant rows are fine for the euclidean metric
  Matrix c = Matrix::Constant(3, 2, 7.0);
  CHECK_NOTHROW(build_rdm(ResponseMatrix::with_default_ids(c), RdmMetric::euclidean));
}

TEST_CASE("rsa_score rank correlation") {
  const ConnectivityMatrix a = rdm3(1, 2, 3);
  CHECK(rsa_score(a, a).value == 1.0);

  const ConnectivityMatrix squared = rdm3(1, 4, 9);
  CHECK(rsa_score(a, squared).value == 1.0);  // monotone transform preserves ranks

  const ConnectivityMatrix b = rdm3(3, 1, 2);
  const AlignmentScore s = rsa_score(a, b);
  CHECK(s.value == -0.5);
  CHECK(s.metric == MetricKind::rsa);
  CHECK(rsa_score(b, a).value == -0.5);

  CHECK_THROWS_AS(rsa_score(a, icm3(0.9, 0.1, 0.1)), ValueError);

  const ConnectivityMatrix behav(rdm3(1, 2, 3).data(), ConnectivityKind::behavioral,
                                 make_default_ids("s", 3));
  CHECK(rsa_score(a, behav).value == 1.0);  // behavioral matrices are rdm-like
}

TEST_CASE("euclidean rdm geometry is rotation invariant") {
  const Matrix x = random_matrix(10, 6, 4);
  const Matrix q = Eigen::HouseholderQR<Matrix>(random_matrix(6, 6, 5)).householderQ();
  const Matrix xr = x * q;

  const auto ra = build_rdm(ResponseMatrix::with_default_ids(x), RdmMetric::euclidean);
  const auto rb = build_rdm(ResponseMatrix::with_default_ids(xr), RdmMetric::euclidean);
  CHECK(rsa_score(ra, rb).value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("cms trivial permutations") {
  const Matrix x = random_matrix(10, 4, 6);
  const CmsResult same = cms(x, x);
  CHECK(same.score.value == 1.0);
  CHECK(same.permutation == std::vector<int>{0, 1, 2, 3});

  const Matrix rev = x.rowwise().reverse();
  const CmsResult flipped = cms(x, rev);
  CHECK(flipped.score.value == 1.0);
  CHECK(flipped.permutation == std::vector<int>{3, 2, 1, 0});
}

TEST_CASE("cms equals brute force over all permutations") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const long c = 2 + static_cast<long>(seed % 6);  // 2..7 components
    const Matrix x = random_matrix(10, c, 100 + seed);
    const Matrix y = random_matrix(10, c, 200 + seed);
    const CmsResult res = cms(x, y);
    CHECK(res.score.value == brute_force_cms(x, y, false, SimilarityKind::pearson));
  }
}

TEST_CASE("cms validation and invariances") {
  const Matrix x = random_matrix(8, 3, 7);
  Matrix y = random_matrix(8, 3, 8);

  CHECK_THROWS_AS(cms(x, random_matrix(9, 3, 9)), DimensionError);
  CHECK_THROWS_AS(cms(x, random_matrix(8, 2, 9)), DimensionError);
  Matrix with_const = y;
  with_const.col(1).setConstant(3.0);
  CHECK_THROWS_AS(cms(x, with_const), DegenerateError);
  CHECK_NOTHROW(cms(x, with_const, false, SimilarityKind::cosine));  // nonzero constant ok for cosine
  with_const.col(1).setZero();
  CHECK_THROWS_AS(cms(x, with_const, false, SimilarityKind::cosine), DegenerateError);

  // column permutation of y cannot change the optimum
  Matrix yp(8, 3);
  yp.col(0) = y.col(2);
  yp.col(1) = y.col(0);
  yp.col(2) = y.col(1);
  CHECK(cms(x, yp).score.value == cms(x, y).score.value);

  // positive affine transforms leave Pearson similarity unchanged
  Matrix ya = y;
  Rng rng(10, "affine");
  for (long j = 0; j < ya.cols(); ++j)
    ya.col(j) = (ya.col(j).array() * (0.5 + rng.uniform()) + rng.normal()).matrix();
  CHECK(cms(x, ya).score.value == doctest::Approx(cms(x, y).score.value).epsilon(1e-12));
}

TEST_CASE("cms absolute flag rescues sign-flipped components") {
  const Matrix x = random_matrix(12, 3, 11);
  const Matrix neg = -x;
  CHECK(cms(x, neg, true).score.value == doctest::Approx(1.0).epsilon(1e-12));
  // without |.| the maximizer dodges the -1 diagonal; it still can't beat
  // the near-zero cross correlations, so the score stays far below 1
  const double signed_score = cms(x, neg, false).score.value;
  CHECK(signed_score == brute_force_cms(x, neg, false, SimilarityKind::pearson));
  CHECK(signed_score < 0.5);

  // one component leaves no room to dodge: forced match is exactly -1
  const Matrix x1 = x.col(0);
  CHECK(cms(x1, Matrix(-x1), false).score.value ==
        doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("cms cosine similarity flag") {
  Matrix x(4, 2);
  x << 1, 0,
       0, 1,
       0, 0,
       0, 0;
  Matrix y(4, 2);
  y << 0, 2,   // columns scaled and swapped
       3, 0,
       0, 0,
       0, 0;
  const CmsResult res = cms(x, y, false, SimilarityKind::cosine);
  CHECK(res.score.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.permutation == std::vector<int>{1, 0});
}

TEST_CASE("recovery_score is cms on latent factors") {
  const Matrix l = random_matrix(30, 4, 12);
  CHECK(recovery_score(l, l).value == 1.0);

  Matrix scaled = l;
  for (long j = 0; j < scaled.cols(); ++j) scaled.col(j) *= 2.0 + static_cast<double>(j);
  CHECK(recovery_score(l, scaled).value == doctest::Approx(1.0).epsilon(1e-12));

  const Matrix other = random_matrix(30, 4, 13);
  CHECK(recovery_score(l, other).value == cms(l, other).score.value);
}

TEST_CASE("encoding recovers an identity mapping") {
  const Matrix x = random_matrix(60, 5, 14);
  const ResponseMatrix rm = ResponseMatrix::with_default_ids(x);
  EncodingConfig cfg;
  cfg.seed = 3;
  const AlignmentScore s = encoding_score(rm, rm, cfg);
  CHECK(s.value > 0.99);
  CHECK(s.metric == MetricKind::encoding);
  CHECK(s.n_stimuli == 60);
  CHECK(s.params.at("per_unit_r2").size() == 5);
  CHECK(s.params.at("chosen_penalties").size() == 5);
  CHECK(s.params.at("n_train").get<long>() == 48);
  CHECK(s.params.at("n_test").get<long>() == 12);

  const AlignmentScore again = encoding_score(rm, rm, cfg);
  CHECK(again.value == s.value);  // fully deterministic given the seed
}

TEST_CASE("encoding finds nothing in independent noise") {
  const ResponseMatrix features = ResponseMatrix::with_default_ids(random_matrix(500, 10, 15));
  const ResponseMatrix targets = ResponseMatrix::with_default_ids(random_matrix(500, 5, 16));
  EncodingConfig cfg;
  cfg.seed = 4;
  CHECK(encoding_score(features, targets, cfg).value <= 0.05);
}

TEST_CASE("encoding recovers a noisy linear map") {
  const Matrix x = random_matrix(200, 8, 17);
  const Matrix map = random_matrix(8, 6, 18);
  Matrix y = x * map;
  const double signal_sd = std::sqrt(y.array().square().mean());
  Rng rng(19, "noise");
  for (long i = 0; i < y.rows(); ++i)
    for (long j = 0; j < y.cols(); ++j) y(i, j) += 0.1 * signal_sd * rng.normal();

  const std::vector<std::string> sids = make_default_ids("s", 200);
  const ResponseMatrix features(x, sids, make_default_ids("f", 8));
  const ResponseMatrix targets(y, sids, make_default_ids("u", 6));
  EncodingConfig cfg;
  cfg.seed = 5;
  const double r2 = encoding_score(features, targets, cfg).value;
  CHECK(r2 >= 0.85);
  CHECK(r2 <= 1.0);
}

TEST_CASE("encoding validation") {
  const Matrix x = random_matrix(10, 3, 20);
  const ResponseMatrix rm = ResponseMatrix::with_default_ids(x);
  EncodingConfig cfg;

  ResponseMatrix renamed(x, make_default_ids("t", 10), make_default_ids("u", 3));
  CHECK_THROWS_AS(encoding_score(rm, renamed, cfg), ValueError);
  const ResponseMatrix fewer = ResponseMatrix::with_default_ids(random_matrix(8, 3, 21));
  CHECK_THROWS_AS(encoding_score(rm, fewer, cfg), DimensionError);

  // 10 stimuli at 0.8 -> 8/2 split is fine; 4 stimuli -> 3/1 is degenerate
  const ResponseMatrix tiny = ResponseMatrix::with_default_ids(random_matrix(4, 3, 22));
  CHECK_THROWS_AS(encoding_score(tiny, tiny, cfg), DegenerateError);

  EncodingConfig bad = cfg;
  bad.train_fraction = 1.0;
  CHECK_THROWS_AS(encoding_score(rm, rm, bad), ValueError);
  bad = cfg;
  bad.ridge_penalties.clear();
  CHECK_THROWS_AS(encoding_score(rm, rm, bad), ValueError);
  bad = cfg;
  bad.ridge_penalties = {0.0};
  CHECK_THROWS_AS(encoding_score(rm, rm, bad), ValueError);
  bad = cfg;
  bad.n_folds_inner = 1;
  CHECK_THROWS_AS(encoding_score(rm, rm, bad), ValueError);
  bad = cfg;
  bad.n_folds_inner = 9;  // exceeds the 8-stimulus training split
  CHECK_THROWS_AS(encoding_score(rm, rm, bad), ValueError);
}

TEST_CASE("default ridge grid spans 1e-2 to 1e4") {
  const auto grid = default_ridge_grid();
  REQUIRE(grid.size() == 7);
  CHECK(grid.front() == doctest::Approx(1e-2).epsilon(1e-12));
  CHECK(grid.back() == doctest::Approx(1e4).epsilon(1e-12));
  CHECK(std::is_sorted(grid.begin(), grid.end()));
}

TEST_CASE("metric kind string round trips") {
  for (const MetricKind m :
       {MetricKind::sca, MetricKind::rsa, MetricKind::cms, MetricKind::encoding})
    CHECK(metric_from_string(to_string(m)) == m);
  CHECK_THROWS_AS(metric_from_string("cka"), ValueError);
  CHECK(rdm_metric_from_string("euclidean") == RdmMetric::euclidean);
  CHECK_THROWS_AS(rdm_metric_from_string("cityblock"), ValueError);
  CHECK(similarity_from_string("cosine") == SimilarityKind::cosine);
  CHECK_THROWS_AS(similarity_from_string("dot"), ValueError);
}
