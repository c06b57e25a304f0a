#include "scakit/alignment.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "scakit/assignment.hpp"
#include "scakit/errors.hpp"
#include "scakit/parallel.hpp"
#include "scakit/rng.hpp"
#include "scakit/stats.hpp"

namespace scakit {

namespace {

void check_same_stimuli(const ConnectivityMatrix& a, const ConnectivityMatrix& b) {
  if (a.n_stimuli() != b.n_stimuli())
    throw DimensionError("connectivity matrices cover " + std::to_string(a.n_stimuli()) + " vs " +
                         std::to_string(b.n_stimuli()) + " stimuli");
  if (a.stimulus_ids() != b.stimulus_ids())
    throw ValueError("stimulus sets differ (same size but different or reordered ids)");
}

void shuffle_indices(std::vector<long>& idx, Rng& rng) {
  for (long i = static_cast<long>(idx.size()) - 1; i > 0; --i) {
    long j = static_cast<long>(rng.uniform() * static_cast<double>(i + 1));
    j = std::min(j, i);
    std::swap(idx[i], idx[j]);
  }
}

// Ridge solution for all targets at once: (X'X + lambda I)^-1 X'Y.
Matrix ridge_solve(const Matrix& x, const Matrix& y, double lambda) {
  const long p = x.cols();
  Matrix gram = x.transpose() * x;
  gram.diagonal().array() += lambda;
  return gram.ldlt().solve(x.transpose() * y);
}

}  // namespace

std::string to_string(MetricKind m) {
  switch (m) {
    case MetricKind::sca: return "sca";
    case MetricKind::rsa: return "rsa";
    case MetricKind::cms: return "cms";
    case MetricKind::encoding: return "encoding";
  }
  throw ValueError("unknown metric");
}

MetricKind metric_from_string(const std::string& s) {
  if (s == "sca") return MetricKind::sca;
  if (s == "rsa") return MetricKind::rsa;
  if (s == "cms") return MetricKind::cms;
  if (s == "encoding") return MetricKind::encoding;
  throw ValueError("unknown metric '" + s + "' (expected sca|rsa|cms|encoding)");
}

std::string to_string(RdmMetric m) {
  return m == RdmMetric::correlation ? "correlation" : "euclidean";
}

RdmMetric rdm_metric_from_string(const std::string& s) {
  if (s == "correlation") return RdmMetric::correlation;
  if (s == "euclidean") return RdmMetric::euclidean;
  throw ValueError("unknown rdm metric '" + s + "' (expected correlation|euclidean)");
}

std::string to_string(SimilarityKind s) {
  return s == SimilarityKind::pearson ? "pearson" : "cosine";
}

SimilarityKind similarity_from_string(const std::string& s) {
  if (s == "pearson") return SimilarityKind::pearson;
  if (s == "cosine") return SimilarityKind::cosine;
  throw ValueError("unknown similarity '" + s + "' (expected pearson|cosine)");
}

std::vector<int> component_assignments(const Matrix& responses) {
  std::vector<int> out(responses.rows());
  for (long s = 0; s < responses.rows(); ++s) {
    int arg = 0;
    double best = responses(s, 0);
    for (long c = 1; c < responses.cols(); ++c)
      if (responses(s, c) > best) {  // strict: ties keep the lowest index
        best = responses(s, c);
        arg = static_cast<int>(c);
      }
    out[s] = arg;
  }
  return out;
}

ConnectivityMatrix icm_from_assignments(const std::vector<std::vector<int>>& runs,
                                        std::vector<std::string> stimulus_ids) {
  if (runs.empty()) throw ValueError("need at least one run");
  const std::size_t s_n = stimulus_ids.size();
  for (const auto& r : runs)
    if (r.size() != s_n) throw DimensionError("run assignment length does not match stimuli");

  Matrix icm = Matrix::Zero(s_n, s_n);
  for (const auto& r : runs)
    for (std::size_t i = 0; i < s_n; ++i)
      for (std::size_t j = i + 1; j < s_n; ++j)
        if (r[i] == r[j]) {
          icm(i, j) += 1.0;
          icm(j, i) += 1.0;
        }
  icm /= static_cast<double>(runs.size());
  icm.diagonal().setOnes();
  return ConnectivityMatrix(std::move(icm), ConnectivityKind::icm, std::move(stimulus_ids));
}

ConnectivityMatrix build_icm(const ResponseMatrix& d, int components, int n_runs,
                             const GibbsConfig& cfg, std::uint64_t seed, int jobs) {
  if (n_runs < 1) throw ValueError("n_runs must be >= 1");
  cfg.validate();
  std::vector<std::vector<int>> runs(n_runs);
  parallel_for(n_runs, jobs, [&](long r) {
    const std::uint64_t run_seed = derive_seed(seed, "icm-run", static_cast<std::uint64_t>(r));
    runs[r] = component_assignments(bnmf_decompose(d, components, cfg, run_seed).responses);
  });
  return icm_from_assignments(runs, d.stimulus_ids());
}

AlignmentScore sca_score(const ConnectivityMatrix& a, const ConnectivityMatrix& b) {
  if (a.kind() != ConnectivityKind::icm || b.kind() != ConnectivityKind::icm)
    throw ValueError("sca_score compares ICMs (got " + to_string(a.kind()) + ", " +
                     to_string(b.kind()) + ")");
  check_same_stimuli(a, b);
  AlignmentScore s;
  s.value = pearson(upper_triangle(a.data()), upper_triangle(b.data()));
  s.metric = MetricKind::sca;
  s.n_stimuli = a.n_stimuli();
  return s;
}

ConnectivityMatrix build_rdm(const ResponseMatrix& d, RdmMetric metric) {
  const Matrix& x = d.data();
  const long s_n = x.rows();
  if (s_n < 3) throw ValueError("rdm requires S >= 3 stimuli (got " + std::to_string(s_n) + ")");

  Matrix rdm = Matrix::Zero(s_n, s_n);
  if (metric == RdmMetric::correlation) {
    for (long i = 0; i < s_n; ++i) {
      const double var = (x.row(i).array() - x.row(i).mean()).square().sum();
      if (var <= 0.0)
        throw DegenerateError("stimulus row " + std::to_string(i) +
                              " ('" + d.stimulus_ids()[i] + "') is constant; correlation rdm undefined");
    }
    for (long i = 0; i < s_n; ++i)
      for (long j = i + 1; j < s_n; ++j) {
        const double e = std::max(0.0, 1.0 - pearson(x.row(i).transpose(), x.row(j).transpose()));
        rdm(i, j) = e;
        rdm(j, i) = e;
      }
  } else {
    for (long i = 0; i < s_n; ++i)
      for (long j = i + 1; j < s_n; ++j) {
        const double e = (x.row(i) - x.row(j)).norm();
        rdm(i, j) = e;
        rdm(j, i) = e;
      }
  }
  return ConnectivityMatrix(std::move(rdm), ConnectivityKind::rdm, d.stimulus_ids());
}

AlignmentScore rsa_score(const ConnectivityMatrix& a, const ConnectivityMatrix& b) {
  const auto rdm_like = [](const ConnectivityMatrix& m) {
    return m.kind() == ConnectivityKind::rdm || m.kind() == ConnectivityKind::behavioral;
  };
  if (!rdm_like(a) || !rdm_like(b))
    throw ValueError("rsa_score compares rdm/behavioral matrices (got " + to_string(a.kind()) +
                     ", " + to_string(b.kind()) + ")");
  check_same_stimuli(a, b);
  AlignmentScore s;
  s.value = spearman(upper_triangle(a.data()), upper_triangle(b.data()));
  s.metric = MetricKind::rsa;
  s.n_stimuli = a.n_stimuli();
  return s;
}

std::vector<double> default_ridge_grid() {
  // 7 log-spaced points, 1e-2 .. 1e4
  std::vector<double> grid(7);
  for (int i = 0; i < 7; ++i) grid[i] = std::pow(10.0, -2.0 + i);
  return grid;
}

void EncodingConfig::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ValueError("train_fraction must lie in (0, 1)");
  if (ridge_penalties.empty()) throw ValueError("ridge penalty grid is empty");
  for (double p : ridge_penalties)
    if (!(p > 0.0)) throw ValueError("ridge penalties must be positive");
  if (n_folds_inner < 2) throw ValueError("n_folds_inner must be >= 2");
}

AlignmentScore encoding_score(const ResponseMatrix& features, const ResponseMatrix& targets,
                              const EncodingConfig& cfg) {
  cfg.validate();
  if (features.n_stimuli() != targets.n_stimuli())
    throw DimensionError("features and targets cover different stimulus counts");
  if (features.stimulus_ids() != targets.stimulus_ids())
    throw ValueError("features and targets must share the same stimuli in the same order");

  const long s_n = features.n_stimuli();
  const long n_train = std::llround(cfg.train_fraction * static_cast<double>(s_n));
  const long n_test = s_n - n_train;
  if (n_train < 2 || n_test < 2)
    throw DegenerateError("degenerate split: " + std::to_string(n_train) + " train / " +
                          std::to_string(n_test) + " test stimuli (need >= 2 each)");
  if (cfg.n_folds_inner > n_train)
    throw ValueError("n_folds_inner exceeds the training-set size");

  std::vector<long> perm(s_n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng split_rng(cfg.seed, "split");
  shuffle_indices(perm, split_rng);

  const auto take_rows = [](const Matrix& m, const std::vector<long>& rows, long lo, long hi) {
    Matrix out(hi - lo, m.cols());
    for (long i = lo; i < hi; ++i) out.row(i - lo) = m.row(rows[i]);
    return out;
  };
  Matrix xtr = take_rows(features.data(), perm, 0, n_train);
  Matrix xte = take_rows(features.data(), perm, n_train, s_n);
  Matrix ytr = take_rows(targets.data(), perm, 0, n_train);
  Matrix yte = take_rows(targets.data(), perm, n_train, s_n);

  // z-score with training statistics; constant training columns are centered
  // but not scaled.
  const auto zscore = [n_train](Matrix& tr, Matrix& te) {
    for (long j = 0; j < tr.cols(); ++j) {
      const double mean = tr.col(j).mean();
      double sd = std::sqrt((tr.col(j).array() - mean).square().sum() /
                            static_cast<double>(n_train - 1));
      if (!(sd > 0.0)) sd = 1.0;
      tr.col(j) = (tr.col(j).array() - mean) / sd;
      te.col(j) = (te.col(j).array() - mean) / sd;
    }
  };
  zscore(xtr, xte);
  zscore(ytr, yte);

  // Inner CV: strided folds over a shuffled order of the training rows.
  const int k = cfg.n_folds_inner;
  std::vector<long> order(n_train);
  std::iota(order.begin(), order.end(), 0);
  Rng fold_rng(cfg.seed, "folds");
  shuffle_indices(order, fold_rng);

  const long v_n = ytr.cols();
  const std::size_t n_lambda = cfg.ridge_penalties.size();
  Matrix cv_sse = Matrix::Zero(static_cast<long>(n_lambda), v_n);

  for (int f = 0; f < k; ++f) {
    std::vector<long> hold, keep;
    for (long i = 0; i < n_train; ++i)
      (i % k == f ? hold : keep).push_back(order[i]);
    if (hold.empty()) continue;

    Matrix xa(keep.size(), xtr.cols()), ya(keep.size(), v_n);
    for (std::size_t i = 0; i < keep.size(); ++i) {
      xa.row(i) = xtr.row(keep[i]);
      ya.row(i) = ytr.row(keep[i]);
    }
    Matrix xh(hold.size(), xtr.cols()), yh(hold.size(), v_n);
    for (std::size_t i = 0; i < hold.size(); ++i) {
      xh.row(i) = xtr.row(hold[i]);
      yh.row(i) = ytr.row(hold[i]);
    }

    for (std::size_t li = 0; li < n_lambda; ++li) {
      const Matrix beta = ridge_solve(xa, ya, cfg.ridge_penalties[li]);
      const Matrix resid = xh * beta - yh;
      cv_sse.row(static_cast<long>(li)) += resid.array().square().colwise().sum().matrix();
    }
  }

  std::vector<std::size_t> chosen(v_n, 0);
  for (long u = 0; u < v_n; ++u) {
    long arg = 0;
    cv_sse.col(u).minCoeff(&arg);  // first minimum: ties prefer the smaller penalty
    chosen[u] = static_cast<std::size_t>(arg);
  }

  // One refit per distinct chosen penalty, then per-unit test R^2.
  std::vector<double> r2(v_n, 0.0);
  for (std::size_t li = 0; li < n_lambda; ++li) {
    bool used = false;
    for (long u = 0; u < v_n; ++u)
      if (chosen[u] == li) { used = true; break; }
    if (!used) continue;

    const Matrix beta = ridge_solve(xtr, ytr, cfg.ridge_penalties[li]);
    const Matrix pred = xte * beta;
    for (long u = 0; u < v_n; ++u) {
      if (chosen[u] != li) continue;
      const double mean = yte.col(u).mean();
      const double ss_tot = (yte.col(u).array() - mean).square().sum();
      if (ss_tot <= 0.0)
        throw DegenerateError("test responses constant for unit '" + targets.unit_ids()[u] +
                              "'; R^2 undefined");
      const double ss_res = (pred.col(u) - yte.col(u)).squaredNorm();
      r2[u] = 1.0 - ss_res / ss_tot;
    }
  }

  AlignmentScore s;
  s.value = std::accumulate(r2.begin(), r2.end(), 0.0) / static_cast<double>(v_n);
  s.metric = MetricKind::encoding;
  s.n_stimuli = s_n;
  s.params["train_fraction"] = cfg.train_fraction;
  s.params["n_folds_inner"] = cfg.n_folds_inner;
  s.params["seed"] = cfg.seed;
  s.params["n_train"] = n_train;
  s.params["n_test"] = n_test;
  s.params["ridge_penalties"] = cfg.ridge_penalties;
  s.params["per_unit_r2"] = r2;
  {
    std::vector<double> pen(v_n);
    for (long u = 0; u < v_n; ++u) pen[u] = cfg.ridge_penalties[chosen[u]];
    s.params["chosen_penalties"] = pen;
  }
  return s;
}

CmsResult cms(const Matrix& x, const Matrix& y, bool absolute, SimilarityKind similarity) {
  if (x.rows() != y.rows())
    throw DimensionError("cms: row counts differ (" + std::to_string(x.rows()) + " vs " +
                         std::to_string(y.rows()) + ")");
  if (x.cols() != y.cols())
    throw DimensionError("cms: component counts differ (" + std::to_string(x.cols()) + " vs " +
                         std::to_string(y.cols()) + ")");
  const long c = x.cols();
  if (c < 1) throw ValueError("cms needs at least one component");

  const auto check_cols = [&](const Matrix& m, const char* name) {
    for (long j = 0; j < c; ++j) {
      if (similarity == SimilarityKind::pearson) {
        const double var = (m.col(j).array() - m.col(j).mean()).square().sum();
        if (var <= 0.0)
          throw DegenerateError(std::string("cms: ") + name + " column " + std::to_string(j) +
                                " is constant; correlation undefined");
      } else if (!(m.col(j).norm() > 0.0)) {
        throw DegenerateError(std::string("cms: ") + name + " column " + std::to_string(j) +
                              " is all zeros; cosine undefined");
      }
    }
  };
  check_cols(x, "x");
  check_cols(y, "y");

  Matrix score(c, c);
  for (long i = 0; i < c; ++i)
    for (long j = 0; j < c; ++j) {
      double v = similarity == SimilarityKind::pearson
                     ? pearson(x.col(i), y.col(j))
                     : cosine_similarity(x.col(i), y.col(j));
      score(i, j) = absolute ? std::abs(v) : v;
    }

  CmsResult res;
  res.permutation = max_assignment(score);
  double total = 0.0;
  for (long i = 0; i < c; ++i) total += score(i, res.permutation[i]);
  res.score.value = total / static_cast<double>(c);
  res.score.metric = MetricKind::cms;
  res.score.n_stimuli = x.rows();
  res.score.params["absolute"] = absolute;
  res.score.params["similarity"] = to_string(similarity);
  res.score.params["components"] = c;
  return res;
}

AlignmentScore recovery_score(const Matrix& l_true, const Matrix& l_inferred, bool absolute,
                              SimilarityKind similarity) {
  return cms(l_true, l_inferred, absolute, similarity).score;
}

}  // namespace scakit
