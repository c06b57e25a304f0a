#include "scakit/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include "scakit/errors.hpp"
#include "scakit/io.hpp"
#include "scakit/parallel.hpp"
#include "scakit/rng.hpp"

namespace scakit {

namespace {

Matrix uniform_masked(long rows, long cols, double sparsity, Rng& value_rng, Rng& mask_rng) {
  Matrix m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j)
      m(i, j) = value_rng.uniform();
  if (sparsity > 0.0)
    for (long i = 0; i < rows; ++i)
      for (long j = 0; j < cols; ++j)
        if (mask_rng.uniform() < sparsity) m(i, j) = 0.0;
  return m;
}

long max_planes(long n_dims) { return n_dims * (n_dims - 1) / 2; }

}  // namespace

void LatentSpec::validate() const {
  if (m < 2) throw ValueError("latent spec: m >= 2 required");
  if (n < 1) throw ValueError("latent spec: n >= 1 required");
  if (k < 1 || k > std::min(m, n))
    throw ValueError("latent spec: k must lie in [1, min(m, n)] (got k=" + std::to_string(k) + ")");
  if (!(sparsity >= 0.0 && sparsity < 1.0))
    throw ValueError("latent spec: sparsity must lie in [0, 1)");
  if (!(noise_sigma >= 0.0)) throw ValueError("latent spec: noise_sigma must be >= 0");
}

LatentData gen_latent_data(const LatentSpec& spec) {
  spec.validate();
  Rng l_rng(spec.seed, "latent-L"), a_rng(spec.seed, "latent-A");
  Rng lm_rng(spec.seed, "mask-L"), am_rng(spec.seed, "mask-A");

  Matrix l = uniform_masked(spec.m, spec.k, spec.sparsity, l_rng, lm_rng);
  Matrix a = uniform_masked(spec.k, spec.n, spec.sparsity, a_rng, am_rng);

  Matrix x = l * a;
  if (spec.noise_sigma > 0.0) {
    Rng noise(spec.seed, "noise");
    for (long i = 0; i < x.rows(); ++i)
      for (long j = 0; j < x.cols(); ++j)
        x(i, j) += noise.normal(0.0, spec.noise_sigma);
  }

  return LatentData{ResponseMatrix::with_default_ids(std::move(x)), std::move(l), std::move(a)};
}

void RotationSpec::validate() const {
  if (n_dims < 2) throw ValueError("rotation spec: n_dims >= 2 required");
  if (n_planes < 0 || n_planes > max_planes(n_dims))
    throw ValueError("rotation spec: n_planes must lie in [0, " +
                     std::to_string(max_planes(n_dims)) + "] (got " +
                     std::to_string(n_planes) + ")");
}

Matrix plane_rotation(long n_dims, long i, long j, double theta) {
  if (i < 1 || j <= i || j > n_dims) throw ValueError("plane indices need 1 <= i < j <= n");
  Matrix r = Matrix::Identity(n_dims, n_dims);
  const double c = std::cos(theta), s = std::sin(theta);
  r(i - 1, i - 1) = c;
  r(i - 1, j - 1) = s;
  r(j - 1, i - 1) = -s;
  r(j - 1, j - 1) = c;
  return r;
}

Matrix make_rotation(const RotationSpec& spec) {
  spec.validate();
  const long total = max_planes(spec.n_dims);

  // Choose n_planes distinct plane indices by partial Fisher-Yates, then
  // sort so the product order is lexicographic regardless of draw order.
  std::vector<long> idx(total);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(spec.seed, "planes");
  for (long t = 0; t < spec.n_planes; ++t) {
    long pick = t + static_cast<long>(rng.uniform() * static_cast<double>(total - t));
    pick = std::min(pick, total - 1);
    std::swap(idx[t], idx[pick]);
  }
  idx.resize(spec.n_planes);
  std::sort(idx.begin(), idx.end());

  // Plane p in lexicographic order maps to 0-based (i, j), i < j.
  const auto plane_of = [&](long p) {
    long i = 0, block = spec.n_dims - 1;
    while (p >= block) {
      p -= block;
      --block;
      ++i;
    }
    return std::pair<long, long>(i, i + 1 + p);
  };

  Matrix r = Matrix::Identity(spec.n_dims, spec.n_dims);
  const double c = std::cos(spec.theta), s = std::sin(spec.theta);
  for (long p : idx) {
    const auto [i, j] = plane_of(p);
    // Right-multiply by the plane rotation: only columns i and j change.
    const Vector ci = r.col(i), cj = r.col(j);
    r.col(i) = c * ci - s * cj;
    r.col(j) = s * ci + c * cj;
  }
  return r;
}

ResponseMatrix apply_rotation(const ResponseMatrix& x, const Matrix& r) {
  if (r.rows() != r.cols() || r.rows() != x.n_units())
    throw DimensionError("rotation must be V x V for V = " + std::to_string(x.n_units()) +
                         " units (got " + std::to_string(r.rows()) + " x " +
                         std::to_string(r.cols()) + ")");
  return ResponseMatrix(x.data() * r, x.stimulus_ids(), x.unit_ids());
}

AlignmentScore rotated_component_similarity(const ResponseMatrix& x, const RotationSpec& spec,
                                            Method method, int components, std::uint64_t seed,
                                            const GibbsConfig& cfg, SimilarityKind similarity) {
  if (method != Method::pca && method != Method::bnmf)
    throw ValueError("rotated_component_similarity supports pca and bnmf (got " +
                     to_string(method) + ")");
  if (spec.n_dims != x.n_units())
    throw DimensionError("rotation spec n_dims does not match the unit count");

  const Matrix r = make_rotation(spec);
  const ResponseMatrix xr = apply_rotation(x, r);

  Factorization orig, rot;
  if (method == Method::pca) {
    orig = pca_decompose(x, components);
    rot = pca_decompose(xr, components);
  } else {
    orig = bnmf_decompose(x, components, cfg, seed);
    rot = bnmf_decompose(xr, components, cfg, seed);
  }

  const Matrix corrected = rot.weights * r.transpose();
  AlignmentScore score = cms(orig.weights.transpose(), corrected.transpose(),
                             /*absolute=*/method == Method::pca, similarity)
                             .score;
  score.params["theta"] = spec.theta;
  score.params["n_planes"] = spec.n_planes;
  score.params["method"] = to_string(method);
  return score;
}

std::vector<double> default_sweep_thetas() {
  const double pi = std::numbers::pi;
  return {pi / 20.0, pi / 40.0, pi / 60.0, pi / 80.0};
}

std::vector<long> default_plane_counts(long n_dims) {
  const long total = max_planes(n_dims);
  std::vector<long> counts;
  for (int i = 0; i < 10; ++i)
    counts.push_back(std::llround(static_cast<double>(total) * static_cast<double>(i) / 9.0));
  counts.erase(std::unique(counts.begin(), counts.end()), counts.end());
  return counts;
}

std::vector<std::string> default_sweep_metrics() {
  return {"sca", "rsa_euclidean", "rsa_correlation"};
}

std::vector<SweepRecord> sensitivity_sweep(const LatentSpec& spec,
                                           const std::vector<double>& thetas,
                                           const std::vector<long>& plane_counts,
                                           const std::vector<std::string>& metrics,
                                           int n_runs_icm, const GibbsConfig& cfg,
                                           std::uint64_t seed, int jobs) {
  if (thetas.empty() || plane_counts.empty()) throw ValueError("sweep grid is empty");
  if (metrics.empty()) throw ValueError("no sweep metrics requested");
  bool want_sca = false, want_rsa_e = false, want_rsa_c = false;
  for (const auto& m : metrics) {
    if (m == "sca") want_sca = true;
    else if (m == "rsa_euclidean") want_rsa_e = true;
    else if (m == "rsa_correlation") want_rsa_c = true;
    else throw ValueError("unknown sweep metric '" + m +
                          "' (expected sca|rsa_euclidean|rsa_correlation)");
  }
  if (n_runs_icm < 1) throw ValueError("n_runs_icm must be >= 1");

  LatentSpec gen = spec;
  gen.seed = derive_seed(seed, "latent", 0);
  const LatentData data = gen_latent_data(gen);
  const ResponseMatrix& x = data.x;
  const int k = static_cast<int>(spec.k);

  const auto icm_stub = [] {
    return ConnectivityMatrix(Matrix::Identity(2, 2), ConnectivityKind::icm, {"s0", "s1"});
  };
  const auto rdm_stub = [] {
    return ConnectivityMatrix(Matrix::Zero(2, 2), ConnectivityKind::rdm, {"s0", "s1"});
  };
  ConnectivityMatrix base_icm =
      want_sca ? build_icm(x, k, n_runs_icm, cfg, derive_seed(seed, "icm-base", 0), jobs)
               : icm_stub();
  ConnectivityMatrix base_rdm_e =
      want_rsa_e ? build_rdm(x, RdmMetric::euclidean) : rdm_stub();
  ConnectivityMatrix base_rdm_c =
      want_rsa_c ? build_rdm(x, RdmMetric::correlation) : rdm_stub();

  const long n_cells = static_cast<long>(thetas.size()) * static_cast<long>(plane_counts.size());
  std::vector<std::vector<SweepRecord>> cells(n_cells);

  parallel_for(n_cells, jobs, [&](long cell) {
    const std::size_t ti = static_cast<std::size_t>(cell) / plane_counts.size();
    const std::size_t pi = static_cast<std::size_t>(cell) % plane_counts.size();

    RotationSpec rspec;
    rspec.n_dims = spec.n;
    rspec.theta = thetas[ti];
    rspec.n_planes = plane_counts[pi];
    rspec.seed = derive_seed(seed, "planes", static_cast<std::uint64_t>(cell));
    const ResponseMatrix xr = apply_rotation(x, make_rotation(rspec));

    auto& out = cells[cell];
    for (const auto& m : metrics) {
      SweepRecord rec;
      rec.theta = thetas[ti];
      rec.n_planes = plane_counts[pi];
      rec.metric = m;
      rec.seed = seed;
      if (m == "sca") {
        const ConnectivityMatrix icm_r = build_icm(
            xr, k, n_runs_icm, cfg, derive_seed(seed, "icm-rot", static_cast<std::uint64_t>(cell)),
            1);
        rec.score = sca_score(base_icm, icm_r).value;
      } else if (m == "rsa_euclidean") {
        rec.score = rsa_score(base_rdm_e, build_rdm(xr, RdmMetric::euclidean)).value;
      } else {
        rec.score = rsa_score(base_rdm_c, build_rdm(xr, RdmMetric::correlation)).value;
      }
      out.push_back(std::move(rec));
    }
  });

  std::vector<SweepRecord> records;
  records.reserve(n_cells * static_cast<long>(metrics.size()));
  for (auto& cell : cells)
    for (auto& rec : cell) records.push_back(std::move(rec));
  return records;
}

void save_sweep_csv(const std::vector<SweepRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "theta,n_planes,metric,score,seed\n";
  for (const auto& r : records)
    out << format_double(r.theta) << ',' << r.n_planes << ',' << r.metric << ','
        << format_double(r.score) << ',' << r.seed << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace scakit
