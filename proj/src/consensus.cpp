#include "scakit/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "scakit/assignment.hpp"
#include "scakit/errors.hpp"
#include "scakit/io.hpp"
#include "scakit/parallel.hpp"
#include "scakit/rng.hpp"
#include "scakit/stats.hpp"

namespace scakit {

namespace {

// Pearson r that never throws: degenerate pairs score below any real r, so
// they lose every argmax unless nothing else is available.
double safe_corr(const Vector& a, const Vector& b) {
  try {
    return pearson(a, b);
  } catch (const DegenerateError&) {
    return -2.0;
  }
}

struct KmeansResult {
  std::vector<int> assignment;
  double inertia = std::numeric_limits<double>::infinity();
};

// Points are columns of `pts` (dim x n). Plain Lloyd with k-means++ seeding;
// an emptied cluster grabs the point farthest from its center.
KmeansResult kmeans_once(const Matrix& pts, int k, Rng& rng) {
  const long n = pts.cols();
  Matrix centers(pts.rows(), k);

  {
    // k-means++ seeding
    const long first = static_cast<long>(rng.uniform() * static_cast<double>(n));
    centers.col(0) = pts.col(std::min(first, n - 1));
    Vector d2 = (pts.colwise() - centers.col(0)).colwise().squaredNorm().transpose();
    for (int c = 1; c < k; ++c) {
      const double total = d2.sum();
      long pick = 0;
      if (total > 0.0) {
        double target = rng.uniform() * total, run = 0.0;
        for (long i = 0; i < n; ++i) {
          run += d2(i);
          if (run >= target) { pick = i; break; }
        }
      } else {
        pick = static_cast<long>(rng.uniform() * static_cast<double>(n));
        pick = std::min(pick, n - 1);
      }
      centers.col(c) = pts.col(pick);
      d2 = d2.cwiseMin((pts.colwise() - centers.col(c)).colwise().squaredNorm().transpose());
    }
  }

  std::vector<int> assign(n, -1);
  Vector best_d2(n);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (long i = 0; i < n; ++i) {
      int arg = 0;
      double best = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (pts.col(i) - centers.col(c)).squaredNorm();
        if (d < best) { best = d; arg = c; }
      }
      if (arg != assign[i]) { assign[i] = arg; changed = true; }
      best_d2(i) = best;
    }

    std::vector<long> counts(k, 0);
    for (long i = 0; i < n; ++i) ++counts[assign[i]];
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      long far = 0;
      best_d2.maxCoeff(&far);
      --counts[assign[far]];
      assign[far] = c;
      counts[c] = 1;
      best_d2(far) = 0.0;
      changed = true;
    }

    if (!changed && iter > 0) break;
    centers.setZero();
    for (long i = 0; i < n; ++i) centers.col(assign[i]) += pts.col(i);
    for (int c = 0; c < k; ++c) centers.col(c) /= static_cast<double>(counts[c]);
  }

  KmeansResult res;
  res.assignment = std::move(assign);
  res.inertia = 0.0;
  for (long i = 0; i < n; ++i)
    res.inertia += (pts.col(i) - centers.col(res.assignment[i])).squaredNorm();
  return res;
}

KmeansResult kmeans(const Matrix& pts, int k, std::uint64_t seed, int restarts) {
  Rng rng(seed, "kmeans");
  KmeansResult best;
  for (int r = 0; r < restarts; ++r) {
    KmeansResult cur = kmeans_once(pts, k, rng);
    if (cur.inertia < best.inertia) best = std::move(cur);
  }
  return best;
}

double median_of(std::vector<double>& v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  if (n % 2 == 1) return v[mid];
  const double hi = v[mid];
  const double lo = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lo + hi);
}

}  // namespace

ConsensusResult consensus_aggregate(const std::vector<Matrix>& responses,
                                    const std::vector<Matrix>& weights, int components,
                                    double outlier_threshold, std::uint64_t seed) {
  const int n_runs = static_cast<int>(responses.size());
  if (n_runs < 2) throw ValueError("n_runs must be >= 2 (got " + std::to_string(n_runs) + ")");
  if (weights.size() != responses.size())
    throw DimensionError("responses/weights run counts differ");
  if (outlier_threshold < 0.0) throw ValueError("outlier_threshold must be >= 0");
  if (components < 1) throw ValueError("components must be >= 1");

  const long s_n = responses[0].rows();
  const long c_run = responses[0].cols();
  const long v_n = weights[0].cols();
  for (int r = 0; r < n_runs; ++r) {
    if (responses[r].rows() != s_n || responses[r].cols() != c_run)
      throw DimensionError("run " + std::to_string(r) + ": responses shape mismatch");
    if (weights[r].rows() != c_run || weights[r].cols() != v_n)
      throw DimensionError("run " + std::to_string(r) + ": weights shape mismatch");
  }

  // Stack all run components as L2-normalized columns.
  const long total = static_cast<long>(n_runs) * c_run;
  Matrix stacked(s_n, total);
  for (int r = 0; r < n_runs; ++r)
    for (long c = 0; c < c_run; ++c) {
      Vector col = responses[r].col(c);
      const double norm = col.norm();
      stacked.col(static_cast<long>(r) * c_run + c) = norm > 0.0 ? (col / norm).eval() : col;
    }

  // Outlier filter: mean distance to the n_runs nearest other columns.
  std::vector<long> kept;
  kept.reserve(total);
  {
    std::vector<double> dists(total - 1);
    for (long i = 0; i < total; ++i) {
      long m = 0;
      for (long j = 0; j < total; ++j)
        if (j != i) dists[m++] = (stacked.col(i) - stacked.col(j)).norm();
      const long k = std::min<long>(n_runs, total - 1);
      std::nth_element(dists.begin(), dists.begin() + (k - 1), dists.end());
      const double mean_d =
          std::accumulate(dists.begin(), dists.begin() + k, 0.0) / static_cast<double>(k);
      if (!(mean_d > outlier_threshold)) kept.push_back(i);
    }
  }

  const double kept_fraction = static_cast<double>(kept.size()) / static_cast<double>(total);
  if (static_cast<long>(kept.size()) < components)
    throw InsufficientComponentsError(
        "only " + std::to_string(kept.size()) + " of " + std::to_string(total) +
            " components survived outlier filtering (need >= " + std::to_string(components) + ")",
        kept_fraction);

  Matrix survivors(s_n, kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) survivors.col(i) = stacked.col(kept[i]);

  const KmeansResult km = kmeans(survivors, components, seed, 10);

  ConsensusResult res;
  res.kept_fraction = kept_fraction;
  res.cluster_sizes.assign(components, 0);
  for (int a : km.assignment) ++res.cluster_sizes[a];

  res.profiles.resize(s_n, components);
  std::vector<double> scratch;
  for (int c = 0; c < components; ++c) {
    for (long s = 0; s < s_n; ++s) {
      scratch.clear();
      for (long i = 0; i < survivors.cols(); ++i)
        if (km.assignment[i] == c) scratch.push_back(survivors(s, i));
      res.profiles(s, c) = median_of(scratch);
    }
  }

  // Weights: in every run, match each consensus profile to the run component
  // with the highest correlation (with replacement), take that component's
  // weight row normalized to sum 1, and average across runs.
  res.weights = Matrix::Zero(components, v_n);
  for (int r = 0; r < n_runs; ++r) {
    for (int c = 0; c < components; ++c) {
      long arg = 0;
      double best = -std::numeric_limits<double>::infinity();
      for (long j = 0; j < c_run; ++j) {
        const double corr = safe_corr(res.profiles.col(c), responses[r].col(j));
        if (corr > best) { best = corr; arg = j; }
      }
      Vector row = weights[r].row(arg).transpose();
      const double sum = row.sum();
      if (sum > 0.0)
        row /= sum;
      else
        row.setConstant(1.0 / static_cast<double>(v_n));
      res.weights.row(c) += row.transpose();
    }
  }
  res.weights /= static_cast<double>(n_runs);
  return res;
}

ConsensusResult run_consensus(const ResponseMatrix& d, int components, int n_runs,
                              const GibbsConfig& cfg, double outlier_threshold,
                              std::uint64_t seed, int jobs) {
  if (n_runs < 2) throw ValueError("n_runs must be >= 2 (got " + std::to_string(n_runs) + ")");
  cfg.validate();

  std::vector<Matrix> responses(n_runs), weights(n_runs);
  parallel_for(n_runs, jobs, [&](long r) {
    const std::uint64_t run_seed = derive_seed(seed, "consensus-run", static_cast<std::uint64_t>(r));
    Factorization f = bnmf_decompose(d, components, cfg, run_seed);
    responses[r] = std::move(f.responses);
    weights[r] = std::move(f.weights);
  });

  return consensus_aggregate(responses, weights, components, outlier_threshold, seed);
}

std::vector<double> component_consistency(const ConsensusResult& a, const ConsensusResult& b) {
  if (a.profiles.rows() != b.profiles.rows())
    throw DimensionError("consensus results cover different stimulus sets (" +
                         std::to_string(a.profiles.rows()) + " vs " +
                         std::to_string(b.profiles.rows()) + " stimuli)");
  if (a.profiles.cols() != b.profiles.cols())
    throw DimensionError("consensus results have different component counts");

  const long c = a.profiles.cols();
  Matrix score(c, c);
  for (long i = 0; i < c; ++i)
    for (long j = 0; j < c; ++j)
      score(i, j) = safe_corr(a.profiles.col(i), b.profiles.col(j));

  const std::vector<int> match = max_assignment(score);
  std::vector<double> out(c);
  for (long i = 0; i < c; ++i) out[i] = score(i, match[i]);
  return out;
}

void save_consensus(const ConsensusResult& res, const std::vector<std::string>& stimulus_ids,
                    const std::vector<std::string>& unit_ids, const std::filesystem::path& dir,
                    const nlohmann::json& extra_meta) {
  if (res.profiles.rows() != static_cast<long>(stimulus_ids.size()))
    throw DimensionError("stimulus_ids length does not match profiles");
  if (res.weights.cols() != static_cast<long>(unit_ids.size()))
    throw DimensionError("unit_ids length does not match weights");

  std::filesystem::create_directories(dir);
  const auto comp_ids = make_default_ids("c", res.profiles.cols());
  detail::write_labeled({res.profiles, stimulus_ids, comp_ids}, dir / "profiles.bin",
                        FileFormat::binary);
  detail::write_labeled({res.weights, comp_ids, unit_ids}, dir / "weights.bin",
                        FileFormat::binary);

  nlohmann::json meta;
  meta["kept_fraction"] = res.kept_fraction;
  meta["cluster_sizes"] = res.cluster_sizes;
  meta["components"] = res.profiles.cols();
  for (auto it = extra_meta.begin(); it != extra_meta.end(); ++it) meta[it.key()] = it.value();

  std::ofstream out(dir / "meta.json");
  if (!out) throw IoError("cannot write " + (dir / "meta.json").string());
  out << meta.dump(2) << "\n";
}

ConsensusResult load_consensus(const std::filesystem::path& dir) {
  auto prof = detail::read_labeled(dir / "profiles.bin", FileFormat::binary);
  auto wts = detail::read_labeled(dir / "weights.bin", FileFormat::binary);
  if (prof.col_ids != wts.row_ids)
    throw ParseError("component labels disagree between profiles.bin and weights.bin");

  std::ifstream in(dir / "meta.json");
  if (!in) throw IoError("cannot read " + (dir / "meta.json").string());
  nlohmann::json meta;
  try {
    in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid meta.json: ") + e.what());
  }

  ConsensusResult res;
  res.profiles = std::move(prof.data);
  res.weights = std::move(wts.data);
  res.kept_fraction = meta.at("kept_fraction").get<double>();
  res.cluster_sizes = meta.at("cluster_sizes").get<std::vector<long>>();
  return res;
}

}  // namespace scakit
