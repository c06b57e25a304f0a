#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "scakit/alignment.hpp"
#include "scakit/decompose.hpp"
#include "scakit/types.hpp"

namespace scakit {

// Sparse latent mixture: L (m x k) and A (k x n) uniform on (0,1) with
// entries independently zeroed at rate `sparsity`; X = L*A + N(0, sigma^2).
struct LatentSpec {
    long m = 200;
    long n = 30;
    long k = 5;
    double sparsity = 0.3;
    double noise_sigma = 0.01;
    std::uint64_t seed = 0;

    void validate() const;
};

struct LatentData {
    ResponseMatrix x;
    Matrix l;  // m x k
    Matrix a;  // k x n
};

LatentData gen_latent_data(const LatentSpec& spec);

// theta applied to n_planes distinct coordinate planes chosen by seed.
struct RotationSpec {
    long n_dims = 30;
    double theta = 0.0;
    long n_planes = 0;
    std::uint64_t seed = 0;

    void validate() const;
};

// Single plane rotation (1-based plane indices i < j): entries
// (i,i)=cos, (i,j)=sin, (j,i)=-sin, (j,j)=cos, identity elsewhere.
Matrix plane_rotation(long n_dims, long i, long j, double theta);

// Ordered product (ascending (i,j)) of the selected plane rotations.
// Orthonormal with determinant +1; n_planes = 0 gives the exact identity.
Matrix make_rotation(const RotationSpec& spec);

// X_r = X * R. Unit ids are kept: rotated axes live in the same labelled
// space for downstream comparisons.
ResponseMatrix apply_rotation(const ResponseMatrix& x, const Matrix& r);

// Factor X and X_r = X*R with the same settings (and, for bnmf, the same
// seed), map the rotated loadings back through R^T and score the optimal
// component matching. pca uses |r| matching (sign-indeterminate loadings).
AlignmentScore rotated_component_similarity(const ResponseMatrix& x, const RotationSpec& spec,
                                            Method method, int components, std::uint64_t seed,
                                            const GibbsConfig& cfg = GibbsConfig(),
                                            SimilarityKind similarity = SimilarityKind::pearson);

struct SweepRecord {
    double theta = 0.0;
    long n_planes = 0;
    std::string metric;
    double score = 0.0;
    std::uint64_t seed = 0;
};

std::vector<double> default_sweep_thetas();             // {pi/20, pi/40, pi/60, pi/80}
std::vector<long> default_plane_counts(long n_dims);    // 10 linspace 0 .. n(n-1)/2
std::vector<std::string> default_sweep_metrics();       // sca, rsa_euclidean, rsa_correlation

// One latent dataset (spec.seed is overridden by a stream derived from
// `seed`), one base ICM, then per (theta, n_planes) cell: rotate, rebuild
// the ICM/RDMs with per-cell derived seeds, score each requested metric.
// Records are ordered (theta, n_planes, metric); cells run under `jobs`
// threads without affecting the result.
std::vector<SweepRecord> sensitivity_sweep(const LatentSpec& spec,
                                           const std::vector<double>& thetas,
                                           const std::vector<long>& plane_counts,
                                           const std::vector<std::string>& metrics,
                                           int n_runs_icm, const GibbsConfig& cfg,
                                           std::uint64_t seed, int jobs = 1);

void save_sweep_csv(const std::vector<SweepRecord>& records, const std::filesystem::path& path);

}  // namespace scakit
