#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "scakit/decompose.hpp"
#include "scakit/types.hpp"

namespace scakit {

enum class MetricKind { sca, rsa, cms, encoding };

std::string to_string(MetricKind m);
MetricKind metric_from_string(const std::string& s);

struct AlignmentScore {
    double value = 0.0;
    MetricKind metric = MetricKind::sca;
    long n_stimuli = 0;
    nlohmann::json params = nlohmann::json::object();
};

// Per-stimulus argmax component of each row of `responses`; ties broken by
// the lowest component index.
std::vector<int> component_assignments(const Matrix& responses);

// Mean over runs of the binary co-assignment matrices; diagonal forced to 1.
ConnectivityMatrix icm_from_assignments(const std::vector<std::vector<int>>& runs,
                                        std::vector<std::string> stimulus_ids);

// n_runs independent bnmf decompositions (derived per-run seeds), each
// reduced to its argmax assignment, averaged into an ICM.
ConnectivityMatrix build_icm(const ResponseMatrix& d, int components, int n_runs,
                             const GibbsConfig& cfg, std::uint64_t seed, int jobs = 1);

// Pearson r over the strict upper triangles of two ICMs on the same stimuli.
AlignmentScore sca_score(const ConnectivityMatrix& a, const ConnectivityMatrix& b);

enum class RdmMetric { correlation, euclidean };

std::string to_string(RdmMetric m);
RdmMetric rdm_metric_from_string(const std::string& s);

// Pairwise stimulus dissimilarity: 1 - Pearson(row_i, row_j) or the L2
// distance between rows.
ConnectivityMatrix build_rdm(const ResponseMatrix& d, RdmMetric metric);

// Spearman rho over strict upper triangles; both arguments must be RDMs
// (computed or behavioral).
AlignmentScore rsa_score(const ConnectivityMatrix& a, const ConnectivityMatrix& b);

std::vector<double> default_ridge_grid();

struct EncodingConfig {
    double train_fraction = 0.8;
    std::vector<double> ridge_penalties = default_ridge_grid();
    int n_folds_inner = 5;
    std::uint64_t seed = 0;

    void validate() const;
};

// Ridge regression features -> targets with a seeded train/test stimulus
// split; per-target-unit penalty chosen by inner k-fold CV; value = mean
// test R^2 across units. params carries the per-unit R^2 and chosen
// penalties.
AlignmentScore encoding_score(const ResponseMatrix& features, const ResponseMatrix& targets,
                              const EncodingConfig& cfg);

enum class SimilarityKind { pearson, cosine };

std::string to_string(SimilarityKind s);
SimilarityKind similarity_from_string(const std::string& s);

struct CmsResult {
    AlignmentScore score;
    std::vector<int> permutation;  // permutation[i] = column of y matched to column i of x
};

// Component Matching Score: max over permutations of the mean per-column
// similarity, solved exactly as a linear assignment. absolute=true matches
// on |similarity| (sign-indeterminate factors such as PCA loadings).
CmsResult cms(const Matrix& x, const Matrix& y, bool absolute = false,
              SimilarityKind similarity = SimilarityKind::pearson);

// cms applied to true vs. inferred latent factor matrices.
AlignmentScore recovery_score(const Matrix& l_true, const Matrix& l_inferred,
                              bool absolute = false,
                              SimilarityKind similarity = SimilarityKind::pearson);

}  // namespace scakit
