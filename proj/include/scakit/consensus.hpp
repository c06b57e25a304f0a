#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "scakit/decompose.hpp"
#include "scakit/types.hpp"

namespace scakit {

// Aggregate of n_runs stochastic decompositions: consensus response profiles
// (cluster medians of L2-normalized run components) and matched-and-averaged
// unit weights, rows summing to 1.
struct ConsensusResult {
    Matrix profiles;  // S x C, >= 0
    Matrix weights;   // C x V, rows sum to 1
    double kept_fraction = 1.0;
    std::vector<long> cluster_sizes;
};

// Aggregation core, separated from the sampling loop so converged or
// synthetic run outputs can be fed in directly. responses[r] is S x c,
// weights[r] is c x V. Filters outlier components (mean distance to the
// n_runs nearest neighbours > outlier_threshold, on normalized columns),
// k-means clusters the survivors into c clusters and reduces each cluster
// to its elementwise median.
ConsensusResult consensus_aggregate(const std::vector<Matrix>& responses,
                                    const std::vector<Matrix>& weights, int components,
                                    double outlier_threshold, std::uint64_t seed);

// n_runs bnmf runs with per-run derived seeds, then consensus_aggregate.
// Runs execute concurrently under `jobs` threads; the result does not depend
// on the schedule.
ConsensusResult run_consensus(const ResponseMatrix& d, int components, int n_runs,
                              const GibbsConfig& cfg, double outlier_threshold,
                              std::uint64_t seed, int jobs = 1);

// Optimal 1-1 matching of profile columns (max mean Pearson r); returns the
// matched per-component correlations, in a's column order.
std::vector<double> component_consistency(const ConsensusResult& a, const ConsensusResult& b);

void save_consensus(const ConsensusResult& res, const std::vector<std::string>& stimulus_ids,
                    const std::vector<std::string>& unit_ids, const std::filesystem::path& dir,
                    const nlohmann::json& extra_meta);
ConsensusResult load_consensus(const std::filesystem::path& dir);

}  // namespace scakit
