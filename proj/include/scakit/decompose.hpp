#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>

#include <json.hpp>

#include "scakit/types.hpp"

namespace scakit {

enum class Method { pca, nmf, snmf, bnmf };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

// Output of any decomposition engine: D =~ responses * weights. Factors are
// non-negative except for pca. noise_variance is the sigma^2 point estimate
// for bnmf and NaN otherwise.
struct Factorization {
    Matrix responses;  // S x C
    Matrix weights;    // C x V
    double noise_variance = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t seed = 0;
    Method method = Method::bnmf;
};

enum class PointEstimate { posterior_mean, last_sample };

std::string to_string(PointEstimate p);
PointEstimate point_estimate_from_string(const std::string& s);

struct GibbsConfig {
    int n_sweeps = 400;
    int burn_in = 200;
    PriorSpec priors;
    PointEstimate point_estimate = PointEstimate::posterior_mean;

    void validate() const;
};

// Gibbs sampler for the exponential-prior non-negative factorization with
// Gaussian noise. Accepts real-valued (possibly negative) input; the model
// places the noise around the non-negative product. Sweep order: every entry
// of R, then every entry of W (rectified-Gaussian full conditionals), then
// sigma^2 (inverse-gamma). Bit-reproducible given (input, cfg, seed).
Factorization bnmf_decompose(const ResponseMatrix& d, int components,
                             const GibbsConfig& cfg, std::uint64_t seed);

// Multiplicative-update NMF minimizing Frobenius error (Lee-Seung). Input
// must be elementwise non-negative.
Factorization nmf_decompose(const ResponseMatrix& d, int components,
                            int n_iter, std::uint64_t seed);

// As nmf_decompose with an L1 penalty on the weight matrix only.
// l1_penalty = 0 reduces exactly to nmf_decompose.
Factorization snmf_decompose(const ResponseMatrix& d, int components,
                             double l1_penalty, int n_iter, std::uint64_t seed);

// Column-centered SVD. responses = scores, weights = loadings with
// orthonormal rows; sign fixed so the largest-magnitude element of each
// loading row is positive.
Factorization pca_decompose(const ResponseMatrix& d, int components);

// 1 - |D - reconstruction|_F^2 / |D - colmean(D)|_F^2. The pca
// reconstruction adds back the column means.
double explained_variance(const ResponseMatrix& d, const Factorization& f);

// Optional preprocessing: divide each unit column by its max |entry|
// (zero columns left untouched).
ResponseMatrix scale_unit_max(const ResponseMatrix& d);

// Directory layout: responses.bin, weights.bin, meta.json.
void save_factorization(const Factorization& f,
                        const std::vector<std::string>& stimulus_ids,
                        const std::vector<std::string>& unit_ids,
                        const std::filesystem::path& dir,
                        const nlohmann::json& extra_meta);
void save_factorization(const Factorization& f,
                        const std::vector<std::string>& stimulus_ids,
                        const std::vector<std::string>& unit_ids,
                        const std::filesystem::path& dir);

struct LoadedFactorization {
    Factorization factorization;
    std::vector<std::string> stimulus_ids;
    std::vector<std::string> unit_ids;
};

LoadedFactorization load_factorization(const std::filesystem::path& dir);

nlohmann::json gibbs_config_to_json(const GibbsConfig& cfg);
GibbsConfig gibbs_config_from_json(const nlohmann::json& j);

}  // namespace scakit
