#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scakit/errors.hpp"

namespace scakit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// "s000".."s199" style labels, zero-padded to a common width.
std::vector<std::string> make_default_ids(const std::string& prefix, long n);

// Stimuli x units response matrix with named axes. Immutable after
// construction; construction validates S >= 2, V >= 1, finite entries and
// unique labels on both axes.
class ResponseMatrix {
public:
    ResponseMatrix(Matrix data, std::vector<std::string> stimulus_ids,
                   std::vector<std::string> unit_ids);

    static ResponseMatrix with_default_ids(Matrix data);

    const Matrix& data() const { return data_; }
    long n_stimuli() const { return data_.rows(); }
    long n_units() const { return data_.cols(); }
    const std::vector<std::string>& stimulus_ids() const { return stimulus_ids_; }
    const std::vector<std::string>& unit_ids() const { return unit_ids_; }

private:
    Matrix data_;
    std::vector<std::string> stimulus_ids_;
    std::vector<std::string> unit_ids_;
};

enum class ConnectivityKind { icm, rdm, behavioral };

std::string to_string(ConnectivityKind kind);
ConnectivityKind connectivity_kind_from_string(const std::string& s);

// Symmetric stimulus x stimulus matrix: co-assignment frequencies (icm) or
// dissimilarities (rdm / behavioral). The plain constructor demands exact
// symmetry and exact diagonal (what our builders produce); from_raw accepts
// externally supplied data with up to 1e-9 asymmetry and repairs it.
class ConnectivityMatrix {
public:
    ConnectivityMatrix(Matrix data, ConnectivityKind kind,
                       std::vector<std::string> stimulus_ids);

    static ConnectivityMatrix from_raw(Matrix data, ConnectivityKind kind,
                                       std::vector<std::string> stimulus_ids);

    const Matrix& data() const { return data_; }
    ConnectivityKind kind() const { return kind_; }
    long n_stimuli() const { return data_.rows(); }
    const std::vector<std::string>& stimulus_ids() const { return stimulus_ids_; }

private:
    Matrix data_;
    ConnectivityKind kind_;
    std::vector<std::string> stimulus_ids_;
};

// Exponential rates for the factor priors and inverse-gamma hyperparameters
// for the noise variance. The scalar rates apply uniformly; the optional
// matrices override them per entry (S x C for responses, C x V for weights).
struct PriorSpec {
    double response_rate = 1.0;
    double weight_rate = 1.0;
    double noise_shape = 1.0;
    double noise_scale = 1.0;
    std::optional<Matrix> response_rate_matrix;
    std::optional<Matrix> weight_rate_matrix;

    void validate() const;
};

}  // namespace scakit
