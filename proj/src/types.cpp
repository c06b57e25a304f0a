#include "scakit/types.hpp"

#include <cmath>
#include <unordered_set>

namespace scakit {

namespace {

void check_unique(const std::vector<std::string>& ids, const char* axis) {
    std::unordered_set<std::string> seen;
    for (const auto& id : ids) {
        if (!seen.insert(id).second)
            throw ValueError(std::string("duplicate ") + axis + " id: " + id);
    }
}

void check_finite(const Matrix& m, const char* what) {
    for (long i = 0; i < m.rows(); ++i) {
        for (long j = 0; j < m.cols(); ++j) {
            if (!std::isfinite(m(i, j))) {
                throw ValueError(std::string("non-finite entry in ") + what +
                                 " at (" + std::to_string(i + 1) + "," +
                                 std::to_string(j + 1) + ")");
            }
        }
    }
}

}  // namespace

std::vector<std::string> make_default_ids(const std::string& prefix, long n) {
    int width = 1;
    for (long v = n - 1; v >= 10; v /= 10) ++width;
    std::vector<std::string> ids;
    ids.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        std::string num = std::to_string(i);
        ids.push_back(prefix + std::string(width - num.size(), '0') + num);
    }
    return ids;
}

ResponseMatrix::ResponseMatrix(Matrix data,
                               std::vector<std::string> stimulus_ids,
                               std::vector<std::string> unit_ids)
    : data_(std::move(data)),
      stimulus_ids_(std::move(stimulus_ids)),
      unit_ids_(std::move(unit_ids)) {
    if (data_.rows() < 2)
        throw DimensionError("S >= 2 required (got S=" +
                             std::to_string(data_.rows()) + ")");
    if (data_.cols() < 1) throw DimensionError("V >= 1 required");
    if (static_cast<long>(stimulus_ids_.size()) != data_.rows())
        throw DimensionError("stimulus_ids size does not match row count");
    if (static_cast<long>(unit_ids_.size()) != data_.cols())
        throw DimensionError("unit_ids size does not match column count");
    check_finite(data_, "response matrix");
    check_unique(stimulus_ids_, "stimulus");
    check_unique(unit_ids_, "unit");
}

ResponseMatrix ResponseMatrix::with_default_ids(Matrix data) {
    auto sids = make_default_ids("s", data.rows());
    auto uids = make_default_ids("u", data.cols());
    return ResponseMatrix(std::move(data), std::move(sids), std::move(uids));
}

std::string to_string(ConnectivityKind kind) {
    switch (kind) {
        case ConnectivityKind::icm: return "icm";
        case ConnectivityKind::rdm: return "rdm";
        case ConnectivityKind::behavioral: return "behavioral";
    }
    return "?";
}

ConnectivityKind connectivity_kind_from_string(const std::string& s) {
    if (s == "icm") return ConnectivityKind::icm;
    if (s == "rdm") return ConnectivityKind::rdm;
    if (s == "behavioral") return ConnectivityKind::behavioral;
    throw ValueError("unknown connectivity kind: " + s);
}

ConnectivityMatrix::ConnectivityMatrix(Matrix data, ConnectivityKind kind,
                                       std::vector<std::string> stimulus_ids)
    : data_(std::move(data)), kind_(kind), stimulus_ids_(std::move(stimulus_ids)) {
    const long s = data_.rows();
    if (s < 2 || data_.cols() != s)
        throw DimensionError("connectivity matrix must be square with S >= 2");
    if (static_cast<long>(stimulus_ids_.size()) != s)
        throw DimensionError("stimulus_ids size does not match matrix size");
    check_finite(data_, "connectivity matrix");
    check_unique(stimulus_ids_, "stimulus");
    for (long i = 0; i < s; ++i)
        for (long j = i + 1; j < s; ++j)
            if (data_(i, j) != data_(j, i))
                throw ValueError("connectivity matrix is not symmetric at (" +
                                 std::to_string(i + 1) + "," +
                                 std::to_string(j + 1) + ")");
    const double diag = kind_ == ConnectivityKind::icm ? 1.0 : 0.0;
    for (long i = 0; i < s; ++i)
        if (data_(i, i) != diag)
            throw ValueError("connectivity diagonal must be " +
                             std::to_string(diag) + " for kind " +
                             to_string(kind_));
    if (kind_ == ConnectivityKind::icm) {
        if (data_.minCoeff() < 0.0 || data_.maxCoeff() > 1.0)
            throw ValueError("icm entries must lie in [0, 1]");
    } else {
        if (data_.minCoeff() < 0.0)
            throw ValueError("dissimilarity entries must be non-negative");
    }
}

ConnectivityMatrix ConnectivityMatrix::from_raw(
    Matrix data, ConnectivityKind kind, std::vector<std::string> stimulus_ids) {
    const long s = data.rows();
    if (s < 2 || data.cols() != s)
        throw DimensionError("connectivity matrix must be square with S >= 2");
    check_finite(data, "connectivity matrix");
    const double tol = 1e-9;
    for (long i = 0; i < s; ++i) {
        for (long j = i + 1; j < s; ++j) {
            if (std::abs(data(i, j) - data(j, i)) > tol)
                throw ValueError("connectivity matrix asymmetry exceeds 1e-9 at (" +
                                 std::to_string(i + 1) + "," +
                                 std::to_string(j + 1) + ")");
            const double v = 0.5 * (data(i, j) + data(j, i));
            data(i, j) = v;
            data(j, i) = v;
        }
    }
    const double diag = kind == ConnectivityKind::icm ? 1.0 : 0.0;
    for (long i = 0; i < s; ++i) {
        if (std::abs(data(i, i) - diag) > tol)
            throw ValueError("connectivity diagonal must be " +
                             std::to_string(diag) + " for kind " + to_string(kind));
        data(i, i) = diag;
    }
    return ConnectivityMatrix(std::move(data), kind, std::move(stimulus_ids));
}

void PriorSpec::validate() const {
    if (!(response_rate > 0.0) || !(weight_rate > 0.0) ||
        !(noise_shape > 0.0) || !(noise_scale > 0.0))
        throw ValueError("prior hyperparameters must be strictly positive");
    const auto check_matrix = [](const std::optional<Matrix>& m, const char* name) {
        if (!m) return;
        if (m->size() == 0) throw ValueError(std::string(name) + " is empty");
        if (m->minCoeff() <= 0.0)
            throw ValueError(std::string(name) + " entries must be positive");
    };
    check_matrix(response_rate_matrix, "response_rate_matrix");
    check_matrix(weight_rate_matrix, "weight_rate_matrix");
}

}  // namespace scakit
