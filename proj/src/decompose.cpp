#include "scakit/decompose.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "scakit/errors.hpp"
#include "scakit/io.hpp"
#include "scakit/rng.hpp"

namespace scakit {

namespace {

constexpr double kEps = 1e-12;

void check_components(long components, long n_stimuli, long n_units) {
  const long cap = std::min(n_stimuli, n_units);
  if (components < 1 || components > cap) {
    throw ValueError("components must be in [1, min(S, V)] = [1, " +
                     std::to_string(cap) + "] (got " + std::to_string(components) + ")");
  }
}

// Shared nonnegative init: half-normal entries scaled so that R*W roughly
// matches the magnitude of the data.
void init_factors(const Matrix& d, long components, std::uint64_t seed,
                  Matrix& resp, Matrix& wts) {
  Rng rng(seed, "init");
  double level = d.mean();
  if (!(level > 0.0)) level = d.cwiseAbs().mean();
  const double scale = std::sqrt(std::max(level, kEps) / static_cast<double>(components));
  resp.resize(d.rows(), components);
  wts.resize(components, d.cols());
  for (long i = 0; i < resp.rows(); ++i)
    for (long j = 0; j < resp.cols(); ++j)
      resp(i, j) = std::abs(rng.normal()) * scale;
  for (long i = 0; i < wts.rows(); ++i)
    for (long j = 0; j < wts.cols(); ++j)
      wts(i, j) = std::abs(rng.normal()) * scale;
}

void check_nonnegative(const Matrix& d) {
  for (long i = 0; i < d.rows(); ++i)
    for (long j = 0; j < d.cols(); ++j)
      if (d(i, j) < 0.0)
        throw ValueError("nonnegative factorization requires a nonnegative matrix; "
                         "entry (" + std::to_string(i) + ", " + std::to_string(j) +
                         ") = " + format_double(d(i, j)));
}

Factorization snmf_core(const ResponseMatrix& d, int components, double l1_penalty,
                        int n_iter, std::uint64_t seed, Method method) {
  const Matrix& x = d.data();
  check_components(components, x.rows(), x.cols());
  check_nonnegative(x);
  if (n_iter < 1) throw ValueError("n_iter must be >= 1 (got " + std::to_string(n_iter) + ")");
  if (l1_penalty < 0.0) throw ValueError("l1_penalty must be >= 0");

  Matrix r, w;
  init_factors(x, components, seed, r, w);

  for (long it = 0; it < n_iter; ++it) {
    // Lee-Seung multiplicative updates; the L1 term enters the W denominator.
    const Matrix num_w = r.transpose() * x;
    const Matrix den_w = (r.transpose() * r) * w;
    w = (w.array() * num_w.array() / (den_w.array() + l1_penalty + kEps)).matrix();

    const Matrix num_r = x * w.transpose();
    const Matrix den_r = r * (w * w.transpose());
    r = (r.array() * num_r.array() / (den_r.array() + kEps)).matrix();
  }

  Factorization f;
  f.responses = std::move(r);
  f.weights = std::move(w);
  f.noise_variance = std::numeric_limits<double>::quiet_NaN();
  f.seed = seed;
  f.method = method;
  return f;
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::pca: return "pca";
    case Method::nmf: return "nmf";
    case Method::snmf: return "snmf";
    case Method::bnmf: return "bnmf";
  }
  throw ValueError("unknown method");
}

Method method_from_string(const std::string& s) {
  if (s == "pca") return Method::pca;
  if (s == "nmf") return Method::nmf;
  if (s == "snmf") return Method::snmf;
  if (s == "bnmf") return Method::bnmf;
  throw ValueError("unknown method '" + s + "' (expected pca|nmf|snmf|bnmf)");
}

std::string to_string(PointEstimate p) {
  switch (p) {
    case PointEstimate::posterior_mean: return "posterior-mean";
    case PointEstimate::last_sample: return "last-sample";
  }
  throw ValueError("unknown point estimate");
}

PointEstimate point_estimate_from_string(const std::string& s) {
  if (s == "posterior-mean") return PointEstimate::posterior_mean;
  if (s == "last-sample") return PointEstimate::last_sample;
  throw ValueError("unknown point estimate '" + s + "' (expected posterior-mean|last-sample)");
}

void GibbsConfig::validate() const {
  if (n_sweeps < 1) throw ValueError("n_sweeps must be >= 1");
  if (burn_in < 0 || burn_in >= n_sweeps)
    throw ValueError("burn_in must satisfy 0 <= burn_in < n_sweeps (got burn_in=" +
                     std::to_string(burn_in) + ", n_sweeps=" + std::to_string(n_sweeps) + ")");
  priors.validate();
}

Factorization bnmf_decompose(const ResponseMatrix& d, int components,
                             const GibbsConfig& cfg, std::uint64_t seed) {
  // Real-valued (possibly negative) input is fine here: the likelihood puts
  // Gaussian noise around the non-negative product RW.
  const Matrix& x = d.data();
  const long s_n = x.rows(), v_n = x.cols(), c_n = components;
  check_components(c_n, s_n, v_n);
  cfg.validate();
  if (cfg.priors.response_rate_matrix &&
      (cfg.priors.response_rate_matrix->rows() != s_n ||
       cfg.priors.response_rate_matrix->cols() != c_n))
    throw DimensionError("response_rate_matrix must be S x C");
  if (cfg.priors.weight_rate_matrix &&
      (cfg.priors.weight_rate_matrix->rows() != c_n ||
       cfg.priors.weight_rate_matrix->cols() != v_n))
    throw DimensionError("weight_rate_matrix must be C x V");

  const Matrix* rho_m = cfg.priors.response_rate_matrix ? &*cfg.priors.response_rate_matrix : nullptr;
  const Matrix* gam_m = cfg.priors.weight_rate_matrix ? &*cfg.priors.weight_rate_matrix : nullptr;
  const double rho_s = cfg.priors.response_rate;
  const double gam_s = cfg.priors.weight_rate;

  Matrix r, w;
  init_factors(x, c_n, seed, r, w);
  double sigma2 = std::max((x - r * w).squaredNorm() / static_cast<double>(s_n * v_n), 1e-8);

  Rng rng(seed, "gibbs");
  Matrix r_acc = Matrix::Zero(s_n, c_n);
  Matrix w_acc = Matrix::Zero(c_n, v_n);
  double sig_acc = 0.0;
  long n_kept = 0;

  for (long sweep = 0; sweep < cfg.n_sweeps; ++sweep) {
    {
      // R | W, sigma2: rectified-normal conditionals, one entry at a time.
      const Matrix g = w * w.transpose();
      const Matrix p = x * w.transpose();
      for (long i = 0; i < s_n; ++i) {
        for (long c = 0; c < c_n; ++c) {
          const double rho = rho_m ? (*rho_m)(i, c) : rho_s;
          const double gcc = g(c, c);
          if (gcc <= 0.0) {
            r(i, c) = rng.exponential(rho);
            continue;
          }
          const double cross = r.row(i).dot(g.col(c)) - r(i, c) * gcc;
          const double mean = (p(i, c) - cross - rho * sigma2) / gcc;
          r(i, c) = rng.rectified_normal(mean, sigma2 / gcc);
        }
      }
    }
    {
      const Matrix h = r.transpose() * r;
      const Matrix q = r.transpose() * x;
      for (long c = 0; c < c_n; ++c) {
        for (long v = 0; v < v_n; ++v) {
          const double gam = gam_m ? (*gam_m)(c, v) : gam_s;
          const double hcc = h(c, c);
          if (hcc <= 0.0) {
            w(c, v) = rng.exponential(gam);
            continue;
          }
          const double cross = h.row(c).dot(w.col(v)) - hcc * w(c, v);
          const double mean = (q(c, v) - cross - gam * sigma2) / hcc;
          w(c, v) = rng.rectified_normal(mean, sigma2 / hcc);
        }
      }
    }
    {
      const double chi2 = (x - r * w).squaredNorm();
      const double shape = cfg.priors.noise_shape + 0.5 * static_cast<double>(s_n * v_n);
      const double scale = cfg.priors.noise_scale + 0.5 * chi2;
      sigma2 = scale / rng.gamma(shape, 1.0);
    }
    if (sweep >= cfg.burn_in) {
      r_acc += r;
      w_acc += w;
      sig_acc += sigma2;
      ++n_kept;
    }
  }

  Factorization f;
  if (cfg.point_estimate == PointEstimate::posterior_mean) {
    const double inv = 1.0 / static_cast<double>(n_kept);
    f.responses = r_acc * inv;
    f.weights = w_acc * inv;
    f.noise_variance = sig_acc * inv;
  } else {
    f.responses = std::move(r);
    f.weights = std::move(w);
    f.noise_variance = sigma2;
  }
  f.seed = seed;
  f.method = Method::bnmf;
  return f;
}

Factorization nmf_decompose(const ResponseMatrix& d, int components, int n_iter,
                            std::uint64_t seed) {
  return snmf_core(d, components, 0.0, n_iter, seed, Method::nmf);
}

Factorization snmf_decompose(const ResponseMatrix& d, int components, double l1_penalty,
                             int n_iter, std::uint64_t seed) {
  return snmf_core(d, components, l1_penalty, n_iter, seed, Method::snmf);
}

Factorization pca_decompose(const ResponseMatrix& d, int components) {
  const Matrix& x = d.data();
  const long cap = std::min(x.rows() - 1, x.cols());
  if (components < 1 || components > cap)
    throw ValueError("pca components must be in [1, min(S - 1, V)] = [1, " +
                     std::to_string(cap) + "] (got " + std::to_string(components) + ")");

  const Eigen::RowVectorXd mu = x.colwise().mean();
  const Matrix centered = x.rowwise() - mu;
  Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);

  Matrix scores = svd.matrixU().leftCols(components) *
                  svd.singularValues().head(components).asDiagonal();
  Matrix loadings = svd.matrixV().leftCols(components).transpose();

  // Deterministic sign: the largest-|.| loading of each component is positive.
  for (long k = 0; k < components; ++k) {
    long arg = 0;
    loadings.row(k).cwiseAbs().maxCoeff(&arg);
    if (loadings(k, arg) < 0.0) {
      loadings.row(k) *= -1.0;
      scores.col(k) *= -1.0;
    }
  }

  Factorization f;
  f.responses = std::move(scores);
  f.weights = std::move(loadings);
  f.noise_variance = std::numeric_limits<double>::quiet_NaN();
  f.seed = 0;
  f.method = Method::pca;
  return f;
}

double explained_variance(const ResponseMatrix& d, const Factorization& f) {
  const Matrix& x = d.data();
  if (f.responses.rows() != x.rows() || f.weights.cols() != x.cols() ||
      f.responses.cols() != f.weights.rows())
    throw DimensionError("factorization shape does not match the data matrix");

  Matrix recon = f.responses * f.weights;
  const Eigen::RowVectorXd mu = x.colwise().mean();
  if (f.method == Method::pca) recon.rowwise() += mu;

  const double total = (x.rowwise() - mu).squaredNorm();
  if (total <= 0.0) throw DegenerateError("explained_variance undefined for a constant matrix");
  return 1.0 - (x - recon).squaredNorm() / total;
}

ResponseMatrix scale_unit_max(const ResponseMatrix& d) {
  Matrix x = d.data();
  for (long j = 0; j < x.cols(); ++j) {
    const double m = x.col(j).cwiseAbs().maxCoeff();
    if (m > 0.0) x.col(j) /= m;
  }
  return ResponseMatrix(std::move(x), d.stimulus_ids(), d.unit_ids());
}

nlohmann::json gibbs_config_to_json(const GibbsConfig& cfg) {
  nlohmann::json j;
  j["n_sweeps"] = cfg.n_sweeps;
  j["burn_in"] = cfg.burn_in;
  j["point_estimate"] = to_string(cfg.point_estimate);
  j["priors"] = {{"response_rate", cfg.priors.response_rate},
                 {"weight_rate", cfg.priors.weight_rate},
                 {"noise_shape", cfg.priors.noise_shape},
                 {"noise_scale", cfg.priors.noise_scale}};
  return j;
}

GibbsConfig gibbs_config_from_json(const nlohmann::json& j) {
  GibbsConfig cfg;
  if (j.contains("n_sweeps")) cfg.n_sweeps = j.at("n_sweeps").get<long>();
  if (j.contains("burn_in")) cfg.burn_in = j.at("burn_in").get<long>();
  if (j.contains("point_estimate"))
    cfg.point_estimate = point_estimate_from_string(j.at("point_estimate").get<std::string>());
  if (j.contains("priors")) {
    const auto& p = j.at("priors");
    if (p.contains("response_rate")) cfg.priors.response_rate = p.at("response_rate").get<double>();
    if (p.contains("weight_rate")) cfg.priors.weight_rate = p.at("weight_rate").get<double>();
    if (p.contains("noise_shape")) cfg.priors.noise_shape = p.at("noise_shape").get<double>();
    if (p.contains("noise_scale")) cfg.priors.noise_scale = p.at("noise_scale").get<double>();
  }
  cfg.validate();
  return cfg;
}

void save_factorization(const Factorization& f, const std::vector<std::string>& stimulus_ids,
                        const std::vector<std::string>& unit_ids,
                        const std::filesystem::path& dir, const nlohmann::json& extra_meta) {
  if (f.responses.rows() != static_cast<long>(stimulus_ids.size()))
    throw DimensionError("stimulus_ids length does not match responses");
  if (f.weights.cols() != static_cast<long>(unit_ids.size()))
    throw DimensionError("unit_ids length does not match weights");
  if (f.responses.cols() != f.weights.rows())
    throw DimensionError("responses/weights component counts differ");

  std::filesystem::create_directories(dir);
  const auto comp_ids = make_default_ids("c", f.responses.cols());
  detail::write_labeled({f.responses, stimulus_ids, comp_ids}, dir / "responses.bin",
                        FileFormat::binary);
  detail::write_labeled({f.weights, comp_ids, unit_ids}, dir / "weights.bin",
                        FileFormat::binary);

  nlohmann::json meta;
  meta["components"] = f.responses.cols();
  meta["method"] = to_string(f.method);
  meta["seed"] = f.seed;
  meta["noise_variance"] = f.noise_variance;  // NaN serializes as null
  for (auto it = extra_meta.begin(); it != extra_meta.end(); ++it) meta[it.key()] = it.value();

  std::ofstream out(dir / "meta.json");
  if (!out) throw IoError("cannot write " + (dir / "meta.json").string());
  out << meta.dump(2) << "\n";
}

void save_factorization(const Factorization& f, const std::vector<std::string>& stimulus_ids,
                        const std::vector<std::string>& unit_ids,
                        const std::filesystem::path& dir) {
  save_factorization(f, stimulus_ids, unit_ids, dir, nlohmann::json::object());
}

LoadedFactorization load_factorization(const std::filesystem::path& dir) {
  auto resp = detail::read_labeled(dir / "responses.bin", FileFormat::binary);
  auto wts = detail::read_labeled(dir / "weights.bin", FileFormat::binary);
  if (resp.col_ids != wts.row_ids)
    throw ParseError("component labels disagree between responses.bin and weights.bin");

  std::ifstream in(dir / "meta.json");
  if (!in) throw IoError("cannot read " + (dir / "meta.json").string());
  nlohmann::json meta;
  try {
    in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid meta.json: ") + e.what());
  }

  LoadedFactorization lf;
  lf.factorization.responses = std::move(resp.data);
  lf.factorization.weights = std::move(wts.data);
  lf.factorization.method = method_from_string(meta.at("method").get<std::string>());
  lf.factorization.seed = meta.value("seed", std::uint64_t{0});
  const auto& nv = meta.at("noise_variance");
  lf.factorization.noise_variance =
      nv.is_null() ? std::numeric_limits<double>::quiet_NaN() : nv.get<double>();
  lf.stimulus_ids = std::move(resp.row_ids);
  lf.unit_ids = std::move(wts.col_ids);
  return lf;
}

}  // namespace scakit
