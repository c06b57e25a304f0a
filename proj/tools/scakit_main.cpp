#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "scakit/alignment.hpp"
#include "scakit/consensus.hpp"
#include "scakit/decompose.hpp"
#include "scakit/errors.hpp"
#include "scakit/io.hpp"
#include "scakit/manifest.hpp"
#include "scakit/parallel.hpp"
#include "scakit/simulation.hpp"
#include "scakit/sparsity.hpp"
#include "scakit/stats.hpp"
#include "scakit/types.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Stopwatch {
 public:
  double elapsed_s() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

int g_jobs = 0;  // 0 = all cores

struct GibbsOpts {
  int sweeps = 400;
  int burn_in = 200;
  double response_rate = 1.0;
  double weight_rate = 1.0;
  double noise_shape = 1.0;
  double noise_scale = 1.0;
  std::string point_estimate = "posterior-mean";
};

void add_gibbs_options(CLI::App* sub, GibbsOpts& g) {
  sub->add_option("--sweeps", g.sweeps, "Total Gibbs sweeps")->capture_default_str();
  sub->add_option("--burn-in", g.burn_in, "Discarded initial sweeps")->capture_default_str();
  sub->add_option("--response-rate", g.response_rate, "Exponential prior rate on R")
      ->capture_default_str();
  sub->add_option("--weight-rate", g.weight_rate, "Exponential prior rate on W")
      ->capture_default_str();
  sub->add_option("--noise-shape", g.noise_shape, "Inverse-gamma shape for sigma^2")
      ->capture_default_str();
  sub->add_option("--noise-scale", g.noise_scale, "Inverse-gamma scale for sigma^2")
      ->capture_default_str();
  sub->add_option("--point-estimate", g.point_estimate, "posterior-mean or last-sample")
      ->check(CLI::IsMember({"posterior-mean", "last-sample"}))
      ->capture_default_str();
}

scakit::GibbsConfig to_gibbs_config(const GibbsOpts& g) {
  scakit::GibbsConfig cfg;
  cfg.n_sweeps = g.sweeps;
  cfg.burn_in = g.burn_in;
  cfg.priors.response_rate = g.response_rate;
  cfg.priors.weight_rate = g.weight_rate;
  cfg.priors.noise_shape = g.noise_shape;
  cfg.priors.noise_scale = g.noise_scale;
  cfg.point_estimate = scakit::point_estimate_from_string(g.point_estimate);
  return cfg;
}

scakit::ResponseMatrix load_input(const std::string& path, const std::string& preprocess) {
  scakit::ResponseMatrix m = scakit::load_matrix(path, scakit::infer_format(path));
  if (preprocess == "unit-max") return scakit::scale_unit_max(m);
  return m;
}

void write_json_file(const json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw scakit::IoError("cannot write " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw scakit::IoError("write failed: " + path.string());
}

void emit_manifest(const std::string& command, const json& params, std::uint64_t seed,
                   const std::vector<std::string>& inputs, std::vector<std::string> outputs,
                   const Stopwatch& watch, const fs::path& manifest_path) {
  scakit::RunManifest m;
  m.command = command;
  m.params = params;
  m.seed = seed;
  for (const auto& p : inputs) m.input_digests[p] = scakit::file_digest(p);
  m.output_paths = std::move(outputs);
  m.wall_time_s = watch.elapsed_s();
  scakit::write_manifest(m, manifest_path);
}

// ---- decompose ----

struct DecomposeOpts {
  std::string input;
  std::string outdir;
  std::string method = "bnmf";
  int components = 20;
  int runs = 1;
  std::uint64_t seed = 0;
  GibbsOpts gibbs;
  int n_iter = 500;
  double l1_penalty = 0.1;
  std::string preprocess = "none";
};

void run_decompose(const DecomposeOpts& o) {
  Stopwatch watch;
  const scakit::ResponseMatrix d = load_input(o.input, o.preprocess);
  const scakit::Method method = scakit::method_from_string(o.method);

  scakit::Factorization f;
  json params;
  params["method"] = o.method;
  params["components"] = o.components;
  params["preprocess"] = o.preprocess;
  switch (method) {
    case scakit::Method::pca:
      f = scakit::pca_decompose(d, o.components);
      break;
    case scakit::Method::nmf:
      f = scakit::nmf_decompose(d, o.components, o.n_iter, o.seed);
      params["n_iter"] = o.n_iter;
      break;
    case scakit::Method::snmf:
      f = scakit::snmf_decompose(d, o.components, o.l1_penalty, o.n_iter, o.seed);
      params["n_iter"] = o.n_iter;
      params["l1_penalty"] = o.l1_penalty;
      break;
    case scakit::Method::bnmf: {
      const scakit::GibbsConfig cfg = to_gibbs_config(o.gibbs);
      f = scakit::bnmf_decompose(d, o.components, cfg, o.seed);
      params["gibbs"] = scakit::gibbs_config_to_json(cfg);
      break;
    }
  }

  json extra = params;
  extra["input"] = o.input;
  scakit::save_factorization(f, d.stimulus_ids(), d.unit_ids(), o.outdir, extra);
  emit_manifest("decompose", params, o.seed, {o.input},
                {(fs::path(o.outdir) / "responses.bin").string(),
                 (fs::path(o.outdir) / "weights.bin").string(),
                 (fs::path(o.outdir) / "meta.json").string()},
                watch, fs::path(o.outdir) / "manifest.json");
}

// ---- consensus ----

struct ConsensusOpts {
  std::string input;
  std::string outdir;
  int components = 20;
  int runs = 50;
  double outlier_threshold = 0.8;
  std::uint64_t seed = 0;
  GibbsOpts gibbs;
  std::string preprocess = "none";
};

void run_consensus_cmd(const ConsensusOpts& o) {
  Stopwatch watch;
  const scakit::ResponseMatrix d = load_input(o.input, o.preprocess);
  const scakit::GibbsConfig cfg = to_gibbs_config(o.gibbs);
  const scakit::ConsensusResult res = scakit::run_consensus(
      d, o.components, o.runs, cfg, o.outlier_threshold, o.seed, scakit::resolve_jobs(g_jobs));

  json params;
  params["components"] = o.components;
  params["runs"] = o.runs;
  params["outlier_threshold"] = o.outlier_threshold;
  params["preprocess"] = o.preprocess;
  params["gibbs"] = scakit::gibbs_config_to_json(cfg);
  json extra = params;
  extra["input"] = o.input;
  extra["seed"] = o.seed;

  scakit::save_consensus(res, d.stimulus_ids(), d.unit_ids(), o.outdir, extra);
  emit_manifest("consensus", params, o.seed, {o.input},
                {(fs::path(o.outdir) / "profiles.bin").string(),
                 (fs::path(o.outdir) / "weights.bin").string(),
                 (fs::path(o.outdir) / "meta.json").string()},
                watch, fs::path(o.outdir) / "manifest.json");
}

// ---- icm ----

struct IcmOpts {
  std::string input;
  std::string output;
  int components = 20;
  int runs = 50;
  std::uint64_t seed = 0;
  GibbsOpts gibbs;
  std::string preprocess = "none";
};

void run_icm(const IcmOpts& o) {
  Stopwatch watch;
  const scakit::ResponseMatrix d = load_input(o.input, o.preprocess);
  const scakit::GibbsConfig cfg = to_gibbs_config(o.gibbs);
  const scakit::ConnectivityMatrix icm =
      scakit::build_icm(d, o.components, o.runs, cfg, o.seed, scakit::resolve_jobs(g_jobs));
  scakit::save_matrix(icm, o.output, scakit::infer_format(o.output));

  json params;
  params["components"] = o.components;
  params["runs"] = o.runs;
  params["preprocess"] = o.preprocess;
  params["gibbs"] = scakit::gibbs_config_to_json(cfg);
  emit_manifest("icm", params, o.seed, {o.input}, {o.output}, watch, o.output + ".manifest.json");
}

// ---- align ----

struct AlignOpts {
  std::string metric;
  std::string input_a;
  std::string input_b;
  std::string out;
  std::string ledger;
  // rsa
  std::string a_kind = "rdm";
  std::string b_kind = "rdm";
  bool from_responses = false;
  std::string rdm_metric = "correlation";
  // cms
  bool absolute = false;
  std::string similarity = "pearson";
  // encoding
  double train_fraction = 0.8;
  int folds = 5;
  std::vector<double> penalties;
  std::uint64_t seed = 0;
};

void append_ledger(const fs::path& path, const json& result, const AlignOpts& o) {
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw scakit::IoError("cannot write " + path.string());
  if (fresh) out << "metric,value,n_stimuli,input_a,input_b\n";
  out << result.at("metric").get<std::string>() << ','
      << scakit::format_double(result.at("value").get<double>()) << ','
      << result.at("n_stimuli").get<long>() << ',' << o.input_a << ',' << o.input_b << '\n';
  if (!out) throw scakit::IoError("write failed: " + path.string());
}

void run_align(const AlignOpts& o) {
  Stopwatch watch;
  scakit::AlignmentScore score;
  json result;

  const scakit::MetricKind metric = scakit::metric_from_string(o.metric);
  switch (metric) {
    case scakit::MetricKind::sca: {
      const auto a = scakit::load_connectivity(o.input_a, scakit::infer_format(o.input_a),
                                               scakit::ConnectivityKind::icm);
      const auto b = scakit::load_connectivity(o.input_b, scakit::infer_format(o.input_b),
                                               scakit::ConnectivityKind::icm);
      score = scakit::sca_score(a, b);
      break;
    }
    case scakit::MetricKind::rsa: {
      if (o.from_responses) {
        const auto met = scakit::rdm_metric_from_string(o.rdm_metric);
        const auto a = scakit::build_rdm(load_input(o.input_a, "none"), met);
        const auto b = scakit::build_rdm(load_input(o.input_b, "none"), met);
        score = scakit::rsa_score(a, b);
        score.params["rdm_metric"] = o.rdm_metric;
      } else {
        const auto a = scakit::load_connectivity(o.input_a, scakit::infer_format(o.input_a),
                                                 scakit::connectivity_kind_from_string(o.a_kind));
        const auto b = scakit::load_connectivity(o.input_b, scakit::infer_format(o.input_b),
                                                 scakit::connectivity_kind_from_string(o.b_kind));
        score = scakit::rsa_score(a, b);
      }
      break;
    }
    case scakit::MetricKind::cms: {
      const auto a = scakit::detail::read_labeled(o.input_a, scakit::infer_format(o.input_a));
      const auto b = scakit::detail::read_labeled(o.input_b, scakit::infer_format(o.input_b));
      const scakit::CmsResult res =
          scakit::cms(a.data, b.data, o.absolute, scakit::similarity_from_string(o.similarity));
      score = res.score;
      result["permutation"] = res.permutation;
      break;
    }
    case scakit::MetricKind::encoding: {
      scakit::EncodingConfig cfg;
      cfg.train_fraction = o.train_fraction;
      cfg.n_folds_inner = o.folds;
      if (!o.penalties.empty()) cfg.ridge_penalties = o.penalties;
      cfg.seed = o.seed;
      score = scakit::encoding_score(load_input(o.input_a, "none"), load_input(o.input_b, "none"),
                                     cfg);
      break;
    }
  }

  result["metric"] = scakit::to_string(score.metric);
  result["value"] = score.value;
  result["n_stimuli"] = score.n_stimuli;
  result["params"] = score.params;
  result["inputs"] = {o.input_a, o.input_b};

  std::cout << result.dump(2) << "\n";
  if (!o.out.empty()) {
    write_json_file(result, o.out);
    emit_manifest("align", result["params"], o.seed, {o.input_a, o.input_b}, {o.out}, watch,
                  o.out + ".manifest.json");
  }
  if (!o.ledger.empty()) append_ledger(o.ledger, result, o);
}

// ---- simulate ----

struct SimulateOpts {
  std::string outdir;
  long m = 200;
  long n = 30;
  long k = 5;
  double sparsity = 0.3;
  double sigma = 0.01;
  std::uint64_t seed = 0;
  std::string format = "binary";
  double theta = 0.0;
  long planes = -1;  // <0: no rotation output
};

void run_simulate(const SimulateOpts& o) {
  Stopwatch watch;
  scakit::LatentSpec spec;
  spec.m = o.m;
  spec.n = o.n;
  spec.k = o.k;
  spec.sparsity = o.sparsity;
  spec.noise_sigma = o.sigma;
  spec.seed = o.seed;
  const scakit::LatentData data = scakit::gen_latent_data(spec);

  const scakit::FileFormat fmt =
      o.format == "csv" ? scakit::FileFormat::csv : scakit::FileFormat::binary;
  const std::string ext = o.format == "csv" ? ".csv" : ".bin";
  fs::create_directories(o.outdir);
  const auto comp_ids = scakit::make_default_ids("k", o.k);

  std::vector<std::string> outputs;
  const auto put = [&](const std::string& stem, const scakit::detail::LabeledMatrix& m) {
    const fs::path p = fs::path(o.outdir) / (stem + ext);
    scakit::detail::write_labeled(m, p, fmt);
    outputs.push_back(p.string());
  };
  put("x", {data.x.data(), data.x.stimulus_ids(), data.x.unit_ids()});
  put("l", {data.l, data.x.stimulus_ids(), comp_ids});
  put("a", {data.a, comp_ids, data.x.unit_ids()});

  json params;
  params["m"] = o.m;
  params["n"] = o.n;
  params["k"] = o.k;
  params["sparsity"] = o.sparsity;
  params["noise_sigma"] = o.sigma;
  params["format"] = o.format;

  if (o.planes >= 0) {
    scakit::RotationSpec rspec;
    rspec.n_dims = o.n;
    rspec.theta = o.theta;
    rspec.n_planes = o.planes;
    rspec.seed = o.seed;
    const scakit::Matrix r = scakit::make_rotation(rspec);
    const scakit::ResponseMatrix xr = scakit::apply_rotation(data.x, r);
    put("x_rot", {xr.data(), xr.stimulus_ids(), xr.unit_ids()});
    put("rotation", {r, data.x.unit_ids(), data.x.unit_ids()});
    params["theta"] = o.theta;
    params["n_planes"] = o.planes;
  }

  emit_manifest("simulate", params, o.seed, {}, outputs, watch,
                fs::path(o.outdir) / "manifest.json");
}

// ---- sweep ----

struct SweepOpts {
  std::string config;
  std::string out = "sweep.csv";
  std::uint64_t seed = 0;
  bool seed_given = false;
};

void run_sweep(const SweepOpts& o) {
  Stopwatch watch;
  json cfg = json::object();
  if (!o.config.empty()) cfg = scakit::parse_toml_file(o.config);

  scakit::LatentSpec spec;
  if (cfg.contains("latent")) {
    const auto& l = cfg["latent"];
    spec.m = l.value("m", spec.m);
    spec.n = l.value("n", spec.n);
    spec.k = l.value("k", spec.k);
    spec.sparsity = l.value("sparsity", spec.sparsity);
    spec.noise_sigma = l.value("sigma", spec.noise_sigma);
  }

  std::vector<double> thetas = scakit::default_sweep_thetas();
  std::vector<long> plane_counts = scakit::default_plane_counts(spec.n);
  std::vector<std::string> metrics = scakit::default_sweep_metrics();
  if (cfg.contains("grid")) {
    const auto& g = cfg["grid"];
    if (g.contains("thetas")) thetas = g["thetas"].get<std::vector<double>>();
    if (g.contains("plane_counts")) plane_counts = g["plane_counts"].get<std::vector<long>>();
    if (g.contains("metrics")) metrics = g["metrics"].get<std::vector<std::string>>();
  }

  int n_runs_icm = 50;
  GibbsOpts gibbs;
  if (cfg.contains("icm")) {
    const auto& i = cfg["icm"];
    n_runs_icm = i.value("runs", n_runs_icm);
    gibbs.sweeps = i.value("sweeps", gibbs.sweeps);
    gibbs.burn_in = i.value("burn_in", gibbs.burn_in);
  }

  std::uint64_t seed = cfg.value("seed", std::uint64_t{1});
  if (o.seed_given) seed = o.seed;

  const auto records =
      scakit::sensitivity_sweep(spec, thetas, plane_counts, metrics, n_runs_icm,
                                to_gibbs_config(gibbs), seed, scakit::resolve_jobs(g_jobs));
  scakit::save_sweep_csv(records, o.out);

  json params;
  params["latent"] = {{"m", spec.m},
                      {"n", spec.n},
                      {"k", spec.k},
                      {"sparsity", spec.sparsity},
                      {"sigma", spec.noise_sigma}};
  params["thetas"] = thetas;
  params["plane_counts"] = plane_counts;
  params["metrics"] = metrics;
  params["icm_runs"] = n_runs_icm;
  params["gibbs"] = scakit::gibbs_config_to_json(to_gibbs_config(gibbs));
  if (!o.config.empty()) params["config"] = o.config;

  std::vector<std::string> inputs;
  if (!o.config.empty()) inputs.push_back(o.config);
  emit_manifest("sweep", params, seed, inputs, {o.out}, watch, o.out + ".manifest.json");
}

// ---- sparsity ----

struct SparsityOpts {
  std::string factorization_dir;
  std::string out;
  std::string csv;
  std::string formula = "standard";
};

void run_sparsity(const SparsityOpts& o) {
  Stopwatch watch;
  const scakit::LoadedFactorization lf = scakit::load_factorization(o.factorization_dir);
  const auto formula = scakit::skewness_formula_from_string(o.formula);
  const scakit::FactorSparsity fs_rep = scakit::factor_sparsity_report(lf.factorization, formula);

  json report = scakit::factor_sparsity_to_json(fs_rep);
  report["method"] = scakit::to_string(lf.factorization.method);
  report["formula"] = o.formula;

  std::cout << report.dump(2) << "\n";
  std::vector<std::string> outputs;
  if (!o.out.empty()) {
    write_json_file(report, o.out);
    outputs.push_back(o.out);
  }
  if (!o.csv.empty()) {
    std::ofstream out(o.csv, std::ios::binary);
    if (!out) throw scakit::IoError("cannot write " + o.csv);
    out << "matrix,index,skipped,hoyer,kurtosis,skewness\n";
    const auto dump_rows = [&](const char* name, const scakit::SparsityReport& rep) {
      for (const auto& s : rep.per_vector)
        out << name << ',' << s.index << ',' << (s.skipped ? "true" : "false") << ','
            << scakit::format_double(s.hoyer) << ',' << scakit::format_double(s.kurtosis) << ','
            << scakit::format_double(s.skewness) << '\n';
    };
    dump_rows("weights", fs_rep.w_report);
    dump_rows("responses", fs_rep.r_report);
    if (!out) throw scakit::IoError("write failed: " + o.csv);
    outputs.push_back(o.csv);
  }

  if (!outputs.empty()) {
    json params;
    params["formula"] = o.formula;
    params["factorization"] = o.factorization_dir;
    const std::vector<std::string> inputs = {
        (fs::path(o.factorization_dir) / "responses.bin").string(),
        (fs::path(o.factorization_dir) / "weights.bin").string(),
        (fs::path(o.factorization_dir) / "meta.json").string()};
    emit_manifest("sparsity", params, 0, inputs, outputs, watch, outputs.front() + ".manifest.json");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse Bayesian decomposition and representational alignment toolkit"};
  app.require_subcommand(1);
  app.add_option("--jobs", g_jobs, "Worker threads (0 = all cores)")
      ->envname("SCA_KIT_JOBS")
      ->capture_default_str();

  DecomposeOpts dec;
  {
    CLI::App* sub = app.add_subcommand("decompose", "Factor a response matrix");
    sub->fallthrough();
    sub->add_option("input", dec.input, "Input matrix (.csv or binary)")->required();
    sub->add_option("output", dec.outdir, "Output directory")->required();
    sub->add_option("--method", dec.method, "pca|nmf|snmf|bnmf")
        ->check(CLI::IsMember({"pca", "nmf", "snmf", "bnmf"}))
        ->capture_default_str();
    sub->add_option("--components", dec.components, "Component count")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--runs", dec.runs, "Must be 1; use `consensus` to aggregate runs")
        ->check(CLI::Range(1, 1))
        ->capture_default_str();
    sub->add_option("--seed", dec.seed, "RNG seed")->capture_default_str();
    sub->add_option("--n-iter", dec.n_iter, "Multiplicative-update iterations (nmf/snmf)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--l1", dec.l1_penalty, "L1 penalty on W (snmf)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--preprocess", dec.preprocess, "none|unit-max")
        ->check(CLI::IsMember({"none", "unit-max"}))
        ->capture_default_str();
    add_gibbs_options(sub, dec.gibbs);
    sub->callback([&] { run_decompose(dec); });
  }

  ConsensusOpts con;
  {
    CLI::App* sub = app.add_subcommand("consensus", "Aggregate stochastic runs");
    sub->fallthrough();
    sub->add_option("input", con.input, "Input matrix")->required();
    sub->add_option("output", con.outdir, "Output directory")->required();
    sub->add_option("--components", con.components, "Component count")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--runs", con.runs, "Decomposition runs to aggregate")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--outlier-threshold", con.outlier_threshold,
                    "Mean nearest-neighbour distance cutoff")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--seed", con.seed, "RNG seed")->capture_default_str();
    sub->add_option("--preprocess", con.preprocess, "none|unit-max")
        ->check(CLI::IsMember({"none", "unit-max"}))
        ->capture_default_str();
    add_gibbs_options(sub, con.gibbs);
    sub->callback([&] { run_consensus_cmd(con); });
  }

  IcmOpts icm;
  {
    CLI::App* sub = app.add_subcommand("icm", "Build an image connectivity matrix");
    sub->fallthrough();
    sub->add_option("input", icm.input, "Input matrix")->required();
    sub->add_option("output", icm.output, "Output ICM file (.csv or binary)")->required();
    sub->add_option("--components", icm.components, "Component count")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--runs", icm.runs, "Decomposition runs to average")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--seed", icm.seed, "RNG seed")->capture_default_str();
    sub->add_option("--preprocess", icm.preprocess, "none|unit-max")
        ->check(CLI::IsMember({"none", "unit-max"}))
        ->capture_default_str();
    add_gibbs_options(sub, icm.gibbs);
    sub->callback([&] { run_icm(icm); });
  }

  AlignOpts al;
  {
    CLI::App* sub = app.add_subcommand("align", "Score representational alignment");
    sub->fallthrough();
    sub->add_option("--metric", al.metric, "sca|rsa|cms|encoding")
        ->check(CLI::IsMember({"sca", "rsa", "cms", "encoding"}))
        ->required();
    sub->add_option("a", al.input_a, "First input")->required();
    sub->add_option("b", al.input_b, "Second input")->required();
    sub->add_option("--out", al.out, "Write the result JSON here (also printed)");
    sub->add_option("--ledger", al.ledger, "Append a CSV row to this results ledger");
    sub->add_option("--a-kind", al.a_kind, "rsa: kind of input a (rdm|behavioral)")
        ->check(CLI::IsMember({"rdm", "behavioral"}))
        ->capture_default_str();
    sub->add_option("--b-kind", al.b_kind, "rsa: kind of input b (rdm|behavioral)")
        ->check(CLI::IsMember({"rdm", "behavioral"}))
        ->capture_default_str();
    sub->add_flag("--from-responses", al.from_responses,
                  "rsa: inputs are response matrices; build RDMs first");
    sub->add_option("--rdm-metric", al.rdm_metric, "rsa --from-responses: correlation|euclidean")
        ->check(CLI::IsMember({"correlation", "euclidean"}))
        ->capture_default_str();
    sub->add_flag("--absolute", al.absolute, "cms: match on |similarity|");
    sub->add_option("--similarity", al.similarity, "cms: pearson|cosine")
        ->check(CLI::IsMember({"pearson", "cosine"}))
        ->capture_default_str();
    sub->add_option("--train-fraction", al.train_fraction, "encoding: training split fraction")
        ->capture_default_str();
    sub->add_option("--folds", al.folds, "encoding: inner CV folds")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--penalty", al.penalties,
                    "encoding: ridge penalty grid (repeatable; default 1e-2..1e4)");
    sub->add_option("--seed", al.seed, "encoding: split seed")->capture_default_str();
    sub->callback([&] { run_align(al); });
  }

  SimulateOpts sim;
  {
    CLI::App* sub = app.add_subcommand("simulate", "Generate sparse latent data");
    sub->fallthrough();
    sub->add_option("output", sim.outdir, "Output directory")->required();
    sub->add_option("--m", sim.m, "Stimulus count")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--n", sim.n, "Unit count")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--k", sim.k, "Latent component count")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--sparsity", sim.sparsity, "Zeroing rate in [0,1)")->capture_default_str();
    sub->add_option("--sigma", sim.sigma, "Noise standard deviation")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--seed", sim.seed, "RNG seed")->capture_default_str();
    sub->add_option("--format", sim.format, "binary|csv")
        ->check(CLI::IsMember({"binary", "csv"}))
        ->capture_default_str();
    sub->add_option("--theta", sim.theta, "Also emit x_rot: rotation angle (radians)")
        ->capture_default_str();
    sub->add_option("--planes", sim.planes, "Also emit x_rot: rotated plane count");
    sub->callback([&] { run_simulate(sim); });
  }

  SweepOpts sw;
  {
    CLI::App* sub = app.add_subcommand("sweep", "Rotation-sensitivity sweep");
    sub->fallthrough();
    sub->add_option("--config", sw.config, "TOML config (defaults used when omitted)")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", sw.out, "Output CSV path")->capture_default_str();
    sub->add_option("--seed", sw.seed, "Master seed (overrides config)")
        ->each([&](const std::string&) { sw.seed_given = true; });
    sub->callback([&] { run_sweep(sw); });
  }

  SparsityOpts sp;
  {
    CLI::App* sub = app.add_subcommand("sparsity", "Sparsity report for a factorization");
    sub->fallthrough();
    sub->add_option("factorization", sp.factorization_dir, "Factorization directory")->required();
    sub->add_option("--out", sp.out, "Write the JSON report here (also printed)");
    sub->add_option("--csv", sp.csv, "Write the per-component CSV table here");
    sub->add_option("--formula", sp.formula, "Skewness formula: standard|paper")
        ->check(CLI::IsMember({"standard", "paper"}))
        ->capture_default_str();
    sub->callback([&] { run_sparsity(sp); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const scakit::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
