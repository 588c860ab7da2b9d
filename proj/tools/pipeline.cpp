#include "pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>
#include <utility>

#include "cdm/cdm_c.h"
#include "csv.hpp"

namespace cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

int log_level() {
  static const int level = [] {
    const char* env = std::getenv("CDM_LOG");
    return env == nullptr ? 0 : std::atoi(env);
  }();
  return level;
}

void log_info(const std::string& message) {
  if (log_level() >= 1) std::fprintf(stderr, "[cdm] %s\n", message.c_str());
}

void log_warn(const std::string& message) {
  std::fprintf(stderr, "[cdm] warning: %s\n", message.c_str());
}

void check(cdm_status status) {
  if (status != CDM_OK)
    throw CliError{static_cast<int>(status), cdm_last_error()};
}

[[noreturn]] void bad_config(const std::string& message) {
  throw CliError{CDM_ERR_INVALID_INPUT, message};
}

struct ModelHandle {
  cdm_model* h = nullptr;
  ModelHandle() = default;
  ModelHandle(const ModelHandle&) = delete;
  ModelHandle& operator=(const ModelHandle&) = delete;
  ~ModelHandle() { cdm_model_free(h); }
};

struct GeneratorHandle {
  cdm_dataset* h = nullptr;
  GeneratorHandle() = default;
  GeneratorHandle(const GeneratorHandle&) = delete;
  GeneratorHandle& operator=(const GeneratorHandle&) = delete;
  ~GeneratorHandle() { cdm_dataset_free(h); }
};

std::string iso_now() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError{CDM_ERR_IO_FAILURE, "cannot open " + path};
  try {
    json j;
    in >> j;
    return j;
  } catch (const std::exception& e) {
    throw CliError{CDM_ERR_INVALID_INPUT, path + ": " + e.what()};
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw CliError{CDM_ERR_IO_FAILURE,
                   "cannot open " + path.string() + " for writing"};
  out << j.dump(2) << '\n';
  out.flush();
  if (!out) throw CliError{CDM_ERR_IO_FAILURE, "write failed: " + path.string()};
  log_info("wrote " + path.string());
}

void save_table(const fs::path& path, const Table& t) {
  try {
    write_table(path.string(), t);
  } catch (const IoError& e) {
    throw CliError{CDM_ERR_IO_FAILURE, e.what()};
  }
  log_info("wrote " + path.string());
}

Table load_table(const std::string& path) {
  try {
    return read_table(path);
  } catch (const IoError& e) {
    throw CliError{CDM_ERR_IO_FAILURE, e.what()};
  }
}

void save_labels(const fs::path& path, const std::vector<std::int32_t>& labels,
                 const std::string& header) {
  try {
    write_labels(path.string(), labels, header);
  } catch (const IoError& e) {
    throw CliError{CDM_ERR_IO_FAILURE, e.what()};
  }
  log_info("wrote " + path.string());
}

std::string config_hash(const json& canonical) {
  const std::string s = canonical.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::vector<double> as_double_grid(const json& v, const char* what) {
  std::vector<double> grid;
  if (v.is_number()) {
    grid.push_back(v.get<double>());
  } else if (v.is_array()) {
    for (const auto& e : v) {
      if (!e.is_number()) bad_config(std::string(what) + ": non-numeric entry");
      grid.push_back(e.get<double>());
    }
  } else {
    bad_config(std::string(what) + " must be a number or an array");
  }
  if (grid.empty()) bad_config(std::string(what) + " grid is empty");
  return grid;
}

std::vector<int> as_int_grid(const json& v, const char* what) {
  std::vector<int> grid;
  if (v.is_number_integer()) {
    grid.push_back(v.get<int>());
  } else if (v.is_array()) {
    for (const auto& e : v) {
      if (!e.is_number_integer())
        bad_config(std::string(what) + ": non-integer entry");
      grid.push_back(e.get<int>());
    }
  } else {
    bad_config(std::string(what) + " must be an integer or an array");
  }
  if (grid.empty()) bad_config(std::string(what) + " grid is empty");
  return grid;
}

json resolved_generator(const json& g) {
  if (!g.is_object() || !g.contains("name"))
    bad_config("generator must be an object with a name");
  const std::string name = g.at("name").get<std::string>();
  json r;
  r["name"] = name;
  if (name == "noisy_sinusoids") {
    if (!g.contains("freqs")) bad_config("noisy_sinusoids needs freqs");
    if (!g.contains("eps")) bad_config("noisy_sinusoids needs eps");
    r["freqs"] = g.at("freqs");
    r["eps"] = g.at("eps");
    r["n_per"] = g.value("n_per", 20);
    r["t_samples"] = g.value("t_samples", 1000);
    r["dt"] = g.value("dt", 0.01);
  } else if (name == "three_class") {
    r["n_per"] = g.value("n_per", 100);
    r["eta"] = g.value("eta", 2.0);
    r["alpha"] = g.value("alpha", 0.1);
    r["beta"] = g.value("beta", 0.5);
  } else {
    bad_config("unknown generator: " + name);
  }
  return r;
}

struct Dataset {
  std::vector<double> X;  // row-major n x d
  std::int64_t n = 0;
  std::int64_t d = 0;
  std::vector<std::int32_t> labels;
  std::string provenance;
};

Dataset make_dataset(const Config& cfg) {
  const json& g = cfg.generator;
  GeneratorHandle gh;
  if (g.at("name").get<std::string>() == "noisy_sinusoids") {
    const std::vector<double> freqs = g.at("freqs").get<std::vector<double>>();
    check(cdm_gen_noisy_sinusoids(
        freqs.data(), static_cast<std::int64_t>(freqs.size()),
        g.at("n_per").get<int>(), g.at("eps").get<double>(),
        g.at("t_samples").get<int>(), g.at("dt").get<double>(), cfg.seed,
        &gh.h));
  } else {
    check(cdm_gen_three_class(g.at("n_per").get<int>(),
                              g.at("eta").get<double>(),
                              g.at("alpha").get<double>(),
                              g.at("beta").get<double>(), cfg.seed, &gh.h));
  }
  Dataset ds;
  check(cdm_dataset_dims(gh.h, &ds.n, &ds.d));
  ds.X.resize(static_cast<std::size_t>(ds.n * ds.d));
  ds.labels.resize(static_cast<std::size_t>(ds.n));
  check(cdm_dataset_features(gh.h, ds.X.data()));
  check(cdm_dataset_labels(gh.h, ds.labels.data()));
  ds.provenance = cdm_dataset_provenance(gh.h);
  return ds;
}

// Delay stacking treats dataset rows as consecutive frames; the stacked row
// starting at frame t keeps frame t's label.
Dataset stacked(const Dataset& ds, int p) {
  if (p == 1) return ds;
  if (p < 1 || ds.n <= p)
    bad_config("stacking order p must satisfy 1 <= p < dataset rows");
  Dataset out;
  out.n = ds.n - p + 1;
  out.d = ds.d * p;
  out.X.resize(static_cast<std::size_t>(out.n * out.d));
  check(cdm_stack_order_p(ds.X.data(), ds.n, ds.d, p, out.X.data()));
  out.labels.assign(ds.labels.begin(), ds.labels.begin() + out.n);
  out.provenance = ds.provenance;
  return out;
}

int cluster_count(const Config& cfg, const Dataset& ds) {
  if (cfg.k > 0) return cfg.k;
  const std::set<std::int32_t> classes(ds.labels.begin(), ds.labels.end());
  return static_cast<int>(classes.size());
}

void build_model(ModelHandle& m, const Dataset& ds, double sigma,
                 double theta) {
  check(cdm_model_build(ds.X.data(), ds.n, ds.d, sigma, theta, &m.h));
}

// Hermiticity and spectral-bound checks on the built operator.
json spectrum_report(cdm_model* h) {
  std::int64_t n = 0;
  check(cdm_model_size(h, &n));
  std::vector<double> lambda(static_cast<std::size_t>(n));
  check(cdm_model_eigenvalues(h, lambda.data()));
  std::vector<double> op(static_cast<std::size_t>(2 * n * n));
  check(cdm_model_operator(h, op.data()));
  double herm = 0.0;
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j <= i; ++j) {
      const double dre = op[2 * (i * n + j)] - op[2 * (j * n + i)];
      const double dim = op[2 * (i * n + j) + 1] + op[2 * (j * n + i) + 1];
      herm = std::max(herm, std::hypot(dre, dim));
    }
  json r;
  r["hermiticity_error"] = herm;
  r["eig_min"] = lambda.back();
  r["eig_max"] = lambda.front();
  r["spectrum_in_bounds"] =
      lambda.back() >= -1e-9 && lambda.front() <= 1.0 + 1e-9;
  return r;
}

// Interleaved complex embedding; the buffer is simultaneously the realified
// n x 2s real matrix used for clustering. `first` is the index of the first
// kept coordinate (2 when the near-constant coordinate is skipped).
struct Embedding {
  std::vector<double> inter;
  std::int64_t n = 0;
  std::int64_t s = 0;
  int first = 1;
};

std::vector<double> drop_first_column(const std::vector<double>& buf,
                                      std::int64_t n, std::int64_t cols,
                                      int width) {
  std::vector<double> out(static_cast<std::size_t>(n * (cols - 1) * width));
  for (std::int64_t r = 0; r < n; ++r)
    std::copy(buf.begin() + (r * cols + 1) * width,
              buf.begin() + (r + 1) * cols * width,
              out.begin() + r * (cols - 1) * width);
  return out;
}

Embedding embed_model(cdm_model* h, double t, std::int64_t s,
                      bool skip_first) {
  Embedding e;
  check(cdm_model_size(h, &e.n));
  const std::int64_t s_req = skip_first ? s + 1 : s;
  std::vector<double> buf(static_cast<std::size_t>(2 * e.n * s_req));
  check(cdm_model_embed(h, t, s_req, buf.data()));
  e.s = s;
  e.first = skip_first ? 2 : 1;
  e.inter = skip_first ? drop_first_column(buf, e.n, s_req, 2)
                       : std::move(buf);
  return e;
}

struct RealEmbedding {
  std::vector<double> values;
  std::int64_t n = 0;
  std::int64_t s = 0;
  int first = 1;
};

RealEmbedding dm_embed(const Dataset& ds, double sigma, double t,
                       std::int64_t s, bool skip_first,
                       std::vector<double>* eigenvalues) {
  RealEmbedding e;
  e.n = ds.n;
  const std::int64_t s_req = skip_first ? s + 1 : s;
  std::vector<double> buf(static_cast<std::size_t>(ds.n * s_req));
  if (eigenvalues != nullptr)
    eigenvalues->resize(static_cast<std::size_t>(ds.n));
  check(cdm_dm_embed(ds.X.data(), ds.n, ds.d, sigma, t, s_req, buf.data(),
                     eigenvalues == nullptr ? nullptr : eigenvalues->data()));
  e.s = s;
  e.first = skip_first ? 2 : 1;
  e.values = skip_first ? drop_first_column(buf, ds.n, s_req, 1)
                        : std::move(buf);
  return e;
}

// Spectral diffusion distances against embedding row distances; exhaustive
// for small N, a fixed deterministic sample of pairs otherwise.
double distance_identity_error(cdm_model* h, const Embedding& e, double t) {
  const std::int64_t n = e.n;
  const std::int64_t s = e.s;
  const auto row_dist = [&](std::int64_t i, std::int64_t j) {
    double sum = 0.0;
    for (std::int64_t c = 0; c < 2 * s; ++c) {
      const double diff = e.inter[2 * i * s + c] - e.inter[2 * j * s + c];
      sum += diff * diff;
    }
    return std::sqrt(sum);
  };
  double worst = 0.0;
  const auto probe = [&](std::int64_t i, std::int64_t j) {
    double d = 0.0;
    check(cdm_model_diffusion_distance(h, t, i, j, s, &d));
    worst = std::max(worst, std::abs(d - row_dist(i, j)));
  };
  if (n <= 200) {
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t j = i + 1; j < n; ++j) probe(i, j);
  } else {
    for (std::uint64_t k = 0; k < 1000; ++k) {
      const std::int64_t i =
          static_cast<std::int64_t>(cdm_derive_seed(2025, 2 * k) % n);
      const std::int64_t j =
          static_cast<std::int64_t>(cdm_derive_seed(2025, 2 * k + 1) % n);
      if (i != j) probe(i, j);
    }
  }
  return worst;
}

struct ClusterOut {
  std::vector<std::int32_t> assignments;
  double inertia = 0.0;
};

ClusterOut run_kmeans(const double* values, std::int64_t n, std::int64_t cols,
                      int k, std::uint64_t seed) {
  ClusterOut out;
  out.assignments.resize(static_cast<std::size_t>(n));
  check(cdm_kmeans(values, n, cols, k, seed, out.assignments.data(),
                   &out.inertia));
  return out;
}

json truth_metrics(const double* values, std::int64_t n, std::int64_t cols,
                   const std::vector<std::int32_t>& truth,
                   const std::vector<std::int32_t>& pred) {
  double acc = 0.0, ari = 0.0, nmi = 0.0, fdr = 0.0;
  check(cdm_clustering_accuracy(truth.data(), pred.data(), n, &acc));
  check(cdm_ari(truth.data(), pred.data(), n, &ari));
  check(cdm_nmi(truth.data(), pred.data(), n, &nmi));
  check(cdm_fdr(values, n, cols, truth.data(), &fdr));
  json m;
  m["acc"] = acc;
  m["ari"] = ari;
  m["nmi"] = nmi;
  m["mean_score"] = (acc + ari + nmi) / 3.0;
  m["fdr"] = std::isfinite(fdr) ? json(fdr) : json("inf");
  return m;
}

struct CellParams {
  std::size_t index = 0;
  double sigma = 0.0;
  double theta = 0.0;
  int p = 1;
};

void require_kernel(const Config& cfg) {
  if (cfg.sigma_grid.empty() || cfg.theta_grid.empty())
    bad_config("this command needs kernel parameters (kernel.sigma and "
               "kernel.theta or kernel.theta_ratio)");
}

CellParams first_cell(const Config& cfg) {
  require_kernel(cfg);
  return {0, cfg.sigma_grid.front(), cfg.theta_grid.front(),
          cfg.p_grid.front()};
}

json cell_params_json(const Config& cfg, const CellParams& cell) {
  json j;
  j["sigma"] = cell.sigma;
  j["theta"] = cell.theta;
  j["p"] = cell.p;
  j["t"] = cfg.t;
  j["s"] = cfg.s;
  j["skip_first_coord"] = cfg.skip_first_coord;
  return j;
}

// New points for extend/reconstruct: a CSV named in the command object, or
// the (stacked) training features themselves.
struct NewPoints {
  std::vector<double> X;
  std::int64_t n = 0;
  std::int64_t d = 0;
  bool in_sample = true;
};

NewPoints new_points(const json& command_cfg, const Dataset& train) {
  NewPoints np;
  if (command_cfg.is_object() && command_cfg.contains("input")) {
    const std::string path = command_cfg.at("input").get<std::string>();
    const Table t = load_table(path);
    np.X = t.values;
    np.n = static_cast<std::int64_t>(t.rows);
    np.d = static_cast<std::int64_t>(t.cols);
    np.in_sample = false;
  } else {
    np.X = train.X;
    np.n = train.n;
    np.d = train.d;
  }
  return np;
}

}  // namespace

Config load_config(const std::string& path, const Overrides& overrides) {
  const json j = read_json(path);
  if (!j.is_object()) bad_config("config root must be an object");
  Config cfg;
  cfg.seed = overrides.has_seed ? overrides.seed
                                : j.value("seed", std::uint64_t{0});
  cfg.out = !overrides.out.empty() ? overrides.out
                                   : j.value("out", std::string{});
  if (cfg.out.empty())
    bad_config("output directory missing: set config \"out\" or pass --out");
  cfg.threads = overrides.threads > 0 ? overrides.threads
                                      : j.value("threads", 1);
  if (cfg.threads < 1) bad_config("threads must be >= 1");
  cfg.skip_first_coord =
      overrides.skip_first_coord || j.value("skip_first_coord", false);
  if (!j.contains("generator")) bad_config("config needs a generator");
  cfg.generator = resolved_generator(j.at("generator"));
  cfg.t = j.value("t", 1.0);
  cfg.s = j.value("s", std::int64_t{2});
  if (j.contains("p")) cfg.p_grid = as_int_grid(j.at("p"), "p");
  cfg.k = j.value("k", 0);
  if (j.contains("baselines")) {
    const json& b = j.at("baselines");
    cfg.baseline_dm = b.value("dm", false);
    cfg.baseline_pca = b.value("pca", false);
  }
  if (j.contains("kernel")) {
    const json& kj = j.at("kernel");
    if (!kj.contains("sigma")) bad_config("kernel.sigma is required");
    cfg.sigma_grid = as_double_grid(kj.at("sigma"), "kernel.sigma");
    const bool has_theta = kj.contains("theta");
    const bool has_ratio = kj.contains("theta_ratio");
    if (has_theta == has_ratio)
      bad_config("kernel needs exactly one of theta, theta_ratio");
    if (has_theta) {
      cfg.theta_grid = as_double_grid(kj.at("theta"), "kernel.theta");
    } else {
      const json& r = kj.at("theta_ratio");
      if (!r.is_array() || r.size() != 2)
        bad_config("kernel.theta_ratio must be [alpha, beta]");
      double theta = 0.0;
      check(cdm_theta_from_ratio(r[0].get<double>(), r[1].get<double>(),
                                 &theta));
      cfg.theta_grid = {theta};
    }
  }
  cfg.extend = j.value("extend", json());
  cfg.reconstruct = j.value("reconstruct", json());
  cfg.align = j.value("align", json());

  json c;
  c["seed"] = cfg.seed;
  c["generator"] = cfg.generator;
  c["t"] = cfg.t;
  c["s"] = cfg.s;
  c["p"] = cfg.p_grid;
  c["k"] = cfg.k;
  c["skip_first_coord"] = cfg.skip_first_coord;
  c["baselines"] = json{{"dm", cfg.baseline_dm}, {"pca", cfg.baseline_pca}};
  if (!cfg.sigma_grid.empty())
    c["kernel"] = json{{"sigma", cfg.sigma_grid}, {"theta", cfg.theta_grid}};
  if (!cfg.extend.is_null()) c["extend"] = cfg.extend;
  if (!cfg.reconstruct.is_null()) c["reconstruct"] = cfg.reconstruct;
  if (!cfg.align.is_null()) c["align"] = cfg.align;
  cfg.canonical = std::move(c);
  return cfg;
}

int cmd_generate(const Config& cfg) {
  const Dataset ds = make_dataset(cfg);
  const fs::path out(cfg.out);
  fs::create_directories(out);
  save_table(out / "dataset.csv",
             make_table(real_headers("x", 1, static_cast<std::size_t>(ds.d)),
                        ds.X.data(), static_cast<std::size_t>(ds.n),
                        static_cast<std::size_t>(ds.d)));
  save_labels(out / "labels.csv", ds.labels, "label");
  json prov;
  prov["generator"] = cfg.generator;
  prov["seed"] = cfg.seed;
  prov["provenance"] = ds.provenance;
  prov["n"] = ds.n;
  prov["d"] = ds.d;
  write_json(out / "provenance.json", prov);
  return 0;
}

int cmd_embed(const Config& cfg) {
  const CellParams cell = first_cell(cfg);
  const Dataset ds = stacked(make_dataset(cfg), cell.p);
  ModelHandle model;
  build_model(model, ds, cell.sigma, cell.theta);

  const fs::path out(cfg.out);
  fs::create_directories(out);

  std::vector<double> lambda(static_cast<std::size_t>(ds.n));
  check(cdm_model_eigenvalues(model.h, lambda.data()));
  save_table(out / "eigenvalues.csv",
             make_table({"lambda"}, lambda.data(),
                        static_cast<std::size_t>(ds.n), 1));

  const Embedding e =
      embed_model(model.h, cfg.t, cfg.s, cfg.skip_first_coord);
  save_table(out / "embedding.csv",
             make_table(complex_headers("psi", e.first,
                                        static_cast<std::size_t>(e.s)),
                        e.inter.data(), static_cast<std::size_t>(e.n),
                        static_cast<std::size_t>(2 * e.s)));

  json meta = spectrum_report(model.h);
  meta.update(cell_params_json(cfg, cell));
  meta["n"] = ds.n;
  meta["d"] = ds.d;
  meta["seed"] = cfg.seed;
  meta["provenance"] = ds.provenance;
  if (!cfg.skip_first_coord && cfg.s == ds.n)
    meta["distance_identity_max_abs_err"] =
        distance_identity_error(model.h, e, cfg.t);

  if (cfg.baseline_dm) {
    std::vector<double> dm_lambda;
    const RealEmbedding de = dm_embed(ds, cell.sigma, cfg.t, cfg.s,
                                      cfg.skip_first_coord, &dm_lambda);
    save_table(out / "dm_embedding.csv",
               make_table(real_headers("dm", de.first,
                                       static_cast<std::size_t>(de.s)),
                          de.values.data(), static_cast<std::size_t>(de.n),
                          static_cast<std::size_t>(de.s)));
    save_table(out / "dm_eigenvalues.csv",
               make_table({"lambda"}, dm_lambda.data(),
                          static_cast<std::size_t>(ds.n), 1));
  }
  if (cfg.baseline_pca) {
    std::vector<double> pca(static_cast<std::size_t>(ds.n * cfg.s));
    check(cdm_pca_embed(ds.X.data(), ds.n, ds.d, cfg.s, pca.data()));
    save_table(out / "pca_embedding.csv",
               make_table(real_headers("pc", 1,
                                       static_cast<std::size_t>(cfg.s)),
                          pca.data(), static_cast<std::size_t>(ds.n),
                          static_cast<std::size_t>(cfg.s)));
  }
  write_json(out / "model.json", meta);
  if (!meta["spectrum_in_bounds"].get<bool>()) {
    log_warn("operator spectrum left [0, 1] beyond tolerance");
    return CDM_ERR_NUMERICAL_FAILURE;
  }
  return 0;
}

int cmd_extend(const Config& cfg) {
  const CellParams cell = first_cell(cfg);
  const Dataset train = stacked(make_dataset(cfg), cell.p);
  ModelHandle model;
  build_model(model, train, cell.sigma, cell.theta);

  const NewPoints np = new_points(cfg.extend, train);
  const std::int64_t s_req = cfg.skip_first_coord ? cfg.s + 1 : cfg.s;
  std::vector<double> buf(static_cast<std::size_t>(2 * np.n * s_req));
  check(cdm_model_extend(model.h, np.X.data(), np.n, np.d, cfg.t, s_req,
                         buf.data()));
  if (cfg.skip_first_coord) buf = drop_first_column(buf, np.n, s_req, 2);
  const int first = cfg.skip_first_coord ? 2 : 1;

  const fs::path out(cfg.out);
  fs::create_directories(out);
  save_table(out / "extended.csv",
             make_table(complex_headers("psi", first,
                                        static_cast<std::size_t>(cfg.s)),
                        buf.data(), static_cast<std::size_t>(np.n),
                        static_cast<std::size_t>(2 * cfg.s)));

  json meta = cell_params_json(cfg, cell);
  meta["n_train"] = train.n;
  meta["n_new"] = np.n;
  meta["in_sample"] = np.in_sample;
  if (np.in_sample) {
    const Embedding e =
        embed_model(model.h, cfg.t, cfg.s, cfg.skip_first_coord);
    double dev = 0.0;
    for (std::size_t i = 0; i < buf.size(); ++i)
      dev = std::max(dev, std::abs(buf[i] - e.inter[i]));
    meta["in_sample_max_abs_deviation"] = dev;
  }
  write_json(out / "extend.json", meta);
  return 0;
}

int cmd_reconstruct(const Config& cfg) {
  const CellParams cell = first_cell(cfg);
  const Dataset train = stacked(make_dataset(cfg), cell.p);
  ModelHandle model;
  build_model(model, train, cell.sigma, cell.theta);

  const json& rc = cfg.reconstruct;
  const std::int64_t modes =
      rc.is_object() ? rc.value("modes", std::int64_t{0}) : 0;
  const bool drop_small =
      rc.is_object() ? rc.value("drop_small_modes", false) : false;

  const NewPoints np = new_points(rc, train);
  std::vector<double> rec(static_cast<std::size_t>(np.n * train.d));
  check(cdm_model_reconstruct(model.h, np.X.data(), np.n, np.d, cfg.t, modes,
                              drop_small ? 1 : 0, rec.data()));

  const fs::path out(cfg.out);
  fs::create_directories(out);
  save_table(out / "reconstructed.csv",
             make_table(real_headers("x", 1,
                                     static_cast<std::size_t>(train.d)),
                        rec.data(), static_cast<std::size_t>(np.n),
                        static_cast<std::size_t>(train.d)));

  json meta = cell_params_json(cfg, cell);
  meta["modes"] = modes;
  meta["drop_small_modes"] = drop_small;
  meta["n_new"] = np.n;
  meta["in_sample"] = np.in_sample;
  if (np.in_sample) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < rec.size(); ++i) {
      const double diff = rec[i] - train.X[i];
      num += diff * diff;
      den += train.X[i] * train.X[i];
    }
    meta["relative_frobenius_error"] =
        den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  }
  write_json(out / "reconstruct.json", meta);
  return 0;
}

int cmd_align(const Config& cfg) {
  if (!cfg.align.is_object() || !cfg.align.contains("source"))
    bad_config("align needs align.source (an embedding CSV)");
  const std::string source_path = cfg.align.at("source").get<std::string>();
  const Table source = load_table(source_path);
  const std::size_t s = complex_cols(source, source_path);
  std::string reference_path = source_path;
  Table reference = source;
  if (cfg.align.contains("reference")) {
    reference_path = cfg.align.at("reference").get<std::string>();
    reference = load_table(reference_path);
    complex_cols(reference, reference_path);
  }

  std::vector<double> rotation(2 * s * s);
  double residual = 0.0;
  std::int32_t ambiguous = 0;
  check(cdm_procrustes_align(source.values.data(), reference.values.data(),
                             static_cast<std::int64_t>(source.rows),
                             static_cast<std::int64_t>(s), rotation.data(),
                             &residual, &ambiguous));
  if (ambiguous != 0)
    log_warn("alignment optimum is not unique (rank-deficient covariance)");

  std::vector<double> aligned(2 * source.rows * s);
  for (std::size_t r = 0; r < source.rows; ++r)
    for (std::size_t j = 0; j < s; ++j) {
      double re = 0.0, im = 0.0;
      for (std::size_t c = 0; c < s; ++c) {
        const double ar = source.at(r, 2 * c);
        const double ai = source.at(r, 2 * c + 1);
        const double br = rotation[2 * (c * s + j)];
        const double bi = rotation[2 * (c * s + j) + 1];
        re += ar * br - ai * bi;
        im += ar * bi + ai * br;
      }
      aligned[2 * (r * s + j)] = re;
      aligned[2 * (r * s + j) + 1] = im;
    }

  const fs::path out(cfg.out);
  fs::create_directories(out);
  save_table(out / "rotation.csv",
             make_table(complex_headers("o", 1, s), rotation.data(), s,
                        2 * s));
  save_table(out / "aligned.csv",
             make_table(source.header, aligned.data(), source.rows, 2 * s));
  json meta;
  meta["source"] = source_path;
  meta["reference"] = reference_path;
  meta["n"] = source.rows;
  meta["s"] = s;
  meta["residual"] = residual;
  meta["ambiguous"] = ambiguous != 0;
  write_json(out / "align.json", meta);
  return 0;
}

namespace {

int run_cluster_eval(const Config& cfg, bool with_truth_metrics) {
  const CellParams cell = first_cell(cfg);
  const Dataset ds = stacked(make_dataset(cfg), cell.p);
  ModelHandle model;
  build_model(model, ds, cell.sigma, cell.theta);
  const Embedding e =
      embed_model(model.h, cfg.t, cfg.s, cfg.skip_first_coord);

  const int k = cluster_count(cfg, ds);
  const std::uint64_t kmeans_seed = cdm_derive_seed(cfg.seed, 1000);
  const ClusterOut co =
      run_kmeans(e.inter.data(), e.n, 2 * e.s, k, kmeans_seed);

  const fs::path out(cfg.out);
  fs::create_directories(out);
  save_labels(out / "assignments.csv", co.assignments, "cluster");

  json meta = cell_params_json(cfg, cell);
  meta["n"] = ds.n;
  meta["k"] = k;
  meta["kmeans_seed"] = kmeans_seed;
  meta["inertia"] = co.inertia;
  if (with_truth_metrics) {
    meta.update(
        truth_metrics(e.inter.data(), e.n, 2 * e.s, ds.labels,
                      co.assignments));
    write_json(out / "metrics.json", meta);
  } else {
    write_json(out / "cluster.json", meta);
  }
  return 0;
}

}  // namespace

int cmd_cluster(const Config& cfg) { return run_cluster_eval(cfg, false); }

int cmd_evaluate(const Config& cfg) { return run_cluster_eval(cfg, true); }

int cmd_sweep(const Config& cfg) {
  require_kernel(cfg);
  const Dataset base = make_dataset(cfg);

  std::vector<CellParams> cells;
  for (double sigma : cfg.sigma_grid)
    for (double theta : cfg.theta_grid)
      for (int p : cfg.p_grid)
        cells.push_back({cells.size(), sigma, theta, p});

  const fs::path out(cfg.out);
  fs::create_directories(out / "cells");
  const std::string started = iso_now();

  struct CellScore {
    bool ok = false;
    bool spectrum_ok = false;
    double mean = 0.0;
    double dm_mean = 0.0;
    bool has_dm = false;
    int code = 0;
  };
  std::vector<json> rows(cells.size());
  std::vector<CellScore> scores(cells.size());

  const auto run_cell = [&](std::size_t i) {
    const CellParams& cell = cells[i];
    const auto t0 = std::chrono::steady_clock::now();
    char name[32];
    std::snprintf(name, sizeof name, "cell_%03zu", cell.index);
    const std::string subdir = std::string("cells/") + name;
    json row = cell_params_json(cfg, cell);
    row["index"] = cell.index;
    row["subdir"] = subdir;
    CellScore score;
    try {
      const fs::path dir = out / subdir;
      fs::create_directories(dir);
      const Dataset ds = stacked(base, cell.p);
      ModelHandle model;
      build_model(model, ds, cell.sigma, cell.theta);
      const json spectrum = spectrum_report(model.h);
      const Embedding e =
          embed_model(model.h, cfg.t, cfg.s, cfg.skip_first_coord);
      const int k = cluster_count(cfg, ds);
      const std::uint64_t kmeans_seed =
          cdm_derive_seed(cfg.seed, 1000 + cell.index);
      const ClusterOut co =
          run_kmeans(e.inter.data(), e.n, 2 * e.s, k, kmeans_seed);
      save_labels(dir / "assignments.csv", co.assignments, "cluster");
      row["n"] = ds.n;
      row["k"] = k;
      row["kmeans_seed"] = kmeans_seed;
      row["inertia"] = co.inertia;
      row["hermiticity_error"] = spectrum["hermiticity_error"];
      row["spectrum_in_bounds"] = spectrum["spectrum_in_bounds"];
      row.update(truth_metrics(e.inter.data(), e.n, 2 * e.s, ds.labels,
                               co.assignments));
      if (cfg.baseline_dm) {
        const RealEmbedding de = dm_embed(ds, cell.sigma, cfg.t, cfg.s,
                                          cfg.skip_first_coord, nullptr);
        const std::uint64_t dm_seed =
            cdm_derive_seed(cfg.seed, 5000 + cell.index);
        const ClusterOut dco =
            run_kmeans(de.values.data(), de.n, de.s, k, dm_seed);
        save_labels(dir / "dm_assignments.csv", dco.assignments, "cluster");
        json dm = truth_metrics(de.values.data(), de.n, de.s, ds.labels,
                                dco.assignments);
        dm["kmeans_seed"] = dm_seed;
        score.dm_mean = dm["mean_score"].get<double>();
        score.has_dm = true;
        row["dm"] = std::move(dm);
      }
      row["status"] = "ok";
      write_json(dir / "metrics.json", row);
      score.ok = true;
      score.spectrum_ok = spectrum["spectrum_in_bounds"].get<bool>();
      score.mean = row["mean_score"].get<double>();
    } catch (const CliError& err) {
      row["status"] = "error";
      row["error"] = err.message;
      row["code"] = err.code;
      score.code = err.code;
    } catch (const std::exception& err) {
      row["status"] = "error";
      row["error"] = err.what();
      row["code"] = CDM_ERR_UNKNOWN;
      score.code = CDM_ERR_UNKNOWN;
    }
    const std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - t0;
    row["elapsed_seconds"] = elapsed.count();
    rows[cell.index] = std::move(row);
    scores[cell.index] = score;
    log_info("cell " + std::to_string(cell.index + 1) + "/" +
             std::to_string(cells.size()) + " " +
             (score.ok ? "ok" : "failed"));
  };

  const std::size_t workers = std::min<std::size_t>(
      static_cast<std::size_t>(cfg.threads), cells.size());
  std::atomic<std::size_t> cursor{0};
  const auto worker = [&] {
    for (std::size_t i = cursor.fetch_add(1); i < cells.size();
         i = cursor.fetch_add(1))
      run_cell(i);
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (std::thread& th : pool) th.join();

  const auto better = [&](std::size_t a, std::size_t b, bool dm) {
    const double ma = dm ? scores[a].dm_mean : scores[a].mean;
    const double mb = dm ? scores[b].dm_mean : scores[b].mean;
    if (ma != mb) return ma > mb;
    if (cells[a].sigma != cells[b].sigma) return cells[a].sigma < cells[b].sigma;
    if (cells[a].theta != cells[b].theta) return cells[a].theta > cells[b].theta;
    if (cells[a].p != cells[b].p) return cells[a].p < cells[b].p;
    return a < b;
  };
  const auto pick_best = [&](bool dm) {
    std::size_t best = cells.size();
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!scores[i].ok || (dm && !scores[i].has_dm)) continue;
      if (best == cells.size() || better(i, best, dm)) best = i;
    }
    return best;
  };
  const auto best_json = [&](std::size_t i, bool dm) {
    json b;
    b["index"] = cells[i].index;
    b["sigma"] = cells[i].sigma;
    b["theta"] = cells[i].theta;
    b["p"] = cells[i].p;
    b["mean_score"] = dm ? scores[i].dm_mean : scores[i].mean;
    return b;
  };

  json manifest;
  manifest["config"] = cfg.canonical;
  manifest["config_hash"] = config_hash(cfg.canonical);
  manifest["seed"] = cfg.seed;
  manifest["provenance"] = base.provenance;
  manifest["started_at"] = started;
  manifest["finished_at"] = iso_now();
  manifest["cells"] = rows;
  const std::size_t best = pick_best(false);
  if (best < cells.size()) manifest["best"] = best_json(best, false);
  if (cfg.baseline_dm) {
    const std::size_t best_dm = pick_best(true);
    if (best_dm < cells.size()) manifest["best_dm"] = best_json(best_dm, true);
  }
  write_json(out / "manifest.json", manifest);

  int code = 0;
  std::size_t failed = 0;
  for (const CellScore& s : scores) {
    if (!s.ok) {
      ++failed;
      if (code == 0) code = s.code;
    } else if (!s.spectrum_ok) {
      ++failed;
      if (code == 0) code = CDM_ERR_NUMERICAL_FAILURE;
    }
  }
  if (code != 0)
    std::fprintf(stderr,
                 "error: %zu of %zu sweep cells failed or violated the "
                 "spectral bounds\n",
                 failed, cells.size());
  return code;
}

}  // namespace cli
