// eisfit command line tool. Talks to the library exclusively through the
// C API in eisfit/eisfit.h; everything here is argument handling and
// CSV/JSON formatting.
//
// Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 I/O error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "eisfit/eisfit.h"

namespace {

using nlohmann::json;

struct CliError : std::runtime_error {
  int exit_code;
  CliError(int code, const std::string& what)
      : std::runtime_error(what), exit_code(code) {}
};

int exit_code_of(eisfit_status st) {
  switch (st) {
    case EISFIT_OK:
      return 0;
    case EISFIT_ERR_ARGUMENT:
      return 1;
    case EISFIT_ERR_IO:
      return 3;
    default:
      return 2;
  }
}

void check(eisfit_status st, const std::string& context) {
  if (st != EISFIT_OK) {
    throw CliError(exit_code_of(st), context + ": " + eisfit_last_error());
  }
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fnv_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

// RAII wrappers for the C handles.
template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  explicit Handle(T* p) : ptr(p) {}
  ~Handle() { reset(); }
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  void reset() {
    if (ptr) Free(ptr);
    ptr = nullptr;
  }
  T** out() {
    reset();
    return &ptr;
  }
  T* get() const { return ptr; }
};

using NoiseHandle = Handle<eisfit_noise, eisfit_noise_free>;
using GridHandle = Handle<eisfit_grid, eisfit_grid_free>;
using SpectrumHandle = Handle<eisfit_spectrum, eisfit_spectrum_free>;
using FitHandle = Handle<eisfit_fit_result, eisfit_fit_result_free>;
using CrlbHandle = Handle<eisfit_crlb_report, eisfit_crlb_free>;
using DesignHandle = Handle<eisfit_design_result, eisfit_design_free>;
using McHandle = Handle<eisfit_mc_report, eisfit_mc_free>;

std::string take_string(char* s) {
  std::string out = s ? s : "";
  eisfit_string_free(s);
  return out;
}

// ---- shared option groups ----

struct NoiseOpts {
  std::string file;
  double eps_rho_pct = 1.0;
  double eps_phi_deg = 1.0;

  void attach(CLI::App* app) {
    app->add_option("--noise", file, "Noise model config file");
    app->add_option("--eps-rho-pct", eps_rho_pct,
                    "Relative magnitude error, percent (single contour)")
        ->capture_default_str();
    app->add_option("--eps-phi-deg", eps_phi_deg,
                    "Absolute phase error, degrees")
        ->capture_default_str();
  }
  void make(NoiseHandle& h) const {
    if (!file.empty()) {
      check(eisfit_noise_load(file.c_str(), h.out()), "loading noise model");
    } else {
      check(eisfit_noise_single_region(eps_rho_pct, eps_phi_deg, h.out()),
            "creating noise model");
    }
  }
  std::string describe() const {
    if (!file.empty()) return "file:" + file;
    return "eps_rho_pct=" + fmt17(eps_rho_pct) +
           ",eps_phi_deg=" + fmt17(eps_phi_deg);
  }
};

struct GridOpts {
  double fmin = 1e-2;
  double fmax = 1e4;
  int ppd = 10;

  void attach(CLI::App* app) {
    app->add_option("--fmin", fmin, "Lowest frequency, Hz")
        ->capture_default_str();
    app->add_option("--fmax", fmax, "Highest frequency, Hz")
        ->capture_default_str();
    app->add_option("--ppd", ppd, "Points per decade")->capture_default_str();
  }
  void make(GridHandle& h) const {
    check(eisfit_grid_logspace(fmin, fmax, ppd, h.out()), "building grid");
  }
  std::string describe() const {
    return "fmin=" + fmt17(fmin) + ",fmax=" + fmt17(fmax) +
           ",ppd=" + std::to_string(ppd);
  }
};

struct ThetaOpt {
  std::string file;

  void attach(CLI::App* app, const char* help) {
    app->add_option("--theta", file, help);
  }
  std::vector<double> load() const {
    std::vector<double> theta(EISFIT_NPARAMS);
    if (file.empty()) {
      check(eisfit_default_truth(theta.data()), "default parameters");
      return theta;
    }
    std::ifstream in(file);
    if (!in) throw CliError(3, "cannot open parameter file: " + file);
    json j;
    try {
      in >> j;
    } catch (const std::exception& ex) {
      throw CliError(3, file + ": " + ex.what());
    }
    json arr;
    if (j.is_array()) {
      arr = j;
    } else {
      for (const char* key : {"theta_vector", "theta_hat_vector",
                              "theta0_vector", "theta"}) {
        if (j.contains(key) && j[key].is_array()) {
          arr = j[key];
          break;
        }
      }
    }
    if (!arr.is_array() || arr.size() != EISFIT_NPARAMS) {
      throw CliError(1, file + ": expected an array of 10 parameters");
    }
    for (int i = 0; i < EISFIT_NPARAMS; ++i) theta[i] = arr[i].get<double>();
    return theta;
  }
  std::string describe() const { return file.empty() ? "default" : file; }
};

void json_header(json& j, const std::string& config_hash,
                 std::uint64_t seed) {
  j["tool_version"] = eisfit_version();
  j["config_hash"] = config_hash;
  j["seed"] = seed;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw CliError(3, "cannot write " + path);
  out << text;
  if (!out) throw CliError(3, "write failed: " + path);
}

void write_json(const std::string& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

std::string csv_header(const std::string& config_hash, std::uint64_t seed) {
  std::ostringstream os;
  os << "# tool_version: " << eisfit_version() << "\n";
  os << "# config_hash: " << config_hash << "\n";
  os << "# seed: " << seed << "\n";
  return os.str();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw CliError(3, "cannot create directory " + dir);
}

int coords_enum(const std::string& s) {
  if (s == "polar") return EISFIT_COORDS_POLAR;
  if (s == "cartesian") return EISFIT_COORDS_CARTESIAN;
  throw CliError(1, "coords must be polar or cartesian");
}

std::vector<double> spectrum_freqs(const eisfit_spectrum* sp) {
  std::vector<double> f(eisfit_spectrum_size(sp));
  for (int i = 0; i < static_cast<int>(f.size()); ++i) {
    check(eisfit_spectrum_get(sp, i, &f[i], nullptr, nullptr, nullptr, nullptr,
                              nullptr, nullptr),
          "reading spectrum");
  }
  return f;
}

// ---- subcommand configs ----

struct SimulateCmd {
  GridOpts grid;
  NoiseOpts noise;
  ThetaOpt theta;
  std::uint64_t seed = 42;
  bool no_noise = false;
  std::string out = "spectrum.csv";
};

int run_simulate(const SimulateCmd& c) {
  NoiseHandle noise;
  c.noise.make(noise);
  GridHandle grid;
  c.grid.make(grid);
  const auto theta = c.theta.load();
  const std::string hash =
      fnv_hash("simulate;" + c.grid.describe() + ";" + c.noise.describe() +
               ";theta=" + c.theta.describe() + ";seed=" +
               std::to_string(c.seed) + ";noise_on=" +
               (c.no_noise ? "0" : "1"));
  SpectrumHandle sp;
  check(eisfit_spectrum_simulate(theta.data(), grid.get(), noise.get(), c.seed,
                                 c.no_noise ? 0 : 1, sp.out()),
        "simulating spectrum");
  check(eisfit_spectrum_save_csv(sp.get(), c.out.c_str(), hash.c_str()),
        "writing spectrum");
  std::cout << "wrote " << eisfit_spectrum_size(sp.get()) << " points to "
            << c.out << "\n";
  return 0;
}

struct InitCmd {
  std::string spectrum;
  NoiseOpts noise;
  std::string out;
};

int run_init(const InitCmd& c) {
  SpectrumHandle sp;
  check(eisfit_spectrum_load_csv(c.spectrum.c_str(), sp.out()),
        "loading spectrum");
  NoiseHandle noise;
  c.noise.make(noise);
  std::vector<double> theta0(EISFIT_NPARAMS);
  char* diag = nullptr;
  check(eisfit_initialize(sp.get(), noise.get(), theta0.data(), &diag),
        "initializing parameters");
  json j = json::parse(take_string(diag));
  json_header(j, fnv_hash("init;" + c.spectrum + ";" + c.noise.describe()), 0);
  if (c.out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_json(c.out, j);
    std::cout << "wrote " << c.out << "\n";
  }
  return 0;
}

struct FitCmd {
  std::string spectrum;
  std::string coords = "polar";
  std::string init = "auto";
  NoiseOpts noise;
  std::string out;
};

int run_fit(const FitCmd& c) {
  SpectrumHandle sp;
  check(eisfit_spectrum_load_csv(c.spectrum.c_str(), sp.out()),
        "loading spectrum");
  std::vector<double> theta0(EISFIT_NPARAMS);
  if (c.init == "auto") {
    NoiseHandle noise;
    c.noise.make(noise);
    check(eisfit_initialize(sp.get(), noise.get(), theta0.data(), nullptr),
          "initializing parameters");
  } else {
    ThetaOpt t;
    t.file = c.init;
    theta0 = t.load();
  }
  eisfit_fit_config cfg;
  eisfit_fit_config_default(&cfg);
  cfg.coordinates = coords_enum(c.coords);
  FitHandle fit;
  check(eisfit_fit(sp.get(), theta0.data(), &cfg, fit.out()), "fitting");
  char* js = nullptr;
  check(eisfit_fit_result_json(fit.get(), &js), "serializing fit result");
  json j = json::parse(take_string(js));
  json_header(j,
              fnv_hash("fit;" + c.spectrum + ";" + c.coords + ";" + c.init),
              0);
  if (c.out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_json(c.out, j);
    std::cout << "wrote " << c.out << "\n";
  }
  if (!eisfit_fit_result_converged(fit.get())) {
    std::cerr << "fit did not converge\n";
    return 2;
  }
  return 0;
}

struct CrlbCmd {
  ThetaOpt theta;
  std::string grid_csv;
  GridOpts grid;
  std::string coords = "polar";
  NoiseOpts noise;
  std::string out;
};

int run_crlb(const CrlbCmd& c) {
  NoiseHandle noise;
  c.noise.make(noise);
  GridHandle grid;
  if (!c.grid_csv.empty()) {
    SpectrumHandle sp;
    check(eisfit_spectrum_load_csv(c.grid_csv.c_str(), sp.out()),
          "loading grid csv");
    const auto freqs = spectrum_freqs(sp.get());
    const auto [lo, hi] = std::minmax_element(freqs.begin(), freqs.end());
    check(eisfit_grid_from_freqs(freqs.data(),
                                 static_cast<int>(freqs.size()), *lo, *hi,
                                 grid.out()),
          "building grid");
  } else {
    c.grid.make(grid);
  }
  const auto theta = c.theta.load();
  CrlbHandle rep;
  check(eisfit_crlb(theta.data(), grid.get(), noise.get(),
                    coords_enum(c.coords), rep.out()),
        "computing CRLB");
  char* js = nullptr;
  check(eisfit_crlb_json(rep.get(), &js), "serializing report");
  json j = json::parse(take_string(js));
  json_header(j,
              fnv_hash("crlb;" + c.theta.describe() + ";" + c.coords + ";" +
                       (c.grid_csv.empty() ? c.grid.describe() : c.grid_csv) +
                       ";" + c.noise.describe()),
              0);
  if (c.out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_json(c.out, j);
    std::cout << "wrote " << c.out << "\n";
  }
  return 0;
}

struct ContribCmd {
  ThetaOpt theta;
  GridOpts grid;
  std::string coords = "polar";
  NoiseOpts noise;
  std::string out = "contrib_curves.csv";
};

int run_contrib(const ContribCmd& c) {
  NoiseHandle noise;
  c.noise.make(noise);
  GridHandle grid;
  c.grid.make(grid);
  const auto theta = c.theta.load();
  const int n = eisfit_grid_size(grid.get());
  std::vector<double> freqs(n);
  check(eisfit_grid_get_freqs(grid.get(), freqs.data()), "reading grid");

  std::vector<std::array<double, EISFIT_NPARAMS>> diag(n);
  std::array<double, EISFIT_NPARAMS> peak{};
  for (int i = 0; i < n; ++i) {
    double m[EISFIT_NPARAMS * EISFIT_NPARAMS];
    check(eisfit_fim_contribution(theta.data(), freqs[i], noise.get(),
                                  coords_enum(c.coords), m),
          "computing contribution");
    for (int k = 0; k < EISFIT_NPARAMS; ++k) {
      diag[i][k] = m[k * EISFIT_NPARAMS + k];
      peak[k] = std::max(peak[k], diag[i][k]);
    }
  }
  std::ostringstream os;
  os << csv_header(fnv_hash("contrib;" + c.theta.describe() + ";" +
                            c.grid.describe() + ";" + c.coords),
                   0);
  os << "freq_hz";
  for (int k = 0; k < EISFIT_NPARAMS; ++k) os << "," << eisfit_param_name(k);
  os << "\n";
  for (int i = 0; i < n; ++i) {
    os << fmt17(freqs[i]);
    for (int k = 0; k < EISFIT_NPARAMS; ++k) {
      os << "," << fmt17(peak[k] > 0 ? diag[i][k] / peak[k] : 0.0);
    }
    os << "\n";
  }
  write_text(c.out, os.str());
  std::cout << "wrote " << c.out << "\n";
  return 0;
}

struct DesignCmd {
  ThetaOpt theta;
  NoiseOpts noise;
  double fmin = 1e-2;
  double fmax = 1e4;
  int n_points = 61;
  double mu = 100.0;
  std::string coords = "polar";
  std::uint64_t seed = 42;
  std::string out = "design_out";
};

int run_design_cmd(const DesignCmd& c) {
  NoiseHandle noise;
  c.noise.make(noise);
  const auto theta = c.theta.load();
  eisfit_design_config cfg;
  eisfit_design_config_default(&cfg);
  cfg.f_min_hz = c.fmin;
  cfg.f_max_hz = c.fmax;
  cfg.n_points = c.n_points;
  cfg.mu = c.mu;
  cfg.coordinates = coords_enum(c.coords);
  cfg.seed = c.seed;

  const std::string hash = fnv_hash(
      "design;fmin=" + fmt17(c.fmin) + ";fmax=" + fmt17(c.fmax) + ";n=" +
      std::to_string(c.n_points) + ";mu=" + fmt17(c.mu) + ";" + c.coords +
      ";seed=" + std::to_string(c.seed) + ";" + c.noise.describe() +
      ";theta=" + c.theta.describe());

  DesignHandle res;
  check(eisfit_design_run(theta.data(), noise.get(), &cfg, res.out()),
        "running frequency design");

  ensure_dir(c.out);
  const int rows = eisfit_design_iterations(res.get());

  double vol0_true = 1.0, vol0_est = 1.0;
  {
    int idx;
    double fo, fn, lb, la;
    check(eisfit_design_history_row(res.get(), 0, &idx, &fo, &fn, &lb, &la,
                                    &vol0_true, &vol0_est),
          "reading history");
  }

  std::ostringstream hist;
  hist << csv_header(hash, c.seed);
  hist << "k,adjusted_index,freq_old_hz,freq_new_hz,lambda_before,"
          "lambda_after,volume_true,volume_est,volume_true_norm,"
          "volume_est_norm\n";
  std::ostringstream crlbcsv;
  crlbcsv << csv_header(hash, c.seed);
  crlbcsv << "k";
  for (int k = 0; k < EISFIT_NPARAMS; ++k) {
    crlbcsv << ",crlb_true_" << eisfit_param_name(k);
  }
  for (int k = 0; k < EISFIT_NPARAMS; ++k) {
    crlbcsv << ",crlb_est_" << eisfit_param_name(k);
  }
  crlbcsv << "\n";
  std::ostringstream gridcsv;
  gridcsv << csv_header(hash, c.seed);
  gridcsv << "k";
  for (int i = 0; i < c.n_points; ++i) gridcsv << ",f" << i << "_hz";
  gridcsv << "\n";

  std::vector<double> gridrow(c.n_points);
  for (int k = 0; k < rows; ++k) {
    int idx;
    double fo, fn, lb, la, vt, ve;
    check(eisfit_design_history_row(res.get(), k, &idx, &fo, &fn, &lb, &la,
                                    &vt, &ve),
          "reading history");
    hist << k << "," << idx << "," << fmt17(fo) << "," << fmt17(fn) << ","
         << fmt17(lb) << "," << fmt17(la) << "," << fmt17(vt) << ","
         << fmt17(ve) << "," << fmt17(vt / vol0_true) << ","
         << fmt17(ve / vol0_est) << "\n";

    double ct[EISFIT_NPARAMS], ce[EISFIT_NPARAMS];
    check(eisfit_design_crlb_row(res.get(), k, ct, ce), "reading crlb row");
    crlbcsv << k;
    for (int i = 0; i < EISFIT_NPARAMS; ++i) crlbcsv << "," << fmt17(ct[i]);
    for (int i = 0; i < EISFIT_NPARAMS; ++i) crlbcsv << "," << fmt17(ce[i]);
    crlbcsv << "\n";

    check(eisfit_design_grid_row(res.get(), k, gridrow.data()),
          "reading grid row");
    gridcsv << k;
    for (double f : gridrow) gridcsv << "," << fmt17(f);
    gridcsv << "\n";
  }
  write_text(c.out + "/history.csv", hist.str());
  write_text(c.out + "/crlb_trajectory.csv", crlbcsv.str());
  write_text(c.out + "/grid_trajectory.csv", gridcsv.str());

  GridHandle final_grid;
  check(eisfit_design_final_grid(res.get(), final_grid.out()), "final grid");
  std::vector<double> ff(eisfit_grid_size(final_grid.get()));
  check(eisfit_grid_get_freqs(final_grid.get(), ff.data()), "final grid");
  std::ostringstream fg;
  fg << csv_header(hash, c.seed) << "freq_hz\n";
  for (double f : ff) fg << fmt17(f) << "\n";
  write_text(c.out + "/final_grid.csv", fg.str());

  char* js = nullptr;
  check(eisfit_design_final_fit_json(res.get(), &js), "final fit");
  json jfit = json::parse(take_string(js));
  json_header(jfit, hash, c.seed);
  write_json(c.out + "/final_fit.json", jfit);

  json jcfg;
  json_header(jcfg, hash, c.seed);
  jcfg["f_min_hz"] = c.fmin;
  jcfg["f_max_hz"] = c.fmax;
  jcfg["n_points"] = c.n_points;
  jcfg["mu"] = c.mu;
  jcfg["coordinates"] = c.coords;
  jcfg["noise"] = {{"file", c.noise.file},
                   {"eps_rho_pct", c.noise.eps_rho_pct},
                   {"eps_phi_deg", c.noise.eps_phi_deg}};
  jcfg["theta_true"] = theta;
  write_json(c.out + "/config.json", jcfg);

  std::cout << "wrote design outputs to " << c.out << " (volume ratio "
            << fmt17(rows ? [&] {
                 int idx;
                 double fo, fn, lb, la, vt, ve;
                 eisfit_design_history_row(res.get(), rows - 1, &idx, &fo,
                                           &fn, &lb, &la, &vt, &ve);
                 return vt / vol0_true;
               }()
                          : 1.0)
            << ")\n";
  return 0;
}

struct McCmd {
  ThetaOpt theta;
  NoiseOpts noise;
  GridOpts grid;
  int runs = 1000;
  std::uint64_t seed = 42;
  std::string coords = "polar";
  bool single_coords = false;
  int threads = 0;
  std::string out = "montecarlo_out";
};

int run_montecarlo_cmd(const McCmd& c) {
  NoiseHandle noise;
  c.noise.make(noise);
  const auto theta = c.theta.load();
  eisfit_mc_config cfg;
  eisfit_mc_config_default(&cfg);
  cfg.f_min_hz = c.grid.fmin;
  cfg.f_max_hz = c.grid.fmax;
  cfg.points_per_decade = c.grid.ppd;
  cfg.runs = c.runs;
  cfg.seed = c.seed;
  cfg.coordinates = coords_enum(c.coords);
  cfg.fit_both_coords = c.single_coords ? 0 : 1;
  cfg.threads = c.threads;

  const std::string hash = fnv_hash(
      "montecarlo;" + c.grid.describe() + ";" + c.noise.describe() +
      ";runs=" + std::to_string(c.runs) + ";seed=" + std::to_string(c.seed) +
      ";" + c.coords + ";both=" + (c.single_coords ? "0" : "1") +
      ";theta=" + c.theta.describe());

  McHandle rep;
  check(eisfit_montecarlo(theta.data(), noise.get(), &cfg, rep.out()),
        "running Monte-Carlo");

  ensure_dir(c.out);
  char* js = nullptr;
  check(eisfit_mc_json(rep.get(), &js), "serializing report");
  json j = json::parse(take_string(js));
  json_header(j, hash, c.seed);
  write_json(c.out + "/report.json", j);

  std::ostringstream runs;
  runs << csv_header(hash, c.seed);
  runs << "run,ok";
  for (const char* tag : {"theta0", "theta_polar", "theta_cart"}) {
    for (int i = 0; i < EISFIT_NPARAMS; ++i) {
      runs << "," << tag << "_" << eisfit_param_name(i);
    }
  }
  runs << "\n";
  const int nr = eisfit_mc_runs(rep.get());
  for (int r = 0; r < nr; ++r) {
    int ok;
    double t0[EISFIT_NPARAMS], tp[EISFIT_NPARAMS], tc[EISFIT_NPARAMS];
    check(eisfit_mc_run_thetas(rep.get(), r, &ok, t0, tp, tc), "run record");
    runs << r << "," << ok;
    for (double* arr : {t0, tp, tc}) {
      for (int i = 0; i < EISFIT_NPARAMS; ++i) runs << "," << fmt17(arr[i]);
    }
    runs << "\n";
  }
  write_text(c.out + "/runs.csv", runs.str());

  json jcfg;
  json_header(jcfg, hash, c.seed);
  jcfg["f_min_hz"] = c.grid.fmin;
  jcfg["f_max_hz"] = c.grid.fmax;
  jcfg["points_per_decade"] = c.grid.ppd;
  jcfg["runs"] = c.runs;
  jcfg["coordinates"] = c.coords;
  jcfg["fit_both_coords"] = !c.single_coords;
  jcfg["noise"] = {{"file", c.noise.file},
                   {"eps_rho_pct", c.noise.eps_rho_pct},
                   {"eps_phi_deg", c.noise.eps_phi_deg}};
  jcfg["theta_true"] = theta;
  write_json(c.out + "/config.json", jcfg);

  const int failures = eisfit_mc_failures(rep.get());
  std::cout << "wrote Monte-Carlo outputs to " << c.out << " (" << failures
            << "/" << nr << " failures)\n";
  if (failures * 100 > nr) {
    std::cerr << "more than 1% of runs failed\n";
    return 2;
  }
  return 0;
}

struct FiguresCmd {
  std::string montecarlo_dir;
  std::string design_dir;
  std::string out = "figures_out";
};

struct Envelope {
  std::vector<double> min, max, sum;
  int count = 0;
  void init(int n) {
    min.assign(n, HUGE_VAL);
    max.assign(n, -HUGE_VAL);
    sum.assign(n, 0.0);
    count = 0;
  }
  void add(const std::vector<double>& v) {
    for (size_t i = 0; i < v.size(); ++i) {
      min[i] = std::min(min[i], v[i]);
      max[i] = std::max(max[i], v[i]);
      sum[i] += v[i];
    }
    ++count;
  }
  double mean(int i) const { return sum[i] / std::max(count, 1); }
};

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError(3, "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& ex) {
    throw CliError(3, path + ": " + ex.what());
  }
  return j;
}

int run_figures(const FiguresCmd& c) {
  if (c.montecarlo_dir.empty() && c.design_dir.empty()) {
    throw CliError(1, "figures needs --montecarlo and/or --design");
  }
  ensure_dir(c.out);

  if (!c.montecarlo_dir.empty()) {
    const json cfg = load_json(c.montecarlo_dir + "/config.json");
    const std::string hash = cfg.value("config_hash", std::string{});
    const std::uint64_t seed = cfg.value("seed", std::uint64_t{0});
    std::vector<double> truth =
        cfg.at("theta_true").get<std::vector<double>>();
    GridHandle grid;
    check(eisfit_grid_logspace(cfg.at("f_min_hz").get<double>(),
                               cfg.at("f_max_hz").get<double>(),
                               cfg.at("points_per_decade").get<int>(),
                               grid.out()),
          "building grid");
    const int n = eisfit_grid_size(grid.get());
    std::vector<double> freqs(n);
    check(eisfit_grid_get_freqs(grid.get(), freqs.data()), "grid freqs");

    std::vector<double> true_re(n), true_im(n);
    check(eisfit_model_eval(truth.data(), freqs.data(), n, true_re.data(),
                            true_im.data()),
          "model eval");

    // Per-run magnitude/phase envelopes for the initial and fitted
    // parameters, plus reconstruction-error envelopes for the fit.
    Envelope mag_init, mag_fit, ph_init, ph_fit;
    Envelope err_re, err_im, err_rho, err_phi;
    for (Envelope* e :
         {&mag_init, &mag_fit, &ph_init, &ph_fit, &err_re, &err_im, &err_rho,
          &err_phi}) {
      e->init(n);
    }

    std::ifstream runs(c.montecarlo_dir + "/runs.csv");
    if (!runs) throw CliError(3, "cannot open runs.csv");
    std::string line;
    while (std::getline(runs, line)) {
      if (line.empty() || line[0] == '#' || line.rfind("run,", 0) == 0) {
        continue;
      }
      std::istringstream ls(line);
      std::string cell;
      std::vector<double> cells;
      while (std::getline(ls, cell, ',')) {
        cells.push_back(std::strtod(cell.c_str(), nullptr));
      }
      if (cells.size() < 2 + 3 * EISFIT_NPARAMS || cells[1] == 0) continue;
      const double* t0 = &cells[2];
      const double* tfit = &cells[2 + EISFIT_NPARAMS];

      std::vector<double> re(n), im(n), v(n);
      check(eisfit_model_eval(t0, freqs.data(), n, re.data(), im.data()),
            "model eval");
      for (int i = 0; i < n; ++i) v[i] = std::hypot(re[i], im[i]);
      mag_init.add(v);
      for (int i = 0; i < n; ++i) v[i] = std::atan2(im[i], re[i]);
      ph_init.add(v);

      check(eisfit_model_eval(tfit, freqs.data(), n, re.data(), im.data()),
            "model eval");
      for (int i = 0; i < n; ++i) v[i] = std::hypot(re[i], im[i]);
      mag_fit.add(v);
      std::vector<double> mag_f = v;
      for (int i = 0; i < n; ++i) v[i] = std::atan2(im[i], re[i]);
      ph_fit.add(v);
      std::vector<double> ph_f = v;

      for (int i = 0; i < n; ++i) v[i] = (re[i] - true_re[i]) / true_re[i];
      err_re.add(v);
      for (int i = 0; i < n; ++i) v[i] = (im[i] - true_im[i]) / true_im[i];
      err_im.add(v);
      for (int i = 0; i < n; ++i) {
        v[i] = (mag_f[i] - std::hypot(true_re[i], true_im[i])) /
               std::hypot(true_re[i], true_im[i]);
      }
      err_rho.add(v);
      for (int i = 0; i < n; ++i) {
        v[i] = ph_f[i] - std::atan2(true_im[i], true_re[i]);
      }
      err_phi.add(v);
    }
    if (mag_init.count == 0) throw CliError(2, "no usable runs in runs.csv");

    std::ostringstream bode;
    bode << csv_header(hash, seed);
    bode << "freq_hz,true_mag,true_phase"
            ",init_mag_min,init_mag_mean,init_mag_max"
            ",init_phase_min,init_phase_mean,init_phase_max"
            ",fit_mag_min,fit_mag_mean,fit_mag_max"
            ",fit_phase_min,fit_phase_mean,fit_phase_max\n";
    for (int i = 0; i < n; ++i) {
      bode << fmt17(freqs[i]) << ","
           << fmt17(std::hypot(true_re[i], true_im[i])) << ","
           << fmt17(std::atan2(true_im[i], true_re[i]));
      for (const Envelope* e : {&mag_init, &ph_init, &mag_fit, &ph_fit}) {
        bode << "," << fmt17(e->min[i]) << "," << fmt17(e->mean(i)) << ","
             << fmt17(e->max[i]);
      }
      bode << "\n";
    }
    write_text(c.out + "/fig_bode_envelopes.csv", bode.str());

    std::ostringstream errs;
    errs << csv_header(hash, seed);
    errs << "freq_hz";
    for (const char* tag : {"re_rel", "im_rel", "rho_rel", "phi_abs"}) {
      errs << "," << tag << "_min," << tag << "_mean," << tag << "_max";
    }
    errs << "\n";
    for (int i = 0; i < n; ++i) {
      errs << fmt17(freqs[i]);
      for (const Envelope* e : {&err_re, &err_im, &err_rho, &err_phi}) {
        errs << "," << fmt17(e->min[i]) << "," << fmt17(e->mean(i)) << ","
             << fmt17(e->max[i]);
      }
      errs << "\n";
    }
    write_text(c.out + "/fig_fit_errors.csv", errs.str());

    // Normalized diagonal FIM contribution curves.
    NoiseHandle noise;
    const json jn = cfg.at("noise");
    const std::string nf = jn.value("file", std::string{});
    if (!nf.empty()) {
      check(eisfit_noise_load(nf.c_str(), noise.out()), "noise model");
    } else {
      check(eisfit_noise_single_region(jn.at("eps_rho_pct").get<double>(),
                                       jn.at("eps_phi_deg").get<double>(),
                                       noise.out()),
            "noise model");
    }
    std::vector<std::array<double, EISFIT_NPARAMS>> diag(n);
    std::array<double, EISFIT_NPARAMS> peak{};
    for (int i = 0; i < n; ++i) {
      double m[EISFIT_NPARAMS * EISFIT_NPARAMS];
      check(eisfit_fim_contribution(truth.data(), freqs[i], noise.get(),
                                    EISFIT_COORDS_POLAR, m),
            "contribution");
      for (int k = 0; k < EISFIT_NPARAMS; ++k) {
        diag[i][k] = m[k * EISFIT_NPARAMS + k];
        peak[k] = std::max(peak[k], diag[i][k]);
      }
    }
    std::ostringstream contrib;
    contrib << csv_header(hash, seed);
    contrib << "freq_hz";
    for (int k = 0; k < EISFIT_NPARAMS; ++k) {
      contrib << "," << eisfit_param_name(k);
    }
    contrib << "\n";
    for (int i = 0; i < n; ++i) {
      contrib << fmt17(freqs[i]);
      for (int k = 0; k < EISFIT_NPARAMS; ++k) {
        contrib << "," << fmt17(peak[k] > 0 ? diag[i][k] / peak[k] : 0.0);
      }
      contrib << "\n";
    }
    write_text(c.out + "/fig_contributions.csv", contrib.str());
  }

  if (!c.design_dir.empty()) {
    // Volume trajectory and adjustment data come straight from the design
    // outputs; re-emitted under figure-oriented names.
    std::ifstream hist(c.design_dir + "/history.csv");
    if (!hist) throw CliError(3, "cannot open design history.csv");
    std::ostringstream vol;
    std::ostringstream adj;
    std::string line;
    bool header_done = false;
    while (std::getline(hist, line)) {
      if (line.empty()) continue;
      if (line[0] == '#') {
        vol << line << "\n";
        adj << line << "\n";
        continue;
      }
      if (!header_done) {
        vol << "k,volume_true_norm,volume_est_norm\n";
        adj << line << "\n";
        header_done = true;
        continue;
      }
      std::istringstream ls(line);
      std::string cell;
      std::vector<std::string> cells;
      while (std::getline(ls, cell, ',')) cells.push_back(cell);
      if (cells.size() >= 10) {
        vol << cells[0] << "," << cells[8] << "," << cells[9] << "\n";
      }
      adj << line << "\n";
    }
    write_text(c.out + "/fig_volume.csv", vol.str());
    write_text(c.out + "/fig_adjustments.csv", adj.str());
  }
  std::cout << "wrote figure CSVs to " << c.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EIS spectrum simulation, ECM identification, CRLB analysis "
               "and E-optimal frequency design"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a config file");

  SimulateCmd sim;
  auto* c_sim = app.add_subcommand("simulate", "Generate a synthetic spectrum");
  sim.grid.attach(c_sim);
  sim.noise.attach(c_sim);
  sim.theta.attach(c_sim, "Ground-truth parameter JSON (default: demo cell)");
  c_sim->add_option("--seed", sim.seed, "RNG seed")->capture_default_str();
  c_sim->add_flag("--no-noise", sim.no_noise, "Disable noise injection");
  c_sim->add_option("--out", sim.out, "Output CSV path")
      ->capture_default_str();

  InitCmd ini;
  auto* c_init = app.add_subcommand("init", "Geometric parameter initial guess");
  c_init->add_option("--spectrum", ini.spectrum, "Spectrum CSV")->required();
  ini.noise.attach(c_init);
  c_init->add_option("--out", ini.out, "Output JSON path (default stdout)");

  FitCmd fitc;
  auto* c_fit = app.add_subcommand("fit", "Weighted CNLS parameter fit");
  c_fit->add_option("--spectrum", fitc.spectrum, "Spectrum CSV")->required();
  c_fit->add_option("--coords", fitc.coords, "polar|cartesian")
      ->capture_default_str();
  c_fit->add_option("--init", fitc.init, "auto or a parameter JSON file")
      ->capture_default_str();
  fitc.noise.attach(c_fit);
  c_fit->add_option("--out", fitc.out, "Output JSON path (default stdout)");

  CrlbCmd crlbc;
  auto* c_crlb = app.add_subcommand("crlb", "Fisher information and CRLB");
  crlbc.theta.attach(c_crlb, "Parameter JSON (default: demo cell)");
  c_crlb->add_option("--grid", crlbc.grid_csv,
                     "CSV with a freq_hz column (default: log grid)");
  crlbc.grid.attach(c_crlb);
  c_crlb->add_option("--coords", crlbc.coords, "polar|cartesian")
      ->capture_default_str();
  crlbc.noise.attach(c_crlb);
  c_crlb->add_option("--out", crlbc.out, "Output JSON path (default stdout)");

  ContribCmd contribc;
  auto* c_contrib = app.add_subcommand(
      "contrib-curves", "Normalized per-frequency FIM contributions");
  contribc.theta.attach(c_contrib, "Parameter JSON (default: demo cell)");
  contribc.grid.attach(c_contrib);
  c_contrib->add_option("--coords", contribc.coords, "polar|cartesian")
      ->capture_default_str();
  contribc.noise.attach(c_contrib);
  c_contrib->add_option("--out", contribc.out, "Output CSV path")
      ->capture_default_str();

  DesignCmd designc;
  auto* c_design =
      app.add_subcommand("design", "E-optimal frequency grid adjustment");
  designc.theta.attach(c_design, "Ground-truth parameter JSON");
  designc.noise.attach(c_design);
  c_design->add_option("--fmin", designc.fmin, "Lowest frequency, Hz")
      ->capture_default_str();
  c_design->add_option("--fmax", designc.fmax, "Highest frequency, Hz")
      ->capture_default_str();
  c_design->add_option("--n", designc.n_points, "Number of grid points")
      ->capture_default_str();
  c_design->add_option("--mu", designc.mu, "Perturbation divisor")
      ->capture_default_str();
  c_design->add_option("--coords", designc.coords, "polar|cartesian")
      ->capture_default_str();
  c_design->add_option("--seed", designc.seed, "RNG seed")
      ->capture_default_str();
  c_design->add_option("--out", designc.out, "Output directory")
      ->capture_default_str();

  McCmd mcc;
  auto* c_mc =
      app.add_subcommand("montecarlo", "Monte-Carlo estimator validation");
  mcc.theta.attach(c_mc, "Ground-truth parameter JSON");
  mcc.noise.attach(c_mc);
  mcc.grid.attach(c_mc);
  c_mc->add_option("--runs", mcc.runs, "Number of runs")->capture_default_str();
  c_mc->add_option("--seed", mcc.seed, "Base RNG seed")->capture_default_str();
  c_mc->add_option("--coords", mcc.coords, "Report coordinates")
      ->capture_default_str();
  c_mc->add_flag("--single-coords", mcc.single_coords,
                 "Fit only the report coordinates (skip the cross-check fit)");
  c_mc->add_option("--threads", mcc.threads, "Worker threads (0 = auto)")
      ->capture_default_str();
  c_mc->add_option("--out", mcc.out, "Output directory")
      ->capture_default_str();

  FiguresCmd figc;
  auto* c_fig = app.add_subcommand(
      "figures", "Figure-ready CSV bundles from montecarlo/design outputs");
  c_fig->add_option("--montecarlo", figc.montecarlo_dir,
                    "montecarlo output directory");
  c_fig->add_option("--design", figc.design_dir, "design output directory");
  c_fig->add_option("--out", figc.out, "Output directory")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*c_sim) return run_simulate(sim);
    if (*c_init) return run_init(ini);
    if (*c_fit) return run_fit(fitc);
    if (*c_crlb) return run_crlb(crlbc);
    if (*c_contrib) return run_contrib(contribc);
    if (*c_design) return run_design_cmd(designc);
    if (*c_mc) return run_montecarlo_cmd(mcc);
    if (*c_fig) return run_figures(figc);
  } catch (const CliError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return ex.exit_code;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 1;
}
