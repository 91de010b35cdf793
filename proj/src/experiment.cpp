#include "qtraj/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

namespace qtraj {

namespace io {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (std::size_t i = 0; i < header.size(); ++i)
    out << header[i] << (i + 1 < header.size() ? "," : "\n");
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << format_double(row[i]) << (i + 1 < row.size() ? "," : "\n");
  }
}

}  // namespace io

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

namespace {

using nlohmann::json;

const json& require_key(const json& j, const std::string& section, const std::string& key) {
  if (!j.contains(key))
    throw ConfigError("config missing key '" + (section.empty() ? key : section + "." + key) + "'");
  return j.at(key);
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

StepScheme scheme_from_string(const std::string& s) {
  if (s == "milstein") return StepScheme::Milstein;
  if (s == "euler") return StepScheme::EulerMaruyama;
  if (s == "kraus") return StepScheme::MeasurementOperator;
  throw ConfigError("integration.scheme must be one of milstein, euler, kraus");
}

std::string scheme_to_string(StepScheme s) {
  switch (s) {
    case StepScheme::Milstein: return "milstein";
    case StepScheme::EulerMaruyama: return "euler";
    case StepScheme::MeasurementOperator: return "kraus";
  }
  return "kraus";
}

}  // namespace

ProbeConfig ExperimentConfig::probe() const {
  ProbeConfig p;
  p.observable = site_projector(lattice, probe_sites);
  p.strength = probe_strength;
  p.efficiency = probe_efficiency;
  return p;
}

Mat ExperimentConfig::initial_state() const {
  switch (initial_kind) {
    case InitialKind::Eigenstate:
      return eigenstate_density(analytic_eigensystem(lattice), initial_index);
    case InitialKind::Site:
      return pure_state_on_site(lattice, initial_index);
    case InitialKind::Thermal:
      return thermal_state(build_hamiltonian(lattice), initial_beta);
  }
  throw ConfigError("unknown initial state kind");
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  const json& lat = require_key(j, "", "lattice");
  cfg.lattice.n_sites = require_key(lat, "lattice", "n_sites").get<int>();
  cfg.lattice.coupling = require_key(lat, "lattice", "coupling").get<double>();

  const json& probe = require_key(j, "", "probe");
  cfg.probe_sites = require_key(probe, "probe", "sites").get<std::vector<int>>();
  cfg.probe_strength = require_key(probe, "probe", "strength").get<double>();
  cfg.probe_efficiency = get_or(probe, "efficiency", 1.0);

  const json& init = require_key(j, "", "initial_state");
  const std::string kind = require_key(init, "initial_state", "kind").get<std::string>();
  if (kind == "eigenstate") {
    cfg.initial_kind = ExperimentConfig::InitialKind::Eigenstate;
    cfg.initial_index = require_key(init, "initial_state", "k").get<int>();
  } else if (kind == "site") {
    cfg.initial_kind = ExperimentConfig::InitialKind::Site;
    cfg.initial_index = require_key(init, "initial_state", "n").get<int>();
  } else if (kind == "thermal") {
    cfg.initial_kind = ExperimentConfig::InitialKind::Thermal;
    cfg.initial_beta = require_key(init, "initial_state", "beta").get<double>();
  } else {
    throw ConfigError("initial_state.kind must be eigenstate, site or thermal");
  }

  const json& integ = require_key(j, "", "integration");
  cfg.integration.dt = get_or(integ, "dt", 0.0);
  cfg.integration.t_final = require_key(integ, "integration", "t_final").get<double>();
  cfg.integration.seed = get_or<std::uint64_t>(integ, "seed", 0);
  cfg.integration.renormalize_every_step = get_or(integ, "renormalize_every_step", true);
  cfg.integration.allow_large_dt = get_or(integ, "allow_large_dt", false);
  cfg.integration.sample_every = get_or(integ, "sample_every", 0);
  cfg.integration.scheme = scheme_from_string(get_or<std::string>(integ, "scheme", "kraus"));

  if (j.contains("ensemble")) cfg.n_traj = get_or(j.at("ensemble"), "n_traj", 1);

  if (j.contains("analysis")) {
    const json& an = j.at("analysis");
    cfg.analysis.omega_max = get_or(an, "omega_max", 0.0);
    cfg.analysis.omega_points = get_or(an, "omega_points", 400);
    cfg.analysis.mean_subtract = get_or(an, "mean_subtract", true);
    cfg.analysis.floor_subtract = get_or(an, "floor_subtract", false);
  }

  if (j.contains("peak_scan"))
    cfg.peak_scan_sizes = get_or(j.at("peak_scan"), "sizes", std::vector<int>{});
  if (j.contains("zeno"))
    cfg.zeno_strengths = get_or(j.at("zeno"), "strengths", std::vector<double>{});
  if (j.contains("correlation") && j.at("correlation").contains("taus")) {
    const auto taus = j.at("correlation").at("taus").get<std::vector<double>>();
    cfg.correlation_taus = Eigen::Map<const RVec>(taus.data(), taus.size());
  }
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["lattice"] = {{"n_sites", cfg.lattice.n_sites}, {"coupling", cfg.lattice.coupling}};
  j["probe"] = {{"sites", cfg.probe_sites},
                {"strength", cfg.probe_strength},
                {"efficiency", cfg.probe_efficiency}};
  switch (cfg.initial_kind) {
    case ExperimentConfig::InitialKind::Eigenstate:
      j["initial_state"] = {{"kind", "eigenstate"}, {"k", cfg.initial_index}};
      break;
    case ExperimentConfig::InitialKind::Site:
      j["initial_state"] = {{"kind", "site"}, {"n", cfg.initial_index}};
      break;
    case ExperimentConfig::InitialKind::Thermal:
      j["initial_state"] = {{"kind", "thermal"}, {"beta", cfg.initial_beta}};
      break;
  }
  j["integration"] = {{"dt", cfg.integration.dt},
                      {"t_final", cfg.integration.t_final},
                      {"seed", cfg.integration.seed},
                      {"renormalize_every_step", cfg.integration.renormalize_every_step},
                      {"allow_large_dt", cfg.integration.allow_large_dt},
                      {"sample_every", cfg.integration.sample_every},
                      {"scheme", scheme_to_string(cfg.integration.scheme)}};
  j["ensemble"] = {{"n_traj", cfg.n_traj}};
  j["analysis"] = {{"omega_max", cfg.analysis.omega_max},
                   {"omega_points", cfg.analysis.omega_points},
                   {"mean_subtract", cfg.analysis.mean_subtract},
                   {"floor_subtract", cfg.analysis.floor_subtract}};
  if (!cfg.peak_scan_sizes.empty()) j["peak_scan"] = {{"sizes", cfg.peak_scan_sizes}};
  if (!cfg.zeno_strengths.empty()) j["zeno"] = {{"strengths", cfg.zeno_strengths}};
  if (cfg.correlation_taus.size() > 0) {
    std::vector<double> taus(cfg.correlation_taus.data(),
                             cfg.correlation_taus.data() + cfg.correlation_taus.size());
    j["correlation"] = {{"taus", taus}};
  }
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (j.contains("config") && j.contains("subcommand")) j = j.at("config");  // manifest re-run
  return config_from_json(j);
}

std::vector<std::string> validate_config(const ExperimentConfig& cfg) {
  std::vector<std::string> problems;
  if (cfg.lattice.n_sites < 1) problems.push_back("lattice.n_sites must be >= 1");
  if (!std::isfinite(cfg.lattice.coupling)) problems.push_back("lattice.coupling must be finite");
  if (cfg.probe_sites.empty()) problems.push_back("probe.sites must be non-empty");
  for (int s : cfg.probe_sites)
    if (s < 1 || s > cfg.lattice.n_sites)
      problems.push_back("probe site " + std::to_string(s) + " out of range 1.." +
                         std::to_string(cfg.lattice.n_sites));
  if (!(cfg.probe_strength > 0)) problems.push_back("probe.strength must be > 0");
  if (!(cfg.probe_efficiency >= 0 && cfg.probe_efficiency <= 1))
    problems.push_back("probe.efficiency must lie in [0, 1]");
  if (cfg.initial_kind == ExperimentConfig::InitialKind::Eigenstate ||
      cfg.initial_kind == ExperimentConfig::InitialKind::Site) {
    if (cfg.initial_index < 1 || cfg.initial_index > cfg.lattice.n_sites)
      problems.push_back("initial_state index out of range 1.." +
                         std::to_string(cfg.lattice.n_sites));
  } else if (!(cfg.initial_beta >= 0)) {
    problems.push_back("initial_state.beta must be >= 0");
  }
  const double guard = dt_guard(cfg.lattice.coupling, cfg.probe_strength);
  if (cfg.integration.dt > 0 && cfg.integration.dt > guard * (1 + 1e-12) &&
      !cfg.integration.allow_large_dt)
    problems.push_back("integration.dt exceeds the guard dt <= 0.01/max(J,k) = " +
                       io::format_double(guard) + " (set integration.allow_large_dt to override)");
  const double dt = cfg.integration.dt > 0
                        ? cfg.integration.dt
                        : default_dt(cfg.lattice.coupling, cfg.probe_strength);
  if (!(cfg.integration.t_final >= dt)) problems.push_back("integration.t_final must be >= dt");
  if (cfg.n_traj < 1) problems.push_back("ensemble.n_traj must be >= 1");
  if (cfg.analysis.omega_points < 2) problems.push_back("analysis.omega_points must be >= 2");
  for (int n : cfg.peak_scan_sizes)
    if (n < 1) problems.push_back("peak_scan.sizes entries must be >= 1");
  for (double k : cfg.zeno_strengths)
    if (!(k > 0)) problems.push_back("zeno.strengths entries must be > 0");
  return problems;
}

namespace {

namespace fs = std::filesystem;

struct RunContext {
  ExperimentConfig cfg;
  std::string config_bytes;
  fs::path out;
  int n_threads = 0;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  std::vector<std::string> files;

  std::string path(const std::string& name) {
    files.push_back((out / name).string());
    return files.back();
  }

  void write_manifest(const std::string& subcommand) {
    json m;
    m["subcommand"] = subcommand;
    m["config"] = config_to_json(cfg);
    m["seed"] = cfg.integration.seed;
    m["input_hash"] = sha256_hex(config_bytes);
    m["versions"] = {{"qtraj", "0.1.0"},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                   std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)}};
    m["threads"] = n_threads;
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    m["timing"] = {{"wall_seconds", wall}};
    m["outputs"] = files;
    std::ofstream outf(out / "manifest.json");
    outf << m.dump(2) << "\n";
    files.push_back((out / "manifest.json").string());
  }
};

RVec steady_grid(const ExperimentConfig& cfg) {
  if (cfg.analysis.omega_max > 0) {
    RVec g(cfg.analysis.omega_points);
    for (int i = 0; i < cfg.analysis.omega_points; ++i)
      g(i) = cfg.analysis.omega_max * static_cast<double>(i) / (cfg.analysis.omega_points - 1);
    return g;
  }
  return default_omega_grid(cfg.lattice, cfg.analysis.omega_points);
}

RVec record_grid(const ExperimentConfig& cfg) {
  const EigenSystem es = analytic_eigensystem(cfg.lattice);
  double wmax = cfg.analysis.omega_max;
  if (!(wmax > 0)) {
    wmax = 1.2 * (es.energies.maxCoeff() - es.energies.minCoeff());
    if (!(wmax > 0)) wmax = 1.0;
  }
  return dft_grid(cfg.integration.t_final, wmax);
}

void write_trajectory_csv(const std::string& path, const TrajectoryResult& traj, int n_sites) {
  std::vector<std::string> header{"t", "lambda"};
  for (int n = 1; n <= n_sites; ++n) header.push_back("p_site_" + std::to_string(n));
  header.insert(header.end(), {"p_od", "p_ev", "purity"});
  std::vector<std::vector<double>> rows;
  rows.reserve(traj.times.size());
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    std::vector<double> row;
    row.reserve(header.size());
    row.push_back(traj.times[i]);
    const auto step = static_cast<long long>(std::llround(traj.times[i] / traj.record.dt));
    row.push_back(step >= 1 && !traj.record.samples.empty()
                      ? traj.record.samples[static_cast<std::size_t>(step - 1)]
                      : 0.0);
    for (int n = 0; n < n_sites; ++n) row.push_back(traj.site_populations(i, n));
    row.push_back(traj.parity[i].odd);
    row.push_back(traj.parity[i].even);
    row.push_back(traj.purity[i]);
    rows.push_back(std::move(row));
  }
  io::write_csv(path, header, rows);
}

void run_trajectory_cmd(RunContext& ctx) {
  const auto ens = simulate_ensemble(ctx.cfg.lattice, ctx.cfg.initial_state(), ctx.cfg.probe(),
                                     ctx.cfg.integration, ctx.cfg.n_traj, ctx.n_threads);
  for (int i = 0; i < ctx.cfg.n_traj; ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "trajectory_%03d.csv", i);
    write_trajectory_csv(ctx.path(name), ens.trajectories[i], ctx.cfg.lattice.n_sites);
  }
  json summary;
  summary["master_seed"] = ctx.cfg.integration.seed;
  summary["streams"] = ctx.cfg.n_traj;
  summary["config"] = config_to_json(ctx.cfg);
  summary["wall_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.t0).count();
  std::ofstream s(ctx.path("ensemble.json"));
  s << summary.dump(2) << "\n";
}

std::vector<MeasurementRecord> collect_records(RunContext& ctx) {
  auto ens = simulate_ensemble(ctx.cfg.lattice, ctx.cfg.initial_state(), ctx.cfg.probe(),
                               ctx.cfg.integration, ctx.cfg.n_traj, ctx.n_threads);
  std::vector<MeasurementRecord> records;
  records.reserve(ens.trajectories.size());
  for (auto& t : ens.trajectories) records.push_back(std::move(t.record));
  return records;
}

void run_spectrum_record(RunContext& ctx) {
  const RVec grid = record_grid(ctx.cfg);
  const auto records = collect_records(ctx);
  std::vector<SpectrumEstimate> singles;
  singles.reserve(records.size());
  for (const auto& r : records)
    singles.push_back(periodogram(r, grid, ctx.cfg.analysis.mean_subtract));
  SpectrumEstimate avg = average_spectra(singles);
  RVec stderrs = RVec::Zero(grid.size());
  for (const auto& s : singles)
    stderrs += (s.values - avg.values).cwiseAbs2();
  stderrs = (stderrs / (singles.size() * std::max<double>(1.0, singles.size() - 1.0))).cwiseSqrt();
  double offset = ctx.cfg.analysis.floor_subtract ? shot_noise_floor(ctx.cfg.probe_strength) : 0.0;
  std::vector<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    rows.push_back({grid(i), avg.values(i) - offset, stderrs(i)});
  io::write_csv(ctx.path("spectrum_record.csv"), {"omega", "value", "stderr"}, rows);
}

Mat resolved_steady_state(const LiouvilleOperator& liou, const ExperimentConfig& cfg) {
  try {
    return steady_state(liou);
  } catch (const DegenerateSteadyState&) {
    return steady_state(liou, cfg.initial_state());
  }
}

void run_spectrum_steady(RunContext& ctx, bool perturbative) {
  const ProbeConfig probe = ctx.cfg.probe();
  const auto liou = build_liouvillian(build_hamiltonian(ctx.cfg.lattice), probe);
  const Mat rho_ss = resolved_steady_state(liou, ctx.cfg);
  const RVec grid = steady_grid(ctx.cfg);
  const SpectrumEstimate ref =
      steady_state_spectrum(liou, probe.observable, rho_ss, grid, ctx.n_threads);
  SpectrumEstimate out = ref;
  std::string name = "spectrum_steady.csv";
  if (perturbative) {
    out = scale_to_reference(perturbative_spectrum(analytic_eigensystem(ctx.cfg.lattice),
                                                   ctx.cfg.probe_sites, ctx.cfg.probe_strength,
                                                   rho_ss, grid),
                             ref);
    name = "spectrum_perturbative.csv";
  }
  std::vector<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < grid.size(); ++i) rows.push_back({grid(i), out.values(i)});
  io::write_csv(ctx.path(name), {"omega", "S"}, rows);
}

void run_liouville_eig(RunContext& ctx) {
  const auto liou = build_liouvillian(build_hamiltonian(ctx.cfg.lattice), ctx.cfg.probe());
  const auto spec = liouvillian_spectrum(liou);
  std::vector<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i)
    rows.push_back({spec.eigenvalues(i).real(), spec.eigenvalues(i).imag()});
  io::write_csv(ctx.path("liouville_eig.csv"), {"re", "im"}, rows);
}

void run_effective_modes(RunContext& ctx) {
  const auto modes = effective_modes(build_hamiltonian(ctx.cfg.lattice), ctx.cfg.probe());
  std::vector<std::string> header{"mode", "lambda_re", "lambda_im"};
  for (int n = 1; n <= ctx.cfg.lattice.n_sites; ++n)
    header.push_back("amp2_site_" + std::to_string(n));
  std::vector<std::vector<double>> rows;
  for (Eigen::Index m = 0; m < modes.values.size(); ++m) {
    std::vector<double> row{static_cast<double>(m + 1), modes.values(m).real(),
                            modes.values(m).imag()};
    for (int n = 0; n < ctx.cfg.lattice.n_sites; ++n)
      row.push_back(std::norm(modes.states(n, m)));
    rows.push_back(std::move(row));
  }
  io::write_csv(ctx.path("effective_modes.csv"), header, rows);
}

void run_peak_scan(RunContext& ctx) {
  if (ctx.cfg.peak_scan_sizes.empty())
    throw ConfigError("peak-scan requires a peak_scan.sizes list");
  std::vector<std::pair<int, double>> points;
  std::vector<std::vector<double>> rows;
  for (int n : ctx.cfg.peak_scan_sizes) {
    ExperimentConfig sub = ctx.cfg;
    sub.lattice.n_sites = n;
    sub.probe_sites = {n / 2 + 1};  // middle site
    if (sub.initial_index > n) sub.initial_index = 1;
    RunContext subctx{sub, ctx.config_bytes, ctx.out, ctx.n_threads};
    const RVec grid = record_grid(sub);
    const auto records = collect_records(subctx);
    SpectrumEstimate avg =
        average_periodograms(records, grid, sub.analysis.mean_subtract, ctx.n_threads);
    if (sub.analysis.floor_subtract)
      avg.values.array() -= shot_noise_floor(sub.probe_strength);
    const double peak = dominant_peak(avg);
    points.emplace_back(n, peak);
    rows.push_back({static_cast<double>(n), peak});
  }
  io::write_csv(ctx.path("peak_scan.csv"), {"n_sites", "peak_omega"}, rows);

  const auto fit1 = scaling_fit(points, ScalingModel::InverseN);
  const auto fit2 = scaling_fit(points, ScalingModel::InverseNSquared);
  io::write_csv(ctx.path("peak_fits.csv"), {"inverse_power", "coefficient", "rms_rel_residual"},
                {{1.0, fit1.coefficient, fit1.residual}, {2.0, fit2.coefficient, fit2.residual}});
}

void run_zeno(RunContext& ctx) {
  if (ctx.cfg.zeno_strengths.empty()) throw ConfigError("zeno requires a zeno.strengths list");
  const int n = ctx.cfg.lattice.n_sites;
  const int mid = n / 2 + 1;
  const Mat h = build_hamiltonian(ctx.cfg.lattice);
  const Mat rho0 = pure_state_on_site(ctx.cfg.lattice, mid);
  std::vector<std::vector<double>> rows;
  for (double k : ctx.cfg.zeno_strengths) {
    ProbeConfig probe{site_projector(ctx.cfg.lattice, {mid}), k, 1.0};
    const auto liou = build_liouvillian(h, probe);
    const Mat rss = steady_state(liou, rho0);
    const double p_inf = expectation(probe.observable, rss);
    const double g_var = zeno_rate(ctx.cfg.lattice, mid, k);
    const double j2 = ctx.cfg.lattice.coupling * ctx.cfg.lattice.coupling;
    const double t_max = 8.0 / (4.0 * j2 / k);
    std::vector<double> ts(301), ps;
    for (int i = 0; i <= 300; ++i) ts[i] = t_max * i / 300.0;
    const auto path = lindblad_propagate_grid(liou, rho0, ts);
    ps.reserve(ts.size());
    for (const auto& r : path) ps.push_back(expectation(probe.observable, r));
    const double gamma_fit = fit_exponential_decay(ts, ps, p_inf);

    RVec grid(161);
    for (int i = 0; i < 161; ++i) grid(i) = 4.0 * gamma_fit * i / 160.0;
    const auto spec = steady_state_spectrum(liou, probe.observable, rss, grid, ctx.n_threads);
    const double hwhm = half_width_at_half_max(spec);
    rows.push_back({k, gamma_fit, 4.0 * j2 / k, g_var, hwhm});
  }
  io::write_csv(ctx.path("zeno.csv"),
                {"k", "gamma_fit", "gamma_single_neighbor", "gamma_variance", "lorentzian_hwhm"},
                rows);
}

void run_correlation(RunContext& ctx) {
  const double j = std::abs(ctx.cfg.lattice.coupling);
  const double k = ctx.cfg.probe_strength;
  const double discard = 10.0 / std::min(j > 0 ? j : k, k);
  const double dt = ctx.cfg.integration.dt > 0 ? ctx.cfg.integration.dt : default_dt(j, k);
  RVec taus = ctx.cfg.correlation_taus;
  if (taus.size() == 0) {
    const double tau_max = 10.0 / (j > 0 ? j : 1.0);
    const long long stride = std::max<long long>(1, std::llround(tau_max / 40.0 / dt));
    taus.resize(41);
    for (int i = 0; i <= 40; ++i) taus(i) = static_cast<double>(i * stride) * dt;
  }
  if (ctx.cfg.integration.t_final < discard + taus(taus.size() - 1))
    throw ConfigError("correlation: t_final must exceed the transient discard plus max tau");

  const auto records = collect_records(ctx);
  const auto mc = mc_record_correlation(records, taus, discard);

  const ProbeConfig probe = ctx.cfg.probe();
  const auto liou = build_liouvillian(build_hamiltonian(ctx.cfg.lattice), probe);
  const Mat rss = resolved_steady_state(liou, ctx.cfg);
  const auto an = analytic_record_correlation(liou, rss, probe.observable, taus, dt);

  std::vector<std::vector<double>> rows_mc, rows_an;
  for (Eigen::Index i = 0; i < taus.size(); ++i) {
    rows_mc.push_back({taus(i), mc.values(i), mc.stderrs(i)});
    rows_an.push_back({taus(i), an.values(i)});
  }
  io::write_csv(ctx.path("correlation_mc.csv"), {"tau", "value", "stderr"}, rows_mc);
  io::write_csv(ctx.path("correlation_analytic.csv"), {"tau", "value"}, rows_an);
}

}  // namespace

std::vector<std::string> run_subcommand(const std::string& subcommand,
                                        const std::string& config_path, const std::string& out_dir,
                                        const RunOptions& options) {
  std::ifstream in(config_path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + config_path);
  std::ostringstream buf;
  buf << in.rdbuf();

  RunContext ctx;
  ctx.config_bytes = buf.str();
  ctx.cfg = load_config(config_path);
  if (options.seed_override) ctx.cfg.integration.seed = *options.seed_override;
  ctx.n_threads = options.n_threads;
  ctx.out = out_dir;

  const auto problems = validate_config(ctx.cfg);
  if (!problems.empty()) {
    std::string msg = "invalid config:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ConfigError(msg);
  }
  std::error_code ec;
  fs::create_directories(ctx.out, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + out_dir);

  if (subcommand == "trajectory")
    run_trajectory_cmd(ctx);
  else if (subcommand == "spectrum-record")
    run_spectrum_record(ctx);
  else if (subcommand == "spectrum-steady")
    run_spectrum_steady(ctx, false);
  else if (subcommand == "spectrum-perturbative")
    run_spectrum_steady(ctx, true);
  else if (subcommand == "liouville-eig")
    run_liouville_eig(ctx);
  else if (subcommand == "effective-modes")
    run_effective_modes(ctx);
  else if (subcommand == "peak-scan")
    run_peak_scan(ctx);
  else if (subcommand == "zeno")
    run_zeno(ctx);
  else if (subcommand == "correlation")
    run_correlation(ctx);
  else
    throw ConfigError("unknown subcommand '" + subcommand + "'");

  ctx.write_manifest(subcommand);
  return ctx.files;
}

}  // namespace qtraj
