#include "vibeam/commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "vibeam/contact.hpp"
#include "vibeam/harness.hpp"
#include "vibeam/matrix_io.hpp"
#include "vibeam/modal.hpp"
#include "vibeam/postproc.hpp"
#include "vibeam/twin_beam.hpp"
#include "vibeam/updating.hpp"
#include "vibeam/util.hpp"

namespace fs = std::filesystem;

namespace vibeam {

namespace {

const std::vector<double> kDefaultDampingRatios = {0.00153, 0.00183, 0.00186, 0.00143};

TwinBeamSpec beam_spec_from_config(const Config& cfg) {
  TwinBeamSpec spec;
  spec.length = cfg.get_double("model.beam.length", spec.length);
  spec.width = cfg.get_double("model.beam.width", spec.width);
  spec.thickness = cfg.get_double("model.beam.thickness", spec.thickness);
  spec.taper_ratio = cfg.get_double("model.beam.taper_ratio", spec.taper_ratio);
  spec.youngs_modulus = cfg.get_double("model.beam.youngs_modulus", spec.youngs_modulus);
  spec.density = cfg.get_double("model.beam.density", spec.density);
  spec.n_elements = cfg.get_int("model.beam.elements_per_beam", spec.n_elements);
  spec.probe_offset = cfg.get_double("model.beam.probe_offset", spec.probe_offset);
  spec.tip_mass = cfg.get_double("model.beam.tip_mass", spec.tip_mass);
  return spec;
}

std::vector<double> damping_from_config(const Config& cfg) {
  return cfg.get_doubles("damping.ratios", kDefaultDampingRatios);
}

double clearance_from_config(const Config& cfg, const TwinBeamSpec& spec) {
  // clearance defaults to 2.33e-3 of the beam length
  return cfg.get_double("contact.clearance", 2.33e-3 * spec.length);
}

ContactConfig contact_from_config(const Config& cfg, int n_pairs, double clearance) {
  ContactConfig cc;
  cc.mu = cfg.get_double("contact.mu", 0.4);
  cc.g0 = Vec::Constant(n_pairs, clearance);
  cc.tol_rel = cfg.get_double("contact.tol_rel", 1e-8);
  cc.max_iter = cfg.get_int("contact.max_iter", 500);
  cc.relaxation = cfg.get_double("contact.relaxation", 0.8);
  return cc;
}

void write_manifest(const std::string& dir, const std::string& command, const Config& cfg,
                    const std::map<std::string, std::string>& inputs,
                    const std::vector<std::string>& output_files, const nlohmann::json& results) {
  nlohmann::json j;
  j["command"] = command;
  j["tool"] = kToolVersion;
  nlohmann::json cfg_echo;
  for (const auto& [key, value] : cfg.entries()) cfg_echo[key] = value;
  j["config"] = cfg_echo;
  nlohmann::json in_hashes;
  for (const auto& [name, hash] : inputs) in_hashes[name] = hash;
  j["inputs"] = in_hashes;
  nlohmann::json out_hashes;
  for (const auto& name : output_files)
    out_hashes[name] = hash_file_hex((fs::path(dir) / name).string());
  j["outputs"] = out_hashes;
  j["results"] = results;
  std::ofstream out(fs::path(dir) / "manifest.json");
  if (!out) throw ValidationError("cannot write manifest in " + dir);
  out << j.dump(1) << "\n";
}

void write_gnuplot(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << "# gnuplot script\n" << body;
}

}  // namespace

std::string resolve_output_dir(const Config& cfg) {
  std::string dir = cfg.get_string("output.dir", "out");
  const char* root = std::getenv("VIBEAM_OUT_ROOT");
  fs::path p(dir);
  if (root && *root && p.is_relative()) p = fs::path(root) / p;
  fs::create_directories(p);
  return p.string();
}

FEModel build_model_from_config(const Config& cfg) {
  std::string source = cfg.get_string("model.source", "generator");
  if (source == "files") {
    return load_fe_matrices(cfg.get_string("model.files.mass"),
                            cfg.get_string("model.files.stiffness"),
                            cfg.get_string("model.files.metadata"));
  }
  if (source != "generator")
    throw ValidationError("model.source must be 'generator' or 'files'");
  TwinBeamSpec spec = beam_spec_from_config(cfg);
  if (cfg.has("model.beam.root_layer_kn"))
    return build_twin_beam_with_root_layers(spec, cfg.get_double("model.beam.root_layer_kn"),
                                            cfg.get_double("model.beam.root_layer_kt"));
  return build_twin_beam_model(spec);
}

namespace {

std::map<std::string, std::string> model_input_hashes(const Config& cfg) {
  std::map<std::string, std::string> inputs;
  if (cfg.get_string("model.source", "generator") == "files")
    for (const char* key : {"model.files.mass", "model.files.stiffness", "model.files.metadata"}) {
      std::string path = cfg.get_string(key);
      inputs[path] = hash_file_hex(path);
    }
  return inputs;
}

// Reduced-vs-parent boundary deflection for every unit boundary load.
double static_flexibility_error(const TransformedModel& tm, const ReducedModel& rom) {
  const int n_g = rom.n_g();
  Eigen::LLT<Mat> full(tm.K);
  Mat K_red(n_g + rom.n_modes(), n_g + rom.n_modes());
  K_red << rom.K_gg, rom.K_ge, rom.K_ge.transpose(), rom.K_ee;
  Eigen::LLT<Mat> red(K_red);
  double worst = 0.0;
  for (int k = 0; k < n_g; ++k) {
    Vec rhs_full = Vec::Zero(tm.K.rows());
    rhs_full[k] = 1.0;
    Vec g_full = full.solve(rhs_full).head(n_g);
    Vec rhs_red = Vec::Zero(n_g + rom.n_modes());
    rhs_red[k] = 1.0;
    Vec g_red = red.solve(rhs_red).head(n_g);
    worst = std::max(worst, (g_red - g_full).norm() / g_full.norm());
  }
  return worst;
}

ReducedModel reduce_from_config(const Config& cfg, const FEModel& model, TransformedModel* tm_out,
                                double* static_err) {
  TransformedModel tm = boundary_transform(model);
  int n_modes = cfg.get_int("reduction.n_modes", 20);
  ReducedModel rom = macneal_reduce(tm, n_modes);
  Vec zeta = damping_ratios_filled(rom.n_modes(), damping_from_config(cfg));
  rom.D_ee = 2.0 * zeta.cwiseProduct(rom.omega);
  TwinBeamSpec spec = beam_spec_from_config(cfg);
  rom.g0 = Vec::Constant(rom.n_pairs, clearance_from_config(cfg, spec));
  if (static_err) *static_err = static_flexibility_error(tm, rom);
  if (tm_out) *tm_out = std::move(tm);
  return rom;
}

}  // namespace

void cmd_reduce(const Config& cfg) {
  std::string dir = resolve_output_dir(cfg);
  FEModel model = build_model_from_config(cfg);
  double static_err = 0.0;
  ReducedModel rom = reduce_from_config(cfg, model, nullptr, &static_err);
  save_reduced_model((fs::path(dir) / "rom.json").string(), rom);

  nlohmann::json results;
  nlohmann::json freqs = nlohmann::json::array();
  Vec f = rom.frequencies_hz();
  for (Eigen::Index i = 0; i < f.size(); ++i) freqs.push_back(f[i]);
  results["frequencies_hz"] = freqs;
  if (f.size() >= 2) results["fundamental_ratio"] = f[1] / f[0];
  results["static_check_max_rel_error"] = static_err;
  results["n_modes"] = rom.n_modes();
  results["n_pairs"] = rom.n_pairs;
  write_manifest(dir, "reduce", cfg, model_input_hashes(cfg), {"rom.json"}, results);
  std::cout << "reduce: " << rom.n_modes() << " modes, static check " << static_err << "\n";
}

namespace {

struct SweepSpec {
  double level = 0.0;
  SweepDirection direction = SweepDirection::Up;
  double clearance = 0.0;
};

std::vector<SweepSpec> sweep_specs_from_config(const Config& cfg, double default_clearance) {
  std::vector<SweepSpec> specs;
  if (cfg.has("sweep.plan")) {
    // entries level:direction[:clearance], comma separated
    for (const auto& entry : cfg.get_strings("sweep.plan", {})) {
      auto fields = split(entry, ':');
      if (fields.size() < 2) throw ValidationError("sweep.plan entry needs level:direction");
      SweepSpec s;
      s.level = std::stod(trim(fields[0]));
      std::string dir = trim(fields[1]);
      if (dir == "up")
        s.direction = SweepDirection::Up;
      else if (dir == "down")
        s.direction = SweepDirection::Down;
      else
        throw ValidationError("sweep direction must be up or down");
      s.clearance = fields.size() > 2 ? std::stod(trim(fields[2])) : default_clearance;
      specs.push_back(s);
    }
    return specs;
  }
  auto levels = cfg.get_doubles("excitation.levels", {6.0e-6});
  auto dirs = cfg.get_strings("sweep.directions", {"up", "down"});
  for (double level : levels)
    for (const auto& dir : dirs) {
      SweepSpec s;
      s.level = level;
      s.direction = dir == "down" ? SweepDirection::Down : SweepDirection::Up;
      s.clearance = default_clearance;
      specs.push_back(s);
    }
  return specs;
}

SweepPlan base_plan_from_config(const Config& cfg, const ReducedModel& rom) {
  SweepPlan plan;
  int ref_mode = cfg.get_int("sweep.ref_mode", rom.n_modes() >= 2 ? 2 : 1);
  if (ref_mode < 1 || ref_mode > rom.n_modes())
    throw ValidationError("sweep.ref_mode out of range");
  plan.omega_ref = rom.omega[ref_mode - 1];
  double lo = cfg.get_double("sweep.freq_lo", 0.95);
  double hi = cfg.get_double("sweep.freq_hi", 1.10);
  int points = cfg.get_int("sweep.points", 31);
  if (points < 1 || hi <= lo) throw ValidationError("bad sweep grid");
  plan.omegas.resize(points);
  for (int i = 0; i < points; ++i)
    plan.omegas[i] = plan.omega_ref * (lo + (hi - lo) * (points == 1 ? 0.0 : double(i) / (points - 1)));
  plan.wait_periods = cfg.get_int("sweep.wait_periods", 200);
  plan.record_periods = cfg.get_int("sweep.record_periods", 100);
  plan.steps_per_period = cfg.get_int("sweep.steps_per_period", 1000);
  plan.max_wait_extensions = cfg.get_int("sweep.max_wait_extensions", 5);
  plan.decimate = cfg.get_int("output.decimate", 1);
  return plan;
}

void write_sweep_summary(const std::string& path, const ReducedModel& rom,
                         const SweepResult& result) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << "omega_norm,omega";
  for (const auto& name : rom.observer_names) out << ",rms_" << name << "_vel";
  for (const auto& name : rom.observer_names)
    out << ",ampmin_" << name << "_vel,ampmax_" << name << "_vel,ampmean_" << name << "_vel";
  out << ",contact_fraction,steady,wait_extensions,state_hash_in,state_hash_out,series\n";
  for (const auto& rec : result.records) {
    out << format_double(rec.omega_norm) << "," << format_double(rec.omega);
    for (const auto& name : rom.observer_names) out << "," << format_double(rec.rms_vel.at(name + "_vel"));
    for (const auto& name : rom.observer_names) {
      const std::string ch = name + "_vel";
      out << "," << format_double(rec.amp_min.at(ch)) << "," << format_double(rec.amp_max.at(ch))
          << "," << format_double(rec.amp_mean.at(ch));
    }
    out << "," << format_double(rec.contact_fraction) << "," << (rec.steady ? 1 : 0) << ","
        << rec.wait_extensions << "," << rec.state_hash_in << "," << rec.state_hash_out << ","
        << fs::path(rec.series_path).filename().string() << "\n";
  }
}

std::string rom_path_from_config(const Config& cfg, const std::string& dir) {
  std::string path = cfg.get_string("sweep.archive", (fs::path(dir) / "rom.json").string());
  if (!fs::exists(path)) throw ValidationError("reduced model archive not found: " + path);
  return path;
}

}  // namespace

void cmd_sweep(const Config& cfg) {
  std::string dir = resolve_output_dir(cfg);
  std::string rom_path = rom_path_from_config(cfg, dir);
  ReducedModel rom = load_reduced_model(rom_path);
  TwinBeamSpec spec = beam_spec_from_config(cfg);
  double clearance = clearance_from_config(cfg, spec);
  ContactConfig cc = contact_from_config(cfg, rom.n_pairs, clearance);
  SweepPlan base = base_plan_from_config(cfg, rom);
  auto specs = sweep_specs_from_config(cfg, clearance);

  std::vector<SweepResult> results(specs.size());
  std::vector<std::function<void()>> tasks;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    tasks.push_back([&, i] {
      SweepPlan plan = base;
      plan.level = specs[i].level;
      plan.direction = specs[i].direction;
      plan.clearance = specs[i].clearance;
      char tag[64];
      std::snprintf(tag, sizeof(tag), "sweep%02zu_%s", i,
                    specs[i].direction == SweepDirection::Up ? "up" : "down");
      plan.tag = tag;
      plan.output_dir = (fs::path(dir) / tag).string();
      results[i] = stepped_sine(rom, cc, plan);
    });
  }
  run_parallel(cfg.get_int("jobs", 1), tasks);

  std::vector<std::string> outputs;
  nlohmann::json sweeps = nlohmann::json::array();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    std::string summary_name = results[i].plan.tag + "_summary.csv";
    write_sweep_summary((fs::path(dir) / summary_name).string(), rom, results[i]);
    outputs.push_back(summary_name);
    for (const auto& rec : results[i].records)
      outputs.push_back((fs::path(results[i].plan.tag) / fs::path(rec.series_path).filename()).string());
    nlohmann::json js;
    js["tag"] = results[i].plan.tag;
    js["level"] = results[i].plan.level;
    js["clearance"] = results[i].plan.clearance;
    js["direction"] = specs[i].direction == SweepDirection::Up ? "up" : "down";
    js["omega_ref"] = results[i].plan.omega_ref;
    nlohmann::json hashes = nlohmann::json::array();
    for (const auto& rec : results[i].records) {
      nlohmann::json h;
      h["omega_norm"] = rec.omega_norm;
      h["state_hash_in"] = rec.state_hash_in;
      h["state_hash_out"] = rec.state_hash_out;
      h["steady"] = rec.steady;
      h["wait_extensions"] = rec.wait_extensions;
      hashes.push_back(h);
    }
    js["records"] = hashes;
    sweeps.push_back(js);
  }

  write_gnuplot((fs::path(dir) / "plot_rms.gp").string(),
                "set xlabel 'Omega/omega_ref'\nset ylabel 'RMS tip velocity'\n"
                "set datafile separator ','\n"
                "plot for [f in system('ls " + dir + "/sweep*_summary.csv')] f using 1:3 with linespoints title f\n");
  std::vector<std::string> manifest_outputs = outputs;
  manifest_outputs.push_back("plot_rms.gp");
  nlohmann::json results_json;
  results_json["sweeps"] = sweeps;
  std::map<std::string, std::string> inputs;
  inputs[rom_path] = hash_file_hex(rom_path);
  write_manifest(dir, "sweep", cfg, inputs, manifest_outputs, results_json);
  std::cout << "sweep: " << specs.size() << " sweeps, "
            << (specs.empty() ? 0 : results[0].records.size()) << " grid points each\n";
}

namespace {

void write_convergence_csv(const std::string& path, const char* key_name,
                           const ConvergenceStudy& study) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << key_name << ",eps_rms,rms,diverged\n";
  for (const auto& e : study.entries)
    out << format_double(e.key) << "," << format_double(e.eps) << "," << format_double(e.rms)
        << "," << (e.diverged ? 1 : 0) << "\n";
}

}  // namespace

void cmd_converge(const Config& cfg) {
  std::string dir = resolve_output_dir(cfg);
  FEModel model = build_model_from_config(cfg);
  TransformedModel tm;
  ReducedModel rom = reduce_from_config(cfg, model, &tm, nullptr);
  TwinBeamSpec spec = beam_spec_from_config(cfg);
  double clearance = clearance_from_config(cfg, spec);
  ContactConfig cc = contact_from_config(cfg, rom.n_pairs, clearance);

  int ref_mode = cfg.get_int("sweep.ref_mode", rom.n_modes() >= 2 ? 2 : 1);
  double omega_ref = rom.omega[ref_mode - 1];
  Excitation exc;
  exc.omega = omega_ref * cfg.get_double("converge.freq_norm", 1.0);
  exc.amplitude = cfg.get_double("converge.level",
                                 cfg.get_doubles("excitation.levels", {6.0e-6}).back());

  int horizon = cfg.get_int("converge.horizon_periods", 5);
  int settle = cfg.get_int("converge.settle_periods", 150);

  auto steps_list = cfg.get_ints("converge.steps_list", {250, 500, 1000, 2000, 4000});
  ConvergenceStudy time_study =
      convergence_time_study(rom, cc, exc, steps_list, horizon, settle);
  write_convergence_csv((fs::path(dir) / "converge_time.csv").string(), "steps_per_period",
                        time_study);

  auto modes_list = cfg.get_ints("converge.modes_list", {4, 8, 12, 16, 24, 40, 64});
  ConvergenceStudy modes_study = convergence_modes_study(
      tm, damping_from_config(cfg), cc, exc, modes_list, horizon, settle,
      cfg.get_int("sweep.steps_per_period", 1000));
  write_convergence_csv((fs::path(dir) / "converge_modes.csv").string(), "n_modes", modes_study);

  write_gnuplot((fs::path(dir) / "plot_convergence.gp").string(),
                "set logscale xy\nset datafile separator ','\n"
                "plot 'converge_time.csv' using 1:2 with linespoints title 'time step', \\\n"
                "     'converge_modes.csv' using 1:2 with linespoints title 'mode count'\n");

  nlohmann::json results;
  results["omega"] = exc.omega;
  results["level"] = exc.amplitude;
  write_manifest(dir, "converge", cfg, model_input_hashes(cfg),
                 {"converge_time.csv", "converge_modes.csv", "plot_convergence.gp"}, results);
  std::cout << "converge: time table " << time_study.entries.size() << " rows, modes table "
            << modes_study.entries.size() << " rows\n";
}

void cmd_analyze(const Config& cfg, const std::vector<std::string>& series_paths) {
  if (series_paths.empty()) throw ValidationError("analyze requires at least one series file");
  std::string dir = resolve_output_dir(cfg);
  std::map<std::string, std::string> inputs;
  std::vector<std::string> outputs;

  for (const auto& path : series_paths) {
    if (!fs::exists(path)) throw ValidationError("series file not found: " + path);
    inputs[path] = hash_file_hex(path);
    TimeSeries ts = read_time_series(path);
    double omega = ts.meta.count("omega") ? ts.meta.at("omega") : 0.0;
    std::string stem = fs::path(path).stem().string();

    std::vector<std::string> channels = cfg.get_strings("analyze.channels", {});
    if (channels.empty())
      for (const auto& name : ts.names)
        if (name.size() > 4 && name.substr(name.size() - 4) == "_vel") channels.push_back(name);
    if (channels.empty()) throw ValidationError("no velocity channels found in " + path);

    std::string summary_name = stem + "_summary.csv";
    std::ofstream sum((fs::path(dir) / summary_name).string());
    sum << "channel,rms,amp_min,amp_max,amp_mean,demod_amplitude,demod_phase\n";
    for (const auto& ch : channels) {
      double r = rms(ts, ch);
      PeriodAmplitudes amps = per_period_amplitudes(ts, ch, omega);
      Demodulation dem = demodulate_fundamental(ts, ch, omega);
      sum << ch << "," << format_double(r) << "," << format_double(amps.min) << ","
          << format_double(amps.max) << "," << format_double(amps.mean) << ","
          << format_double(dem.amplitude) << "," << format_double(dem.phase) << "\n";
    }
    sum.close();
    outputs.push_back(summary_name);

    ActivityStats activity = contact_activity(ts);
    std::string act_name = stem + "_activity.csv";
    {
      std::ofstream act((fs::path(dir) / act_name).string());
      act << "# fraction_active = " << format_double(activity.fraction_active) << "\n";
      act << "# impacts = " << activity.impacts << "\n";
      act << "t_start,t_end,impacts\n";
      for (const auto& c : activity.clusters)
        act << format_double(c.t_start) << "," << format_double(c.t_end) << "," << c.impacts
            << "\n";
    }
    outputs.push_back(act_name);

    double f_exc = omega / (2.0 * M_PI);
    double nyquist = 0.45 / ts.dt();
    double f_lo = cfg.get_double("analyze.f_min_hz", std::max(0.25 * f_exc, 1e-3));
    double f_hi = cfg.get_double("analyze.f_max_hz", std::min(8.0 * f_exc, nyquist));
    int n_freqs = cfg.get_int("analyze.n_freqs", 48);
    Spectrogram spec = wavelet_spectrogram(ts, channels.front(), f_lo, f_hi, n_freqs);
    write_spectrogram((fs::path(dir) / (stem + "_spec")).string(), spec);
    outputs.push_back(stem + "_spec_freqs.csv");
    outputs.push_back(stem + "_spec_times.csv");
    outputs.push_back(stem + "_spec_log10mag.csv");

    write_gnuplot((fs::path(dir) / (stem + "_plots.gp")).string(),
                  "set datafile separator ','\n"
                  "plot '" + path + "' using 1:2 with lines title 'tip displacement'\n"
                  "pause -1\nplot '" + path + "' using 1:'" + channels.front() +
                      "' with lines title 'tip velocity'\n");
    outputs.push_back(stem + "_plots.gp");
  }
  write_manifest(dir, "analyze", cfg, inputs, outputs, nlohmann::json::object());
  std::cout << "analyze: " << series_paths.size() << " series processed\n";
}

void cmd_update(const Config& cfg) {
  std::string dir = resolve_output_dir(cfg);
  TwinBeamSpec spec = beam_spec_from_config(cfg);
  auto targets = cfg.get_doubles("update.targets_hz", {});
  if (targets.empty()) throw ValidationError("update.targets_hz is required");

  UpdateProblem problem;
  problem.factory = [spec](const Vec& p) {
    return build_twin_beam_with_root_layers(spec, p[0], p[1]);
  };
  auto p0 = cfg.get_doubles("update.params0", {1e6, 1e4});
  auto lo = cfg.get_doubles("update.lower", {1e3, 1e1});
  auto hi = cfg.get_doubles("update.upper", {1e9, 1e7});
  if (p0.size() != 2 || lo.size() != 2 || hi.size() != 2)
    throw ValidationError("update expects two parameters (root layer k_n, k_t)");
  problem.params0 = Eigen::Map<const Vec>(p0.data(), p0.size());
  problem.lower = Eigen::Map<const Vec>(lo.data(), lo.size());
  problem.upper = Eigen::Map<const Vec>(hi.data(), hi.size());
  problem.targets_hz = Eigen::Map<const Vec>(targets.data(), targets.size());
  auto weights = cfg.get_doubles("update.weights", {});
  if (!weights.empty()) problem.weights = Eigen::Map<const Vec>(weights.data(), weights.size());

  UpdateOptions opts;
  opts.population = cfg.get_int("update.population", 32);
  opts.generations = cfg.get_int("update.generations", 200);
  opts.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 42));

  UpdateResult result = update_parameters(problem, opts);

  {
    std::ofstream out(fs::path(dir) / "updated_params.csv");
    out << "param,value\n";
    for (Eigen::Index i = 0; i < result.params.size(); ++i)
      out << "p" << i << "," << format_double(result.params[i]) << "\n";
    out << "objective," << format_double(result.objective) << "\n";
    for (Eigen::Index i = 0; i < result.residuals.size(); ++i)
      out << "residual_mode" << i + 1 << "," << format_double(result.residuals[i]) << "\n";
  }
  nlohmann::json results;
  results["objective"] = result.objective;
  results["evaluations"] = result.evaluations;
  results["seed"] = result.seed;
  write_manifest(dir, "update", cfg, {}, {"updated_params.csv"}, results);
  std::cout << "update: objective " << result.objective << " after " << result.evaluations
            << " evaluations\n";
}

}  // namespace vibeam
