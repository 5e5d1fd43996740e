#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "pathphase/bloch_geometry.hpp"
#include "pathphase/circuit_io.hpp"
#include "pathphase/errors.hpp"
#include "pathphase/fringe_lab.hpp"
#include "pathphase/state_engine.hpp"

namespace pathphase::cli {

namespace {

class UsageError : public Error {
public:
  using Error::Error;
};

double number_flag(const std::string& flag, const std::string& text) {
  const auto v = parse_number(text);
  if (!v) throw UsageError("invalid number '" + text + "' for " + flag);
  return *v;
}

std::optional<double> optional_number(const std::string& flag, const std::optional<std::string>& text) {
  if (!text) return std::nullopt;
  return number_flag(flag, *text);
}

std::uint64_t parse_seed(const std::string& source, const std::string& text) {
  std::uint64_t seed = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw UsageError("invalid seed '" + text + "' in " + source);
  }
  return seed;
}

NoiseKind parse_noise(const std::string& text) {
  if (text == "none") return NoiseKind::None;
  if (text == "poisson") return NoiseKind::Poisson;
  throw UsageError("unknown noise model '" + text + "'");
}

std::string read_input(const std::string& path, std::istream& in) {
  if (path != "-") return read_text_file(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double json_number(double v) { return std::stod(format_number(v)); }

// Model flags shared by fringes, fit-visibility and the inline sweep form.
struct ModelFlags {
  std::optional<std::string> t1, t2, s1, s2, c;

  void add(CLI::App& app, bool with_damping) {
    app.add_option("--t1", t1, "transmissivity of the reference-path beam (default 1)");
    app.add_option("--t2", t2, "transmissivity of the attenuated beam (default 0.120)");
    app.add_option("--s1", s1, "plate fraction s1 (default 0.5/4.6)");
    app.add_option("--s2", s2, "plate fraction s2 (default 1 - s1)");
    if (with_damping) app.add_option("--c", c, "visibility damping C (default 0.57)");
  }

  DampedModel model() const {
    DampedModel m;
    if (auto v = optional_number("--t1", t1)) m.t1 = *v;
    if (auto v = optional_number("--t2", t2)) m.t2 = *v;
    if (auto v = optional_number("--s1", s1)) {
      m.s1 = *v;
      m.s2 = 1.0 - *v;
    }
    if (auto v = optional_number("--s2", s2)) m.s2 = *v;
    if (auto v = optional_number("--c", c)) m.c = *v;
    return m;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, Streams io, const std::optional<std::string>& seed_env) {
  CLI::App app{"Geometric phase of a two-path interferometer loop", "pathphase"};
  app.require_subcommand(1);

  // phase
  std::string phase_t;
  std::optional<std::string> phase_dchi, phase_chi1, phase_chi2;
  bool phase_compensated = false;
  std::string phase_format = "json";
  auto* phase = app.add_subcommand("phase", "Closed-form Pancharatnam / dynamical / geometric decomposition");
  phase->add_option("--t", phase_t, "absorber transmissivity T")->required();
  phase->add_option("--dchi", phase_dchi, "relative phase shift chi2 - chi1 (requires --compensated)");
  phase->add_option("--chi1", phase_chi1, "phase shift on the upper path");
  phase->add_option("--chi2", phase_chi2, "phase shift on the lower path");
  phase->add_flag("--compensated", phase_compensated, "choose shifts with vanishing dynamical phase");
  phase->add_option("--format", phase_format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  // sweep
  std::optional<std::string> sweep_config;
  std::optional<std::string> sweep_from, sweep_to, sweep_steps, sweep_compensated, sweep_output;
  ModelFlags sweep_model;
  std::string sweep_format = "csv";
  int sweep_segments = kDefaultSegmentsPerArc;
  auto* sweep = app.add_subcommand("sweep", "Phase versus dchi with ideal and damped visibility");
  auto* config_opt = sweep->add_option("--config", sweep_config, "sweep description file");
  std::vector<CLI::Option*> inline_opts = {
      sweep->add_option("--dchi-from", sweep_from, "first dchi (default -0.2pi)"),
      sweep->add_option("--dchi-to", sweep_to, "end of the dchi range, excluded (default 3pi)"),
      sweep->add_option("--steps", sweep_steps, "number of grid points (default 160)"),
      sweep->add_option("--compensated", sweep_compensated, "true/false (default true)"),
  };
  sweep_model.add(*sweep, true);
  for (const char* name : {"--t1", "--t2", "--s1", "--s2", "--c"}) inline_opts.push_back(sweep->get_option(name));
  for (auto* opt : inline_opts) opt->excludes(config_opt);
  sweep->add_option("--output", sweep_output, "output file, '-' for stdout (overrides config)");
  sweep->add_option("--format", sweep_format, "csv or json")->check(CLI::IsMember({"json", "csv"}));
  sweep->add_option("--segments", sweep_segments, "chords per arc for the solid angle")->check(CLI::Range(2, 1 << 22));

  // solid-angle
  std::string area_t, area_dchi;
  int area_segments = kDefaultSegmentsPerArc;
  std::optional<std::string> area_path_csv;
  auto* area = app.add_subcommand("solid-angle", "Signed solid angle of the evolution loop");
  area->add_option("--t", area_t, "absorber transmissivity T")->required();
  area->add_option("--dchi", area_dchi, "relative phase shift")->required();
  area->add_option("--segments", area_segments, "chords per arc")->check(CLI::Range(2, 1 << 22));
  area->add_option("--path-csv", area_path_csv, "also write the discretized path as CSV");

  // fringes
  ModelFlags fringe_model;
  std::string fringe_dchi;
  double fringe_mean = 1000.0;
  int fringe_points = 32;
  std::string fringe_noise = "none";
  std::optional<std::string> fringe_seed;
  std::string fringe_output = "-";
  std::string fringe_format = "csv";
  auto* fringes = app.add_subcommand("fringes", "Synthesize an interferogram");
  fringe_model.add(*fringes, true);
  fringes->add_option("--dchi", fringe_dchi, "relative phase shift")->required();
  fringes->add_option("--mean-counts", fringe_mean, "mean counts per setting");
  fringes->add_option("--points", fringe_points, "number of eta settings over two periods");
  fringes->add_option("--noise", fringe_noise, "none or poisson");
  fringes->add_option("--seed", fringe_seed, "noise seed (default $PATHPHASE_SEED or 0)");
  fringes->add_option("--output", fringe_output, "output file, '-' for stdout");
  fringes->add_option("--format", fringe_format, "csv or json")->check(CLI::IsMember({"json", "csv"}));

  // fit-fringe
  std::string fit_input;
  auto* fit = app.add_subcommand("fit-fringe", "Fit A + B cos(eta - Phi) to an eta,counts CSV");
  fit->add_option("--input", fit_input, "CSV file, '-' for stdin")->required();

  // fit-visibility
  std::string vis_input;
  ModelFlags vis_model;
  auto* vis = app.add_subcommand("fit-visibility", "Fit the damping coefficient C to a dchi,phase CSV");
  vis->add_option("--input", vis_input, "CSV file, '-' for stdin")->required();
  vis_model.add(*vis, false);

  // run
  std::string run_circuit;
  std::optional<int> run_eta_steps;
  double run_mean = 1000.0;
  std::optional<std::string> run_fringes_out;
  auto* runner = app.add_subcommand("run", "Simulate a circuit file");
  runner->add_option("--circuit", run_circuit, "circuit description file")->required();
  runner->add_option("--eta-steps", run_eta_steps, "also emit an interferogram with this many settings")
      ->check(CLI::Range(5, 1 << 22));
  runner->add_option("--mean-counts", run_mean, "interferogram mean counts");
  runner->add_option("--fringes-out", run_fringes_out, "interferogram CSV file (default: stdout after the JSON)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    io.out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    io.out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    io.err << "pathphase: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (phase->parsed()) {
      const double t = number_flag("--t", phase_t);
      PhaseDecomposition d;
      if (phase_chi1 && phase_chi2 && !phase_dchi && !phase_compensated) {
        d = phase_decomposition(t, number_flag("--chi1", *phase_chi1), number_flag("--chi2", *phase_chi2));
      } else if (phase_dchi && phase_compensated && !phase_chi1 && !phase_chi2) {
        const ShiftPair s = compensated_shifts(t, number_flag("--dchi", *phase_dchi));
        d = phase_decomposition(t, s.chi1, s.chi2);
      } else {
        throw UsageError("phase needs either --dchi with --compensated, or both --chi1 and --chi2");
      }
      emit_results(d, parse_output_format(phase_format), io.out);
    } else if (sweep->parsed()) {
      SweepConfig config;
      if (sweep_config) {
        config = parse_sweep(read_text_file(*sweep_config));
      } else {
        std::string text;
        auto put = [&](const char* key, const std::optional<std::string>& v) {
          if (v) text += std::string(key) + "=" + *v + "\n";
        };
        put("dchi_from", sweep_from);
        put("dchi_to", sweep_to);
        put("steps", sweep_steps);
        put("T1", sweep_model.t1);
        put("T2", sweep_model.t2);
        put("s1", sweep_model.s1);
        put("s2", sweep_model.s2);
        put("C", sweep_model.c);
        put("compensated", sweep_compensated);
        config = parse_sweep(text);
      }
      if (sweep_output) config.output = *sweep_output;
      const auto grid = config.grid();
      const auto rows = phase_sweep(config.model(), grid, {config.compensated, sweep_segments});
      const auto format = parse_output_format(sweep_format);
      write_destination(config.output, io.out, [&](std::ostream& os) { emit_results(rows, format, os); });
    } else if (area->parsed()) {
      const auto path = build_evolution_path(number_flag("--t", area_t), number_flag("--dchi", area_dchi),
                                             area_segments);
      const double omega = signed_solid_angle(path);
      if (area_path_csv) {
        write_destination(*area_path_csv, io.out, [&](std::ostream& os) { write_path_csv(path, os); });
      }
      nlohmann::ordered_json j{{"omega", json_number(omega)}, {"phase_from_area", json_number(-0.5 * omega)}};
      io.out << j.dump() << '\n';
    } else if (fringes->parsed()) {
      SynthesisOptions options;
      options.mean_counts = fringe_mean;
      options.n_points = fringe_points;
      options.noise = parse_noise(fringe_noise);
      options.seed = fringe_seed ? parse_seed("--seed", *fringe_seed)
                                 : seed_env ? parse_seed("PATHPHASE_SEED", *seed_env) : 0;
      const auto data =
          synthesize_interferogram(fringe_model.model(), number_flag("--dchi", fringe_dchi), options);
      const auto format = parse_output_format(fringe_format);
      write_destination(fringe_output, io.out, [&](std::ostream& os) { emit_results(data, format, os); });
    } else if (fit->parsed()) {
      const FringeFit f = fit_fringe(read_interferogram(read_input(fit_input, io.in)));
      if (!f.converged) throw DomainError("fringe fit did not converge: singular normal equations");
      nlohmann::ordered_json j{{"offset", json_number(f.offset)},
                               {"amplitude", json_number(f.amplitude)},
                               {"phase", json_number(f.phase)},
                               {"phase_stderr", json_number(f.phase_stderr)},
                               {"converged", f.converged}};
      io.out << j.dump() << '\n';
    } else if (vis->parsed()) {
      const auto points = read_phase_points(read_input(vis_input, io.in));
      const VisibilityFit f = fit_visibility_c(points, vis_model.model());
      nlohmann::ordered_json j{{"C", json_number(f.c)}, {"stderr", json_number(f.stderr_c)}};
      io.out << j.dump() << '\n';
    } else if (runner->parsed()) {
      const CircuitSpec spec = parse_circuit(read_text_file(run_circuit));
      emit_results(simulate_circuit(spec), OutputFormat::Json, io.out);
      if (run_eta_steps) {
        const auto data = circuit_interferogram(spec, *run_eta_steps, run_mean);
        write_destination(run_fringes_out.value_or("-"), io.out,
                          [&](std::ostream& os) { emit_results(data, OutputFormat::Csv, os); });
      }
    }
  } catch (const ParseFailure& e) {
    io.err << "pathphase: parse error\n" << e.error().render();
    return kParse;
  } catch (const UsageError& e) {
    io.err << "pathphase: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    io.err << "pathphase: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    io.err << "pathphase: " << e.what() << '\n';
    return kDomain;
  }
  return kSuccess;
}

}  // namespace pathphase::cli
