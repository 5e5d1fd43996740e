#pragma once

/*
 * Text formats.
 *
 * Circuit files describe the single second-loop topology, one element per
 * line, `#` starting a comment:
 *
 *   circuit "compensated cyclic"
 *   split
 *   attenuate T=0.122
 *   phase chi1=-0.683 chi2=5.600
 *   recombine
 *   reference eta=0          # optional
 *
 * Sweep files are whitespace separated key=value pairs (dchi_from, dchi_to,
 * steps, T1, T2, s1, s2, C, compensated, output); missing keys take the
 * published experimental values.
 *
 * Numbers accept a trailing `pi` multiplier (`2pi`, `-0.2pi`, `pi`) and are
 * parsed independently of the C locale.
 */

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pathphase/errors.hpp"
#include "pathphase/fringe_lab.hpp"
#include "pathphase/state_engine.hpp"

namespace pathphase {

/// Position-carrying parse diagnostic.  line and column are 1-based.
struct ParseError {
  int line = 1;
  int column = 1;
  std::string message;
  std::string snippet;  ///< offending source line

  /// "line:col: message" followed by the snippet and a caret.
  std::string render() const;

  friend bool operator==(const ParseError&, const ParseError&) = default;
};

class ParseFailure : public Error {
public:
  explicit ParseFailure(ParseError error);
  const ParseError& error() const noexcept { return error_; }

private:
  ParseError error_;
};

/// Parses a finite number with optional `pi` suffix.  Returns nullopt for
/// anything else.
std::optional<double> parse_number(std::string_view token);

/// "%.9g"
std::string format_number(double value);

struct CircuitSpec {
  std::string name;
  std::vector<Element> elements;
  std::optional<double> reference_eta;

  double eta() const noexcept { return reference_eta.value_or(0.0); }
  /// Transmissivity and shifts carried by the elements (T = 1, chi = 0 when absent).
  double transmissivity() const noexcept;
  PhaseShift shifts() const noexcept;

  friend bool operator==(const CircuitSpec&, const CircuitSpec&) = default;
};

/// Throws ParseFailure.
CircuitSpec parse_circuit(std::string_view source);

/// Canonical text: one element per line, single spaces, numbers at 9
/// significant digits, no comments.
std::string render_circuit(const CircuitSpec& spec);

/// Runs the circuit on |p> and decomposes the phase against a |q> reference.
PhaseDecomposition simulate_circuit(const CircuitSpec& spec);

/// Interferogram of the circuit: intensity |psi_t' + e^{i eta} psi_r'|^2
/// scaled to `mean_counts` on average, eta = reference + 4pi k/n.
Interferogram circuit_interferogram(const CircuitSpec& spec, int n_points, double mean_counts = 1000.0);

struct SweepConfig {
  double dchi_from = -0.2 * kPi;
  double dchi_to = 3.0 * kPi;
  int steps = 160;
  double t1 = kDefaultT1;
  double t2 = kDefaultT2;
  double s1 = kDefaultS1;
  double s2 = kDefaultS2;
  double c = kDefaultDamping;
  bool compensated = true;
  std::string output = "-";

  static SweepConfig published_defaults() { return {}; }
  DampedModel model() const { return {t1, t2, s1, s2, c}; }
  std::vector<double> grid() const { return uniform_grid(dchi_from, dchi_to, steps); }

  friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

/// Throws ParseFailure.
SweepConfig parse_sweep(std::string_view source);

enum class OutputFormat { Csv, Json };

/// Throws DomainError for an unknown name.
OutputFormat parse_output_format(std::string_view name);

inline constexpr std::string_view kSweepCsvHeader =
    "dchi,phi_ideal,phi_damped,phi_dyn_residual,phi_geometric,omega,amplitude";
inline constexpr std::string_view kInterferogramCsvHeader = "eta,counts";
inline constexpr std::string_view kPhasePointCsvHeader = "dchi,phase";
inline constexpr std::string_view kDecompositionCsvHeader = "pancharatnam,dynamical,geometric,amplitude";

/// Emitters throw DomainError for empty input.  JSON mirrors the CSV columns
/// as an array of objects; a single decomposition is emitted as one object.
void emit_results(std::span<const SweepRow> rows, OutputFormat format, std::ostream& out);
void emit_results(const Interferogram& data, OutputFormat format, std::ostream& out);
void emit_results(std::span<const PhaseDecomposition> rows, OutputFormat format, std::ostream& out);
void emit_results(const PhaseDecomposition& row, OutputFormat format, std::ostream& out);

/// Writes through `write` into `path`, or to `fallback` when path is "-".
/// Throws IoError when the file cannot be written.
void write_destination(const std::string& path, std::ostream& fallback,
                       const std::function<void(std::ostream&)>& write);

void emit_phase_points(std::span<const PhasePoint> points, std::ostream& out);

/// CSV readers; header must match exactly.  Throw ParseFailure.
std::vector<PhasePoint> read_phase_points(std::string_view csv);
Interferogram read_interferogram(std::string_view csv);

/// Whole file as text.  Throws IoError.
std::string read_text_file(const std::string& path);

}  // namespace pathphase
