#include "pathphase/circuit_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <map>
#include <ostream>
#include <sstream>

namespace pathphase {

namespace {

struct Token {
  std::string text;
  int column = 1;  // 1-based
};

struct Line {
  int number = 1;
  std::string_view text;
  std::vector<Token> tokens;
};

[[noreturn]] void fail(int line, int column, std::string message, std::string_view snippet) {
  throw ParseFailure(ParseError{line, column, std::move(message), std::string(snippet)});
}

[[noreturn]] void fail(const Line& line, int column, std::string message) {
  fail(line.number, column, std::move(message), line.text);
}

std::vector<std::string_view> split_lines(std::string_view source) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= source.size()) {
    const std::size_t end = source.find('\n', start);
    std::string_view line =
        source.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\v' || c == '\f'; }

// Splits a line into whitespace separated tokens.  A double-quoted token may
// contain spaces and the escapes \" and \\; it is stored with its quotes.
Line tokenize(int number, std::string_view text) {
  Line line{number, text, {}};
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_space(text[i])) {
      ++i;
      continue;
    }
    if (text[i] == '#') break;
    const std::size_t begin = i;
    if (text[i] == '"') {
      ++i;
      bool closed = false;
      while (i < text.size()) {
        if (text[i] == '\\' && i + 1 < text.size()) {
          i += 2;
          continue;
        }
        if (text[i++] == '"') {
          closed = true;
          break;
        }
      }
      if (!closed) fail(line, static_cast<int>(begin) + 1, "unterminated string");
      if (i < text.size() && !is_space(text[i]) && text[i] != '#') {
        fail(line, static_cast<int>(i) + 1, "unexpected character after string");
      }
    } else {
      while (i < text.size() && !is_space(text[i]) && text[i] != '#') ++i;
    }
    line.tokens.push_back({std::string(text.substr(begin, i - begin)), static_cast<int>(begin) + 1});
  }
  return line;
}

std::string unquote(const Line& line, const Token& token) {
  const std::string& t = token.text;
  if (t.size() < 2 || t.front() != '"' || t.back() != '"') fail(line, token.column, "expected quoted name");
  std::string out;
  for (std::size_t i = 1; i + 1 < t.size(); ++i) {
    if (t[i] == '\\') {
      const char next = t[++i];
      if (next != '"' && next != '\\') fail(line, token.column + static_cast<int>(i), "unknown escape");
      out.push_back(next);
    } else {
      out.push_back(t[i]);
    }
  }
  return out;
}

std::string quote(std::string_view name) {
  std::string out = "\"";
  for (char c : name) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

struct KeyValue {
  std::string key;
  std::string value;
  int key_column = 1;
  int value_column = 1;
};

KeyValue split_key_value(const Line& line, const Token& token) {
  const auto eq = token.text.find('=');
  if (eq == std::string::npos || eq == 0) fail(line, token.column, "expected key=value, got '" + token.text + "'");
  if (eq + 1 == token.text.size()) fail(line, token.column + static_cast<int>(eq) + 1, "missing value for '" + token.text.substr(0, eq) + "'");
  return {token.text.substr(0, eq), token.text.substr(eq + 1), token.column,
          token.column + static_cast<int>(eq) + 1};
}

double number_value(const Line& line, const KeyValue& kv) {
  const auto v = parse_number(kv.value);
  if (!v) fail(line, kv.value_column, "invalid number '" + kv.value + "' for " + kv.key);
  return *v;
}

// Reads the key=value arguments of a circuit element.  Every expected key is
// required exactly once.
std::map<std::string, double> element_arguments(const Line& line, std::initializer_list<std::string_view> keys) {
  std::map<std::string, double> values;
  for (std::size_t k = 1; k < line.tokens.size(); ++k) {
    const KeyValue kv = split_key_value(line, line.tokens[k]);
    bool known = false;
    for (auto key : keys) known = known || kv.key == key;
    if (!known) fail(line, kv.key_column, "unknown argument '" + kv.key + "' for " + line.tokens[0].text);
    if (values.count(kv.key)) fail(line, kv.key_column, "duplicate argument '" + kv.key + "'");
    values[kv.key] = number_value(line, kv);
  }
  for (auto key : keys) {
    if (!values.count(std::string(key))) {
      const auto& last = line.tokens.back();
      fail(line, last.column + static_cast<int>(last.text.size()),
           "missing argument '" + std::string(key) + "' for " + line.tokens[0].text);
    }
  }
  return values;
}

void expect_no_arguments(const Line& line) {
  if (line.tokens.size() > 1) {
    fail(line, line.tokens[1].column, "'" + line.tokens[0].text + "' takes no arguments");
  }
}

std::string json_dump(const nlohmann::ordered_json& j) { return j.dump() + "\n"; }

nlohmann::ordered_json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  // Round to 9 significant digits; the shortest round-trip form of the
  // rounded double then prints at most 9 digits.
  return std::stod(format_number(v));
}

}  // namespace

std::string ParseError::render() const {
  std::ostringstream os;
  os << line << ':' << column << ": " << message << '\n' << snippet << '\n';
  os << std::string(static_cast<std::size_t>(std::max(column - 1, 0)), ' ') << "^\n";
  return os.str();
}

ParseFailure::ParseFailure(ParseError error)
    : Error(std::to_string(error.line) + ":" + std::to_string(error.column) + ": " + error.message),
      error_(std::move(error)) {}

std::optional<double> parse_number(std::string_view token) {
  double scale = 1.0;
  if (token.size() >= 2 && token.substr(token.size() - 2) == "pi") {
    scale = kPi;
    token.remove_suffix(2);
    if (token.empty() || token == "+") return kPi;
    if (token == "-") return -kPi;
  }
  if (token.empty()) return std::nullopt;
  if (token.front() == '+') {
    token.remove_prefix(1);
    if (token.empty() || token.front() == '-' || token.front() == '+') return std::nullopt;
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value)) return std::nullopt;
  return value * scale;
}

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

double CircuitSpec::transmissivity() const noexcept {
  for (const auto& e : elements) {
    if (const auto* a = std::get_if<Attenuate>(&e)) return a->transmissivity;
  }
  return 1.0;
}

PhaseShift CircuitSpec::shifts() const noexcept {
  for (const auto& e : elements) {
    if (const auto* s = std::get_if<PhaseShift>(&e)) return *s;
  }
  return {};
}

CircuitSpec parse_circuit(std::string_view source) {
  const auto lines = split_lines(source);

  CircuitSpec spec;
  bool have_header = false;
  bool have_split = false;
  bool have_attenuate = false;
  bool have_phase = false;
  bool have_recombine = false;
  int last_line = 0;
  std::string_view last_text;

  for (std::size_t n = 0; n < lines.size(); ++n) {
    const Line line = tokenize(static_cast<int>(n) + 1, lines[n]);
    if (line.tokens.empty()) continue;
    last_line = line.number;
    last_text = line.text;
    const Token& keyword = line.tokens[0];
    const std::string& kw = keyword.text;

    if (!have_header) {
      if (kw != "circuit") fail(line, keyword.column, "missing circuit header");
      if (line.tokens.size() != 2) {
        fail(line, line.tokens.size() < 2 ? static_cast<int>(line.text.size()) + 1 : line.tokens[2].column,
             "circuit header takes exactly one quoted name");
      }
      spec.name = unquote(line, line.tokens[1]);
      have_header = true;
      continue;
    }

    if (kw == "circuit") fail(line, keyword.column, "duplicate circuit header");
    if (kw == "reference") {
      if (!have_recombine) fail(line, keyword.column, "reference must follow recombine");
      if (spec.reference_eta) fail(line, keyword.column, "duplicate element 'reference'");
      spec.reference_eta = element_arguments(line, {"eta"}).at("eta");
      continue;
    }
    if (kw != "split" && kw != "attenuate" && kw != "phase" && kw != "recombine") {
      fail(line, keyword.column, "unknown keyword '" + kw + "'");
    }
    if (have_recombine) {
      if (kw == "recombine") fail(line, keyword.column, "duplicate element 'recombine'");
      fail(line, keyword.column, "element '" + kw + "' after recombine");
    }

    if (kw == "split") {
      if (have_split) fail(line, keyword.column, "duplicate element 'split'");
      expect_no_arguments(line);
      spec.elements.emplace_back(SplitToQ{});
      have_split = true;
      continue;
    }
    if (!have_split) fail(line, keyword.column, "element '" + kw + "' before split");

    if (kw == "attenuate") {
      if (have_attenuate) fail(line, keyword.column, "duplicate element 'attenuate'");
      const double t = element_arguments(line, {"T"}).at("T");
      if (t < 0.0 || t > 1.0) {
        const auto kv = split_key_value(line, line.tokens[1]);
        fail(line, kv.value_column, "T out of range [0,1]");
      }
      spec.elements.emplace_back(Attenuate{t});
      have_attenuate = true;
    } else if (kw == "phase") {
      if (have_phase) fail(line, keyword.column, "duplicate element 'phase'");
      const auto args = element_arguments(line, {"chi1", "chi2"});
      spec.elements.emplace_back(PhaseShift{args.at("chi1"), args.at("chi2")});
      have_phase = true;
    } else {
      expect_no_arguments(line);
      spec.elements.emplace_back(RecombineQ{});
      have_recombine = true;
    }
  }

  if (!have_header) fail(1, 1, "missing circuit header", lines.empty() ? std::string_view{} : lines[0]);
  const int end_column = static_cast<int>(last_text.size()) + 1;
  if (!have_split) fail(last_line, end_column, "missing required element 'split'", last_text);
  if (!have_recombine) fail(last_line, end_column, "missing required element 'recombine'", last_text);
  return spec;
}

std::string render_circuit(const CircuitSpec& spec) {
  std::string out = "circuit " + quote(spec.name) + "\n";
  for (const auto& e : spec.elements) {
    if (std::holds_alternative<SplitToQ>(e)) {
      out += "split\n";
    } else if (const auto* a = std::get_if<Attenuate>(&e)) {
      out += "attenuate T=" + format_number(a->transmissivity) + "\n";
    } else if (const auto* s = std::get_if<PhaseShift>(&e)) {
      out += "phase chi1=" + format_number(s->chi1) + " chi2=" + format_number(s->chi2) + "\n";
    } else {
      out += "recombine\n";
    }
  }
  if (spec.reference_eta) out += "reference eta=" + format_number(*spec.reference_eta) + "\n";
  return out;
}

PhaseDecomposition simulate_circuit(const CircuitSpec& spec) {
  const PathState out = apply_elements(spec.elements, PathState::lower());
  const PathState reference = PathState::q();
  const double t = spec.transmissivity();
  const PhaseShift s = spec.shifts();

  PhaseDecomposition d;
  d.pancharatnam = pancharatnam_phase(out, reference);
  d.dynamical = dynamical_phase(t, s.chi1, s.chi2);
  d.geometric = d.pancharatnam - d.dynamical;
  d.amplitude = std::abs(inner_product(reference, out));
  return d;
}

Interferogram circuit_interferogram(const CircuitSpec& spec, int n_points, double mean_counts) {
  if (n_points < 5) throw DomainError("interferogram needs at least 5 points");
  if (!std::isfinite(mean_counts) || mean_counts <= 0.0) throw DomainError("mean counts must be positive");

  const PathState beam = apply_elements(spec.elements, PathState::lower());
  const PathState reference = apply_element(PathState::upper(), RecombineQ{});
  const double mean_intensity = beam.norm_squared() + reference.norm_squared();

  Interferogram out;
  for (int k = 0; k < n_points; ++k) {
    const double eta = spec.eta() + 2.0 * kTwoPi * static_cast<double>(k) / n_points;
    const Amplitude shift = std::polar(1.0, eta);
    const PathState sum{beam.perp + shift * reference.perp, beam.p + shift * reference.p};
    out.eta.push_back(eta);
    out.counts.push_back(mean_counts * sum.norm_squared() / mean_intensity);
  }
  return out;
}

SweepConfig parse_sweep(std::string_view source) {
  struct Seen {
    int line;
    int column;
    std::string_view snippet;
  };
  const auto lines = split_lines(source);
  SweepConfig config;
  std::map<std::string, Seen> seen;

  auto bad = [](const Seen& at, std::string message) -> void {
    fail(at.line, at.column, std::move(message), at.snippet);
  };

  for (std::size_t n = 0; n < lines.size(); ++n) {
    const Line line = tokenize(static_cast<int>(n) + 1, lines[n]);
    for (const Token& token : line.tokens) {
      const KeyValue kv = split_key_value(line, token);
      if (seen.count(kv.key)) fail(line, kv.key_column, "duplicate key '" + kv.key + "'");
      const Seen at{line.number, kv.value_column, line.text};

      if (kv.key == "steps") {
        int steps = 0;
        const auto [ptr, ec] = std::from_chars(kv.value.data(), kv.value.data() + kv.value.size(), steps);
        if (ec != std::errc() || ptr != kv.value.data() + kv.value.size()) {
          fail(line, kv.value_column, "steps must be an integer");
        }
        config.steps = steps;
      } else if (kv.key == "compensated") {
        if (kv.value == "true" || kv.value == "1" || kv.value == "yes") {
          config.compensated = true;
        } else if (kv.value == "false" || kv.value == "0" || kv.value == "no") {
          config.compensated = false;
        } else {
          fail(line, kv.value_column, "compensated must be true or false");
        }
      } else if (kv.key == "output") {
        config.output = kv.value;
      } else {
        double* target = nullptr;
        if (kv.key == "dchi_from") target = &config.dchi_from;
        else if (kv.key == "dchi_to") target = &config.dchi_to;
        else if (kv.key == "T1") target = &config.t1;
        else if (kv.key == "T2") target = &config.t2;
        else if (kv.key == "s1") target = &config.s1;
        else if (kv.key == "s2") target = &config.s2;
        else if (kv.key == "C") target = &config.c;
        else fail(line, kv.key_column, "unknown key '" + kv.key + "'");
        *target = number_value(line, kv);
      }
      seen.emplace(kv.key, at);
    }
  }

  const Seen origin{1, 1, lines.empty() ? std::string_view{} : lines[0]};
  auto where = [&](const char* key) { return seen.count(key) ? seen.at(key) : origin; };

  if (seen.count("s1") && !seen.count("s2")) config.s2 = 1.0 - config.s1;
  if (config.steps < 2) bad(where("steps"), "steps must be at least 2");
  if (!(config.dchi_from < config.dchi_to)) {
    bad(where(seen.count("dchi_to") ? "dchi_to" : "dchi_from"), "dchi_from must be less than dchi_to");
  }
  for (const char* key : {"T1", "T2"}) {
    const double t = key[1] == '1' ? config.t1 : config.t2;
    if (!(t > 0.0 && t <= 1.0)) bad(where(key), std::string(key) + " out of range (0,1]");
  }
  if (config.t2 > config.t1) bad(where("T2"), "T2/T1 must not exceed 1");
  if (config.c < 0.0 || config.c > 1.0) bad(where("C"), "C out of range [0,1]");
  if (config.s1 < 0.0 || config.s1 > 1.0) bad(where("s1"), "s1 out of range [0,1]");
  if (std::abs(config.s1 + config.s2 - 1.0) > 1e-9) {
    bad(where(seen.count("s2") ? "s2" : "s1"), "s1+s2 must equal 1");
  }
  return config;
}

OutputFormat parse_output_format(std::string_view name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "json") return OutputFormat::Json;
  throw DomainError("unknown output format '" + std::string(name) + "'");
}

void emit_results(std::span<const SweepRow> rows, OutputFormat format, std::ostream& out) {
  if (rows.empty()) throw DomainError("no sweep rows to emit");
  if (format == OutputFormat::Csv) {
    out << kSweepCsvHeader << '\n';
    for (const auto& r : rows) {
      out << format_number(r.dchi) << ',' << format_number(r.phi_ideal) << ',' << format_number(r.phi_damped)
          << ',' << format_number(r.phi_dynamical_residual) << ',' << format_number(r.phi_geometric) << ','
          << format_number(r.omega) << ',' << format_number(r.amplitude) << '\n';
    }
    return;
  }
  auto j = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    j.push_back({{"dchi", json_number(r.dchi)},
                 {"phi_ideal", json_number(r.phi_ideal)},
                 {"phi_damped", json_number(r.phi_damped)},
                 {"phi_dyn_residual", json_number(r.phi_dynamical_residual)},
                 {"phi_geometric", json_number(r.phi_geometric)},
                 {"omega", json_number(r.omega)},
                 {"amplitude", json_number(r.amplitude)}});
  }
  out << json_dump(j);
}

void emit_results(const Interferogram& data, OutputFormat format, std::ostream& out) {
  if (data.eta.empty()) throw DomainError("no interferogram rows to emit");
  if (data.eta.size() != data.counts.size()) throw DomainError("interferogram eta and counts differ in length");
  if (format == OutputFormat::Csv) {
    out << kInterferogramCsvHeader << '\n';
    for (std::size_t k = 0; k < data.eta.size(); ++k) {
      out << format_number(data.eta[k]) << ',' << format_number(data.counts[k]) << '\n';
    }
    return;
  }
  auto j = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < data.eta.size(); ++k) {
    j.push_back({{"eta", json_number(data.eta[k])}, {"counts", json_number(data.counts[k])}});
  }
  out << json_dump(j);
}

namespace {

nlohmann::ordered_json decomposition_json(const PhaseDecomposition& d) {
  return {{"pancharatnam", json_number(d.pancharatnam)},
          {"dynamical", json_number(d.dynamical)},
          {"geometric", json_number(d.geometric)},
          {"amplitude", json_number(d.amplitude)}};
}

void decomposition_csv_row(const PhaseDecomposition& d, std::ostream& out) {
  out << format_number(d.pancharatnam) << ',' << format_number(d.dynamical) << ','
      << format_number(d.geometric) << ',' << format_number(d.amplitude) << '\n';
}

}  // namespace

void emit_results(std::span<const PhaseDecomposition> rows, OutputFormat format, std::ostream& out) {
  if (rows.empty()) throw DomainError("no decompositions to emit");
  if (format == OutputFormat::Csv) {
    out << kDecompositionCsvHeader << '\n';
    for (const auto& d : rows) decomposition_csv_row(d, out);
    return;
  }
  auto j = nlohmann::ordered_json::array();
  for (const auto& d : rows) j.push_back(decomposition_json(d));
  out << json_dump(j);
}

void emit_results(const PhaseDecomposition& row, OutputFormat format, std::ostream& out) {
  if (format == OutputFormat::Csv) {
    out << kDecompositionCsvHeader << '\n';
    decomposition_csv_row(row, out);
    return;
  }
  out << json_dump(decomposition_json(row));
}

void emit_phase_points(std::span<const PhasePoint> points, std::ostream& out) {
  if (points.empty()) throw DomainError("no phase points to emit");
  out << kPhasePointCsvHeader << '\n';
  for (const auto& p : points) out << format_number(p.dchi) << ',' << format_number(p.phase) << '\n';
}

void write_destination(const std::string& path, std::ostream& fallback,
                       const std::function<void(std::ostream&)>& write) {
  if (path == "-") {
    write(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError(path, "cannot open for writing");
  write(file);
  file.flush();
  if (!file) throw IoError(path, "write failed");
}

namespace {

// Two-column numeric CSV with a fixed header.
std::vector<std::pair<double, double>> read_two_columns(std::string_view csv, std::string_view header) {
  const auto lines = split_lines(csv);
  std::vector<std::pair<double, double>> rows;
  bool have_header = false;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const int number = static_cast<int>(n) + 1;
    std::string_view text = lines[n];
    if (text.find_first_not_of(" \t") == std::string_view::npos) continue;
    if (!have_header) {
      if (text != header) fail(number, 1, "expected header '" + std::string(header) + "'", text);
      have_header = true;
      continue;
    }
    const auto comma = text.find(',');
    if (comma == std::string_view::npos || text.find(',', comma + 1) != std::string_view::npos) {
      fail(number, 1, "expected two comma separated values", text);
    }
    const auto first = parse_number(text.substr(0, comma));
    if (!first) fail(number, 1, "invalid number", text);
    const auto second = parse_number(text.substr(comma + 1));
    if (!second) fail(number, static_cast<int>(comma) + 2, "invalid number", text);
    rows.emplace_back(*first, *second);
  }
  if (!have_header) fail(1, 1, "expected header '" + std::string(header) + "'", "");
  return rows;
}

}  // namespace

std::vector<PhasePoint> read_phase_points(std::string_view csv) {
  std::vector<PhasePoint> out;
  for (const auto& [dchi, phase] : read_two_columns(csv, kPhasePointCsvHeader)) out.push_back({dchi, phase});
  return out;
}

Interferogram read_interferogram(std::string_view csv) {
  Interferogram out;
  for (const auto& [eta, counts] : read_two_columns(csv, kInterferogramCsvHeader)) {
    out.eta.push_back(eta);
    out.counts.push_back(counts);
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError(path, "cannot open for reading");
  std::ostringstream ss;
  ss << file.rdbuf();
  if (file.bad()) throw IoError(path, "read failed");
  return ss.str();
}

}  // namespace pathphase
