#include "uplocal/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "uplocal/direction.hpp"
#include "uplocal/hermite.hpp"
#include "uplocal/periodization.hpp"

namespace uplocal::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& s, int line, const std::string& key) {
  double v = 0.0;
  const std::string t = trim(s);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw SpecError(line, "malformed number '" + t + "' for " + key);
  }
  return v;
}

int to_int(const std::string& s, int line, const std::string& key) {
  int v = 0;
  const std::string t = trim(s);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw SpecError(line, "malformed integer '" + t + "' for " + key);
  }
  return v;
}

Vec to_list(const std::string& s, int line, const std::string& key) {
  Vec out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(to_double(tok, line, key));
  if (out.empty()) throw SpecError(line, "empty list for " + key);
  return out;
}

Command to_command(const std::string& s, int line) {
  static const std::map<std::string, Command> names = {{"compute", Command::compute},
                                                       {"optimize", Command::optimize},
                                                       {"hermite", Command::hermite},
                                                       {"periodize", Command::periodize},
                                                       {"sweep-direction", Command::sweep_direction}};
  const auto it = names.find(s);
  if (it == names.end()) throw SpecError(line, "unknown command '" + s + "'");
  return it->second;
}

bool to_format(const std::string& s, int line) {
  if (s == "csv") return false;
  if (s == "csv+svg") return true;
  throw SpecError(line, "format must be csv or csv+svg, got '" + s + "'");
}

void apply(RunSpec& spec, const std::string& key, const std::string& value, int line) {
  if (key == "command") {
    spec.command = to_command(value, line);
  } else if (key == "function") {
    spec.function = value;
    spec.function_line = line;
  } else if (key == "direction") {
    spec.direction = to_list(value, line, key);
    spec.direction_line = line;
  } else if (key == "grid_R") {
    spec.grid_R = to_double(value, line, key);
  } else if (key == "grid_n") {
    spec.grid_n = to_int(value, line, key);
  } else if (key == "lambdas") {
    spec.lambdas = to_list(value, line, key);
  } else if (key == "out") {
    spec.out = value;
  } else if (key == "format") {
    spec.svg = to_format(value, line);
  } else if (key == "cutoff") {
    spec.cutoff = to_int(value, line, key);
  } else if (key == "resolution") {
    spec.resolution = to_int(value, line, key);
  } else {
    throw SpecError(line, "unknown key '" + key + "'");
  }
}

CatalogFunction parse_function(const RunSpec& spec) {
  if (spec.function.empty()) throw SpecError(0, "missing required key 'function'");
  try {
    return CatalogFunction::parse(spec.function);
  } catch (const Error& e) {
    throw SpecError(spec.function_line, e.what());
  }
}

// ---------------------------------------------------------------------------
// Output

struct Row {
  std::string param;
  std::optional<double> sweep;
  Vec L;
  std::optional<double> delta_A, delta_B, up, sum_functional;
  std::string flag;
};

class Table {
 public:
  Table(std::string command, std::string function, int dim)
      : command_(std::move(command)), function_(std::move(function)), dim_(dim) {}

  void add(Row r) { rows_.push_back(std::move(r)); }
  const std::vector<Row>& rows() const { return rows_; }

  void write(std::ostream& os) const {
    os << "command,function,param,lambda_or_angle";
    for (int k = 1; k <= dim_; ++k) os << ",L" << k;
    os << ",delta_A,delta_B,up,sum_functional,flag\n";
    for (const auto& r : rows_) {
      os << command_ << ',' << quote(function_) << ',' << quote(r.param) << ',' << opt(r.sweep);
      for (int k = 0; k < dim_; ++k) os << ',' << (k < static_cast<int>(r.L.size()) ? format_number(r.L[k]) : "");
      os << ',' << opt(r.delta_A) << ',' << opt(r.delta_B) << ',' << opt(r.up) << ',' << opt(r.sum_functional) << ','
         << quote(r.flag) << '\n';
    }
  }

 private:
  static std::string opt(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }
  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  }

  std::string command_, function_;
  int dim_;
  std::vector<Row> rows_;
};

Row report_row(std::string param, const LocalizationReport& r) {
  Row row;
  row.param = std::move(param);
  row.L = r.direction;
  row.delta_A = r.delta_A;
  row.delta_B = r.delta_B;
  row.up = r.up;
  row.sum_functional = r.sum_functional;
  for (std::size_t i = 0; i < r.warnings.size(); ++i) row.flag += (i ? ";" : "") + r.warnings[i];
  return row;
}

std::optional<Grid> grid_override(const RunSpec& spec, int dim) {
  if (!spec.grid_R && !spec.grid_n) return std::nullopt;
  const double R = spec.grid_R.value_or(8.0);
  const int n = spec.grid_n.value_or(512);
  return Grid::box(dim, R, n);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write '" + path + "'");
  out << content;
}

Table run_compute(const RunSpec& spec, const CatalogFunction& f) {
  Table t("compute", f.name(), f.dim());
  const MomentSet m = moments(f, MomentRoute::automatic, grid_override(spec, f.dim()));
  t.add(report_row("", up_directional(m, *spec.direction)));
  return t;
}

Table run_optimize(const RunSpec& spec, const CatalogFunction& f) {
  const int d = f.dim();
  Table t("optimize", f.name(), d);
  const MomentSet m = moments(f, MomentRoute::automatic, grid_override(spec, d));
  try {
    const CandidateSet set = extremal_directions(build_A_matrix(m));
    for (std::size_t i = 0; i < set.candidates.size(); ++i) {
      const Candidate& c = set.candidates[i];
      Row row = report_row("candidate", up_directional(m, c.direction));
      row.up = c.up_value;
      if (i == set.min_index) row.flag += row.flag.empty() ? "min" : ";min";
      if (i == set.max_index) row.flag += row.flag.empty() ? "max" : ";max";
      t.add(std::move(row));
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::symmetry_violation) throw;
    Row row;
    row.param = "candidate";
    row.flag = to_string(e.code());
    t.add(std::move(row));
  }
  const SumFunctionalExtremes ex = optimize_sum_functional(build_M_matrix(m));
  for (const auto& [name, e] : {std::pair{"eigen_min", ex.min}, std::pair{"eigen_max", ex.max}}) {
    Row row = report_row(name, up_directional(m, e.direction));
    row.sum_functional = e.value;
    if (ex.isotropic) row.flag += row.flag.empty() ? "isotropic" : ";isotropic";
    t.add(std::move(row));
  }
  if (d == 2 || d == 3) {
    const int res = spec.resolution > 0 ? spec.resolution : 10000;
    const BruteForceResult up = sphere_bruteforce(m, res, SphereObjective::up);
    const BruteForceResult sf = sphere_bruteforce(m, res, SphereObjective::sum_functional);
    const std::pair<const char*, const Vec*> dirs[] = {{"bruteforce_up_min", &up.argmin},
                                                       {"bruteforce_up_max", &up.argmax},
                                                       {"bruteforce_sum_min", &sf.argmin},
                                                       {"bruteforce_sum_max", &sf.argmax}};
    for (const auto& [name, dir] : dirs) t.add(report_row(name, up_directional(m, *dir)));
  }
  return t;
}

Table run_hermite(const RunSpec& spec, const CatalogFunction& f) {
  Table t("hermite", f.name(), f.dim());
  const HermiteExpansion e = expand(f, spec.cutoff);
  write_expansion(spec.out + "_hermite.txt", e);
  const HermiteReport r = hermite_report(e, *spec.direction);
  Row row;
  row.param = "cutoff=" + std::to_string(spec.cutoff);
  row.L = *spec.direction;
  row.delta_A = r.delta_A;
  row.delta_B = r.delta_B;
  row.up = r.up;
  row.sum_functional = r.sum_functional;
  if (odd_symmetry_check(e)) row.flag = "odd_symmetric";
  t.add(std::move(row));
  return t;
}

Table run_periodize(const RunSpec& spec, const CatalogFunction& f) {
  Table t("periodize", f.name(), f.dim());
  const bool gg = f.dim() >= 2;
  const SweepResult sweep = convergence_sweep(f, *spec.direction, spec.lambdas, gg);
  std::ostringstream side;
  side << "lambda,var_A_scaled,var_F_scaled,up_periodic,error,up_gg_periodic,gg_error,truncation,points_per_axis,flag\n";
  for (const auto& r : sweep.rows) {
    Row row;
    row.param = "err=" + format_number(r.error);
    row.sweep = r.lambda;
    row.L = *spec.direction;
    row.delta_A = r.var_A_scaled;
    row.delta_B = r.var_F_scaled;
    row.up = r.up_periodic;
    row.flag = r.flag;
    t.add(std::move(row));
    side << format_number(r.lambda) << ',' << format_number(r.var_A_scaled) << ',' << format_number(r.var_F_scaled)
         << ',' << format_number(r.up_periodic) << ',' << format_number(r.error) << ','
         << (gg ? format_number(r.up_gg_periodic) : "") << ',' << (gg ? format_number(r.gg_error) : "") << ','
         << r.truncation << ',' << r.points_per_axis << ',' << r.flag << '\n';
  }
  write_file(spec.out + "_sweep.csv", side.str());
  return t;
}

Table run_sweep_direction(const RunSpec& spec, const CatalogFunction& f) {
  const int d = f.dim();
  Table t("sweep-direction", f.name(), d);
  const MomentSet m = moments(f, MomentRoute::automatic, grid_override(spec, d));
  const int res = spec.resolution > 0 ? spec.resolution : 360;
  if (d == 1) {
    t.add(report_row("", up_directional(m, Vec{1.0})));
    return t;
  }
  const auto dirs = sphere_directions(d, res);
  for (std::size_t j = 0; j < dirs.size(); ++j) {
    Row row = report_row("", up_directional(m, dirs[j]));
    row.sweep = d == 2 ? kTwoPi * static_cast<double>(j) / res : static_cast<double>(j);
    t.add(std::move(row));
  }
  return t;
}

}  // namespace

const char* to_string(Command c) noexcept {
  switch (c) {
    case Command::compute: return "compute";
    case Command::optimize: return "optimize";
    case Command::hermite: return "hermite";
    case Command::periodize: return "periodize";
    case Command::sweep_direction: return "sweep-direction";
  }
  return "?";
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

namespace {

RunSpec parse_lines(const std::string& text) {
  RunSpec spec;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw SpecError(line, "expected key=value, got '" + s + "'");
    apply(spec, trim(s.substr(0, eq)), trim(s.substr(eq + 1)), line);
  }
  return spec;
}

}  // namespace

RunSpec parse_spec(const std::string& text) {
  RunSpec spec = parse_lines(text);
  validate(spec);
  return spec;
}

void validate(const RunSpec& spec) {
  const CatalogFunction f = parse_function(spec);
  const bool needs_direction = spec.command == Command::compute || spec.command == Command::hermite ||
                               spec.command == Command::periodize;
  if (needs_direction && !spec.direction) {
    throw SpecError(0, std::string("command ") + to_string(spec.command) + " requires a direction");
  }
  if (spec.direction) {
    if (static_cast<int>(spec.direction->size()) != f.dim()) {
      throw SpecError(spec.direction_line, "direction has " + std::to_string(spec.direction->size()) +
                                               " components but " + f.name() + " has dimension " +
                                               std::to_string(f.dim()));
    }
    if (!(norm2(*spec.direction) > 0.0)) throw SpecError(spec.direction_line, "direction must be nonzero");
    if (spec.command == Command::periodize) {
      for (double v : *spec.direction) {
        if (v != std::round(v)) throw SpecError(spec.direction_line, "periodize needs an integer direction");
      }
    }
  }
  if (spec.grid_R && !(*spec.grid_R > 0.0)) throw SpecError(0, "grid_R must be positive");
  if (spec.grid_n && *spec.grid_n < 4) throw SpecError(0, "grid_n must be at least 4");
  if (spec.cutoff < 0) throw SpecError(0, "cutoff must be nonnegative");
  if (spec.resolution < 0) throw SpecError(0, "resolution must be nonnegative");
  for (std::size_t i = 0; i < spec.lambdas.size(); ++i) {
    if (!(spec.lambdas[i] > 0.0) || (i > 0 && !(spec.lambdas[i] > spec.lambdas[i - 1]))) {
      throw SpecError(0, "lambdas must be positive and ascending");
    }
  }
  if (spec.out.empty()) throw SpecError(0, "out must not be empty");
}

std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const Vec& x, const Vec& y) {
  constexpr double W = 640, H = 400, ml = 70, mr = 20, mt = 40, mb = 50;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  bool first = true;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
    if (first) {
      x0 = x1 = x[i];
      y0 = y1 = y[i];
      first = false;
    }
    x0 = std::min(x0, x[i]);
    x1 = std::max(x1, x[i]);
    y0 = std::min(y0, y[i]);
    y1 = std::max(y1, y[i]);
  }
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  auto px = [&](double v) { return ml + (v - x0) / (x1 - x0) * (W - ml - mr); };
  auto py = [&](double v) { return H - mb - (v - y0) / (y1 - y0) * (H - mt - mb); };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << ' ' << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
     << title << "</text>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\"" << H - mb
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
     << "\" stroke=\"black\"/>\n";
  auto label = [&](double vx, double vy, const std::string& s, const char* anchor) {
    os << "<text x=\"" << vx << "\" y=\"" << vy << "\" text-anchor=\"" << anchor
       << "\" font-family=\"sans-serif\" font-size=\"11\">" << s << "</text>\n";
  };
  label(ml, H - mb + 16, format_number(x0), "middle");
  label(W - mr, H - mb + 16, format_number(x1), "middle");
  label(ml - 6, H - mb, format_number(y0), "end");
  label(ml - 6, mt + 4, format_number(y1), "end");
  label((ml + W - mr) / 2, H - 12, x_label, "middle");
  os << "<text x=\"16\" y=\"" << (mt + H - mb) / 2 << "\" transform=\"rotate(-90 16 " << (mt + H - mb) / 2
     << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << y_label << "</text>\n";
  os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
  bool sep = false;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
    os << (sep ? " " : "") << px(x[i]) << ',' << py(y[i]);
    sep = true;
  }
  os << "\"/>\n</svg>\n";
  return os.str();
}

int run(const RunSpec& spec, std::ostream& err) {
  try {
    validate(spec);
    const CatalogFunction f = parse_function(spec);
    Table table = [&] {
      switch (spec.command) {
        case Command::compute: return run_compute(spec, f);
        case Command::optimize: return run_optimize(spec, f);
        case Command::hermite: return run_hermite(spec, f);
        case Command::periodize: return run_periodize(spec, f);
        case Command::sweep_direction: return run_sweep_direction(spec, f);
      }
      throw SpecError(0, "unknown command");
    }();
    std::ostringstream csv;
    table.write(csv);
    write_file(spec.out + ".csv", csv.str());
    if (spec.svg) {
      Vec x, y;
      for (std::size_t i = 0; i < table.rows().size(); ++i) {
        const Row& r = table.rows()[i];
        x.push_back(r.sweep.value_or(static_cast<double>(i)));
        y.push_back(r.up.value_or(std::numeric_limits<double>::quiet_NaN()));
      }
      const char* x_label = spec.command == Command::periodize         ? "lambda"
                            : spec.command == Command::sweep_direction ? "angle"
                                                                       : "row";
      write_file(spec.out + ".svg",
                 svg_line_chart(std::string(to_string(spec.command)) + " " + f.name(), x_label, "up", x, y));
    }
    return 0;
  } catch (const SpecError& e) {
    err << "uplocal: spec error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "uplocal: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "uplocal: " << e.what() << '\n';
    return 1;
  }
}

int main(int argc, char** argv) {
  CLI::App app{"Directional time-frequency localization measures"};
  std::string specfile, command, function, direction, lambdas, out, format;
  std::optional<double> grid_R;
  std::optional<int> grid_n, cutoff, resolution;
  app.add_option("specfile", specfile, "Run specification (key=value lines)");
  app.add_option("--command", command, "compute | optimize | hermite | periodize | sweep-direction");
  app.add_option("--function", function, "Catalog function, e.g. gaussian_diag:1,4");
  app.add_option("--direction", direction, "Comma-separated direction L");
  app.add_option("--grid-R", grid_R, "Box halfwidth override");
  app.add_option("--grid-n", grid_n, "Points per axis override");
  app.add_option("--lambdas", lambdas, "Comma-separated ascending scales for periodize");
  app.add_option("--out", out, "Output path prefix");
  app.add_option("--format", format, "csv | csv+svg");
  app.add_option("--cutoff", cutoff, "Hermite cutoff");
  app.add_option("--resolution", resolution, "Sphere or angle sample count");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunSpec spec;
    if (!specfile.empty()) {
      std::ifstream in(specfile);
      if (!in) throw SpecError(0, "cannot open spec file '" + specfile + "'");
      std::stringstream ss;
      ss << in.rdbuf();
      spec = parse_lines(ss.str());
    }
    if (!command.empty()) spec.command = to_command(command, 0);
    if (!function.empty()) spec.function = function;
    if (!direction.empty()) spec.direction = to_list(direction, 0, "direction");
    if (grid_R) spec.grid_R = grid_R;
    if (grid_n) spec.grid_n = grid_n;
    if (!lambdas.empty()) spec.lambdas = to_list(lambdas, 0, "lambdas");
    if (!out.empty()) spec.out = out;
    if (!format.empty()) spec.svg = to_format(format, 0);
    if (cutoff) spec.cutoff = *cutoff;
    if (resolution) spec.resolution = *resolution;
    return run(spec, std::cerr);
  } catch (const SpecError& e) {
    std::cerr << "uplocal: spec error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace uplocal::cli
