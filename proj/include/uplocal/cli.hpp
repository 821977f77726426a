#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "uplocal/numerics.hpp"

namespace uplocal::cli {

/// Malformed run specification; maps to exit code 2.
class SpecError : public std::runtime_error {
 public:
  SpecError(int line, const std::string& what)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

enum class Command { compute, optimize, hermite, periodize, sweep_direction };

const char* to_string(Command c) noexcept;

struct RunSpec {
  Command command = Command::compute;
  std::string function;
  std::optional<Vec> direction;
  std::optional<double> grid_R;
  std::optional<int> grid_n;
  Vec lambdas = {1, 2, 4, 8, 16};
  std::string out = "uplocal_out";
  bool svg = false;
  int cutoff = 10;
  int resolution = 0;  // 0: command default

  // Source lines of the function and direction keys, for diagnostics.
  int function_line = 0;
  int direction_line = 0;
};

/// Parses key=value lines; '#' starts a comment. Keys: command, function,
/// direction, grid_R, grid_n, lambdas, out, format, cutoff, resolution.
RunSpec parse_spec(const std::string& text);

/// Checks command-specific required fields and dimensions.
void validate(const RunSpec& spec);

/// Shortest round-trip decimal form; "nan"/"inf" for non-finite values.
std::string format_number(double v);

/// Executes the spec, writing <out>.csv (and <out>.svg, plus command-specific
/// side files). Returns 0, 1 on computation errors, 2 on spec errors; diagnostics
/// go to `err`.
int run(const RunSpec& spec, std::ostream& err);

/// Entry point shared by the executable: `uplocal <specfile>` or flags.
int main(int argc, char** argv);

/// Minimal single-series line chart.
std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const Vec& x, const Vec& y);

}  // namespace uplocal::cli
