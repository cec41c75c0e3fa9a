#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lagdesc/fields.hpp"
#include "lagdesc/integrate.hpp"
#include "lagdesc/ldfield.hpp"

namespace lagdesc::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitNoValidNodes = 3,
  kExitIo = 4,
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown by parse_args for --help; what() holds the help text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Outputs {
  std::string m_csv;
  std::string dx_csv;
  std::string dy_csv;
  std::string mask_csv;
  std::string pgm;
};

struct RunConfig {
  /// Registry string: "saddle(l,m)", "separable(EXPR)" or "custom".
  std::string field;
  std::string dx_expr;
  std::string dy_expr;
  GridSpec grid;
  double t0 = 0.0;
  double tau = 10.0;
  IntegratorConfig integrator;
  double quantile = 0.0;
  Outputs outputs;
  std::string preset;
  std::optional<Vec2> oracle_point;

  /// Throws UsageError on inconsistent settings.
  void validate() const;
};

/// A named reproduction configuration.
struct Preset {
  std::string name;
  std::string field;
  double tau;
  GridSpec grid;
  std::string note;
};

const std::vector<Preset>& presets();
const Preset* find_preset(std::string_view name);

/// Parses "XMIN:XMAX:NX,YMIN:YMAX:NY".
GridSpec parse_grid(std::string_view text);

/// Flags override whatever a --preset filled in. Throws UsageError,
/// HelpRequested, or ParseError (for expressions given to --field).
RunConfig parse_args(int argc, const char* const* argv);

/// Builds the vector field named by the config. Expression errors surface
/// as ParseError.
VectorFieldDef build_field(const RunConfig& config);

/// End-to-end run. Summary goes to `out`, diagnostics to `err`; returns one of
/// the ExitCode values.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_args + run with all exceptions mapped to exit codes.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lagdesc::cli
