#include "lagdesc/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <set>

#include "lagdesc/analyze.hpp"
#include "lagdesc/expr.hpp"
#include "lagdesc/io.hpp"
#include "lagdesc/reference.hpp"

namespace lagdesc::cli {

namespace {

constexpr GridSpec kPresetGrid{-1.0, 1.0, -1.0, 1.0, 201, 201};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_real(std::string_view s, std::string_view what) {
  s = trim(s);
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last || !std::isfinite(v)) {
    throw UsageError("malformed " + std::string(what) + ": '" + std::string(s) + "'");
  }
  return v;
}

std::size_t parse_count(std::string_view s, std::string_view what) {
  s = trim(s);
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw UsageError("malformed " + std::string(what) + ": '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  for (;;) {
    const std::size_t p = s.find(sep);
    parts.push_back(s.substr(0, p));
    if (p == std::string_view::npos) return parts;
    s.remove_prefix(p + 1);
  }
}

// Re-parses `source` and shifts error offsets so they point into the whole
// flag value rather than the embedded expression.
Expr parse_embedded(std::string_view source, std::size_t shift) {
  try {
    return parse(source);
  } catch (const ParseError& e) {
    throw ParseError(e.offset() + shift, e.message(), e.token());
  }
}

bool has_call_form(std::string_view field_spec, std::string_view name) {
  return field_spec.size() > name.size() + 1 && field_spec.substr(0, name.size()) == name &&
         field_spec[name.size()] == '(' && field_spec.back() == ')';
}

// Options whose value may legitimately start with '-' ("-y", "-1:1:201,...").
const std::set<std::string, std::less<>> kValueOptions{
    "--field", "--dx", "--dy", "--grid", "--t0", "--tau", "--method", "--step",
    "--rtol", "--atol", "--preset", "--out-m", "--out-dx", "--out-dy", "--out-mask",
    "--pgm", "--oracle", "--quantile"};

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> kPresets{
      {"fig1", "saddle(1,1)", 20.0, kPresetGrid, "linear saddle, equal rates"},
      {"fig2", "separable(tanh(x))", 10.0, kPresetGrid,
       "separable incompressible field with stand-in f(x) = tanh(x)"},
      {"fig3a", "saddle(1,2)", 10.0, kPresetGrid, "lambda=1, mu=2 (dM/dx0 panel)"},
      {"fig3b", "saddle(1,2)", 10.0, kPresetGrid, "lambda=1, mu=2 (dM/dy0 panel)"},
      {"fig3c", "saddle(2,1)", 10.0, kPresetGrid, "lambda=2, mu=1 (dM/dx0 panel)"},
      {"fig3d", "saddle(2,1)", 10.0, kPresetGrid, "lambda=2, mu=1 (dM/dy0 panel)"},
  };
  return kPresets;
}

const Preset* find_preset(std::string_view name) {
  for (const auto& p : presets()) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

GridSpec parse_grid(std::string_view text) {
  const auto axes = split(trim(text), ',');
  if (axes.size() != 2) throw UsageError("grid must look like XMIN:XMAX:NX,YMIN:YMAX:NY");
  const auto xs = split(axes[0], ':');
  const auto ys = split(axes[1], ':');
  if (xs.size() != 3 || ys.size() != 3) {
    throw UsageError("grid must look like XMIN:XMAX:NX,YMIN:YMAX:NY");
  }
  GridSpec g;
  g.xmin = parse_real(xs[0], "grid bound");
  g.xmax = parse_real(xs[1], "grid bound");
  g.nx = parse_count(xs[2], "grid node count");
  g.ymin = parse_real(ys[0], "grid bound");
  g.ymax = parse_real(ys[1], "grid bound");
  g.ny = parse_count(ys[2], "grid node count");
  return g;
}

void RunConfig::validate() const {
  if (field.empty() && dx_expr.empty() && dy_expr.empty()) {
    throw UsageError("missing field: give --field, --dx/--dy or --preset");
  }
  try {
    grid.validate();
    integrator.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (grid.nx < 3 || grid.ny < 3) {
    throw UsageError("grid needs at least 3 nodes per axis to take derivatives");
  }
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw UsageError("--tau must be a non-negative number");
  if (!std::isfinite(t0)) throw UsageError("--t0 must be finite");
  if (!(quantile >= 0.0 && quantile < 1.0)) throw UsageError("--quantile must lie in [0, 1)");
  build_field(*this);
}

VectorFieldDef build_field(const RunConfig& config) {
  const std::string_view field_spec = trim(config.field);
  const bool have_exprs = !config.dx_expr.empty() || !config.dy_expr.empty();

  if (field_spec.empty() || field_spec == "custom") {
    if (config.dx_expr.empty() || config.dy_expr.empty()) {
      throw UsageError("custom field needs both --dx and --dy");
    }
    auto parse_flag = [](const std::string& source, std::string_view flag) {
      try {
        return parse(source);
      } catch (const ParseError& e) {
        throw UsageError(std::string(flag) + " '" + source + "': " + e.what());
      }
    };
    return from_expressions(parse_flag(config.dx_expr, "--dx"), parse_flag(config.dy_expr, "--dy"));
  }
  if (have_exprs) throw UsageError("--dx/--dy only apply to --field custom");

  if (has_call_form(field_spec, "saddle")) {
    const auto args = split(field_spec.substr(7, field_spec.size() - 8), ',');
    if (args.size() != 2) throw UsageError("saddle takes two rates: saddle(lambda,mu)");
    const SaddleParams p{parse_real(args[0], "saddle rate"), parse_real(args[1], "saddle rate")};
    try {
      return linear_saddle(p);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (has_call_form(field_spec, "separable")) {
    constexpr std::size_t kPrefix = 10;  // "separable("
    const Expr f = parse_embedded(field_spec.substr(kPrefix, field_spec.size() - kPrefix - 1), kPrefix);
    try {
      return separable_incompressible(f);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  throw UsageError("unknown field '" + std::string(field_spec) +
                   "'; expected saddle(l,m), separable(EXPR) or custom");
}

RunConfig parse_args(int argc, const char* const* argv) {
  // Glue "--opt value" into "--opt=value" so values such as "-y" are not
  // mistaken for flags.
  std::vector<std::string> args;
  args.reserve(static_cast<std::size_t>(argc));
  for (int i = 0; i < argc; ++i) {
    std::string a = argv[i];
    if (i > 0 && kValueOptions.count(a) && i + 1 < argc) {
      a += '=';
      a += argv[++i];
    }
    args.push_back(std::move(a));
  }
  std::vector<const char*> glued;
  for (const auto& a : args) glued.push_back(a.c_str());

  CLI::App app{"Lagrangian descriptor fields and manifold detection", "lagdesc"};
  std::string field, dx, dy, grid, method, preset, oracle;
  double t0 = 0.0, tau = 0.0, step = 0.0, rtol = 0.0, atol = 0.0, quantile = 0.0;
  Outputs outputs;

  app.add_option("--field", field, "saddle(l,m) | separable(EXPR) | custom");
  app.add_option("--dx", dx, "x-component expression for --field custom");
  app.add_option("--dy", dy, "y-component expression for --field custom");
  app.add_option("--grid", grid, "XMIN:XMAX:NX,YMIN:YMAX:NY (default -1:1:201,-1:1:201)");
  app.add_option("--t0", t0, "initial time (default 0)");
  app.add_option("--tau", tau, "half-width of the time window (default 10)");
  app.add_option("--method", method, "rk4 | rk45 (default rk4)")
      ->check(CLI::IsMember({"rk4", "rk45"}));
  app.add_option("--step", step, "rk4 step size (default tau/4000)");
  app.add_option("--rtol", rtol, "rk45 relative tolerance (default 1e-8)");
  app.add_option("--atol", atol, "rk45 absolute tolerance (default 1e-10)");
  app.add_option("--preset", preset, "fig1 | fig2 | fig3a | fig3b | fig3c | fig3d");
  app.add_option("--out-m", outputs.m_csv, "CSV of M");
  app.add_option("--out-dx", outputs.dx_csv, "CSV of dM/dx0");
  app.add_option("--out-dy", outputs.dy_csv, "CSV of dM/dy0");
  app.add_option("--out-mask", outputs.mask_csv, "CSV of detected crossings");
  app.add_option("--pgm", outputs.pgm, "PGM rendering of M");
  app.add_option("--oracle", oracle, "X,Y: print the closed-form saddle M at one point");
  app.add_option("--quantile", quantile, "drop crossings below this jump quantile (default 0)");

  try {
    app.parse(static_cast<int>(glued.size()), glued.data());
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  RunConfig config;
  if (app.count("--preset")) {
    const Preset* p = find_preset(preset);
    if (!p) throw UsageError("unknown preset '" + preset + "'");
    config.preset = p->name;
    config.field = p->field;
    config.tau = p->tau;
    config.grid = p->grid;
  }
  if (app.count("--field")) config.field = field;
  if (app.count("--dx")) config.dx_expr = dx;
  if (app.count("--dy")) config.dy_expr = dy;
  if ((app.count("--dx") || app.count("--dy")) && !app.count("--field")) config.field = "custom";
  if (app.count("--grid")) config.grid = parse_grid(grid);
  if (app.count("--t0")) config.t0 = t0;
  if (app.count("--tau")) config.tau = tau;
  if (app.count("--method")) {
    config.integrator.method = method == "rk4" ? Method::Rk4Fixed : Method::Rk45Adaptive;
  }
  if (app.count("--step")) config.integrator.step = step;
  if (app.count("--rtol")) config.integrator.rtol = rtol;
  if (app.count("--atol")) config.integrator.atol = atol;
  if (app.count("--quantile")) config.quantile = quantile;
  if (app.count("--oracle")) {
    const auto xy = split(oracle, ',');
    if (xy.size() != 2) throw UsageError("--oracle expects X,Y");
    config.oracle_point = Vec2{parse_real(xy[0], "oracle x"), parse_real(xy[1], "oracle y")};
  }
  config.outputs = outputs;

  config.validate();
  return config;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  config.validate();
  const VectorFieldDef field = build_field(config);

  if (config.oracle_point) {
    if (!field.is_saddle()) {
      err << "error: --oracle needs a saddle(l,m) field\n";
      return kExitUsage;
    }
    const SaddleParams& p = field.saddle();
    const Vec2 x0 = *config.oracle_point;
    const double exact = oracle_M({p.lambda, p.mu}, x0, config.tau);
    const DescriptorValue numeric = compute_M(field, x0, config.t0, config.tau, config.integrator);
    out << std::setprecision(17);
    out << "field:      " << field.name() << "\n";
    out << "point:      (" << x0.x << ", " << x0.y << ")\n";
    out << "tau:        " << config.tau << "\n";
    out << "oracle_M:   " << exact << "\n";
    out << "numeric_M:  " << numeric.value << (numeric.valid ? "" : " (invalid)") << "\n";
    out << "rel_diff:   "
        << (exact != 0.0 ? std::fabs(numeric.value - exact) / exact : std::fabs(numeric.value))
        << "\n";
    return kExitOk;
  }

  const auto started = std::chrono::steady_clock::now();
  const ScalarField m = compute_field(field, config.grid, config.t0, config.tau, config.integrator);
  const std::size_t valid = m.valid_count();
  if (valid == 0) {
    err << "error: no grid node produced a valid trajectory (all escaped or non-finite)\n";
    return kExitNoValidNodes;
  }
  const DerivativeField dmdx = partial_derivative(m, Axis::X);
  const DerivativeField dmdy = partial_derivative(m, Axis::Y);
  const ManifoldMask mask = detect_manifolds(dmdx, dmdy, config.quantile);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  try {
    const Outputs& o = config.outputs;
    if (!o.m_csv.empty()) write_file(o.m_csv, write_csv(m));
    if (!o.dx_csv.empty()) write_file(o.dx_csv, write_csv(dmdx.field));
    if (!o.dy_csv.empty()) write_file(o.dy_csv, write_csv(dmdy.field));
    if (!o.mask_csv.empty()) write_file(o.mask_csv, write_mask_csv(mask));
    if (!o.pgm.empty()) write_file(o.pgm, write_pgm(m));
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }

  const GridSpec& g = config.grid;
  out << "field:              " << field.name() << "\n";
  if (!config.preset.empty()) out << "preset:             " << config.preset << "\n";
  out << "grid:               " << g.nx << "x" << g.ny << " over [" << g.xmin << ", " << g.xmax
      << "] x [" << g.ymin << ", " << g.ymax << "]\n";
  out << "t0, tau:            " << config.t0 << ", " << config.tau << "\n";
  out << "integrator:         " << config.integrator.describe() << "\n";
  out << "valid nodes:        " << std::fixed << std::setprecision(2)
      << 100.0 * static_cast<double>(valid) / static_cast<double>(g.size()) << "% (" << valid
      << "/" << g.size() << ")\n";
  out << "dM/dx0 crossings:   " << mask.x_crossings.size() << " (stable candidates)\n";
  out << "dM/dy0 crossings:   " << mask.y_crossings.size() << " (unstable candidates)\n";
  out << "wall time:          " << std::setprecision(3) << seconds << " s\n";
  out.unsetf(std::ios::floatfield);
  return kExitOk;
}

namespace {

void report_parse_error(std::ostream& err, const ParseError& e) {
  err << "error: expression " << e.what() << "\n";
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig config = parse_args(argc, argv);
    return run(config, out, err);
  } catch (const HelpRequested& h) {
    out << h.what();
    return kExitOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    report_parse_error(err, e);
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace lagdesc::cli
