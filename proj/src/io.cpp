#include "lagdesc/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <vector>

namespace lagdesc {

namespace {

constexpr std::string_view kFieldHeader = "x,y,value,valid";
constexpr std::string_view kMaskHeader = "kind,x,y,jump";

void append_number(std::string& out, double v) {
  char buf[40];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  out.append(buf, static_cast<std::size_t>(n));
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw FormatError("line " + std::to_string(line) + ": " + what);
}

double parse_number(std::string_view s, std::size_t line) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last) {
    fail(line, "malformed number '" + std::string(s) + "'");
  }
  return v;
}

struct Row {
  double x, y, value;
  bool valid;
};

}  // namespace

std::string write_csv(const ScalarField& field) {
  const GridSpec& g = field.grid;
  std::string out(kFieldHeader);
  out += '\n';
  out.reserve(out.size() + g.size() * 64);
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const std::size_t k = g.index(i, j);
      append_number(out, g.x(i));
      out += ',';
      append_number(out, g.y(j));
      out += ',';
      append_number(out, field.values[k]);
      out += field.valid[k] ? ",1\n" : ",0\n";
    }
  }
  return out;
}

ScalarField read_csv(std::string_view text) {
  std::vector<Row> rows;
  std::size_t line_no = 0;
  bool header_seen = false;

  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view() : text.substr(eol + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (!header_seen) {
      if (line != kFieldHeader) fail(line_no, "expected header '" + std::string(kFieldHeader) + "'");
      header_seen = true;
      continue;
    }
    if (line.empty()) {
      if (text.empty()) break;
      fail(line_no, "empty row");
    }

    std::string_view cells[4];
    std::size_t count = 0;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      if (count == 4) fail(line_no, "too many columns");
      cells[count++] = line.substr(start, comma == std::string_view::npos ? comma : comma - start);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (count != 4) fail(line_no, "expected 4 columns");
    if (cells[3] != "0" && cells[3] != "1") fail(line_no, "valid flag must be 0 or 1");
    rows.push_back({parse_number(cells[0], line_no), parse_number(cells[1], line_no),
                    parse_number(cells[2], line_no), cells[3] == "1"});
  }
  if (!header_seen) fail(1, "missing header");

  // First data row is line 2.
  auto data_line = [](std::size_t k) { return k + 2; };

  std::size_t nx = 0;
  while (nx < rows.size() && rows[nx].y == rows[0].y) ++nx;
  if (nx < 2) fail(2, "first grid row needs at least 2 nodes");
  if (rows.size() % nx != 0) {
    fail(data_line(rows.size() - 1), "row count " + std::to_string(rows.size()) +
                                         " is not a multiple of nx = " + std::to_string(nx));
  }
  const std::size_t ny = rows.size() / nx;
  if (ny < 2) fail(data_line(rows.size() - 1), "need at least 2 grid rows");

  GridSpec g;
  g.xmin = rows.front().x;
  g.xmax = rows[nx - 1].x;
  g.ymin = rows.front().y;
  g.ymax = rows.back().y;
  g.nx = nx;
  g.ny = ny;
  if (!(g.xmin < g.xmax) || !(g.ymin < g.ymax)) fail(2, "coordinates must increase");

  const double tol_x = 1e-9 * (g.xmax - g.xmin);
  const double tol_y = 1e-9 * (g.ymax - g.ymin);
  ScalarField field(g);
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t k = g.index(i, j);
      const Row& r = rows[k];
      if (!(std::fabs(r.x - g.x(i)) <= tol_x) || !(std::fabs(r.y - g.y(j)) <= tol_y)) {
        fail(data_line(k), "node coordinates do not match a uniform " + std::to_string(nx) +
                               "x" + std::to_string(ny) + " grid");
      }
      field.values[k] = r.value;
      field.valid[k] = r.valid ? 1 : 0;
    }
  }
  return field;
}

std::string write_pgm(const ScalarField& field) {
  const GridSpec& g = field.grid;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!field.valid[k]) continue;
    lo = std::min(lo, field.values[k]);
    hi = std::max(hi, field.values[k]);
  }
  if (!(lo <= hi)) throw FormatError("write_pgm: field has no valid nodes");

  std::string out = "P5\n" + std::to_string(g.nx) + " " + std::to_string(g.ny) + "\n255\n";
  const std::size_t header = out.size();
  out.resize(header + g.size(), '\0');
  const double range = hi - lo;
  for (std::size_t row = 0; row < g.ny; ++row) {
    const std::size_t j = g.ny - 1 - row;
    for (std::size_t i = 0; i < g.nx; ++i) {
      const std::size_t k = g.index(i, j);
      unsigned char px = 0;
      if (field.valid[k]) {
        if (range == 0.0) {
          px = 128;
        } else {
          const double scaled = (field.values[k] - lo) / range * 255.0;
          px = static_cast<unsigned char>(std::clamp<long>(std::lround(scaled), 0, 255));
        }
      }
      out[header + row * g.nx + i] = static_cast<char>(px);
    }
  }
  return out;
}

std::string write_mask_csv(const ManifoldMask& mask) {
  std::string out(kMaskHeader);
  out += '\n';
  auto emit = [&out](std::string_view kind, const Crossing& c) {
    out += kind;
    out += ',';
    append_number(out, c.x);
    out += ',';
    append_number(out, c.y);
    out += ',';
    append_number(out, c.jump);
    out += '\n';
  };
  for (const auto& c : mask.x_crossings) emit("stable_candidate", c);
  for (const auto& c : mask.y_crossings) emit("unstable_candidate", c);
  return out;
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  os.flush();
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "' for reading");
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace lagdesc
