#include "kppfrag/io/field_csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "kppfrag/errors.hpp"

namespace kppfrag::io {

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  out.append(buf, static_cast<std::size_t>(n));
}

double parse_number(std::string_view token, std::size_t line) {
  double v = 0.0;
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    std::ostringstream os;
    os << "field CSV line " << line << ": cannot parse '" << token << "'";
    throw InvalidArgument(os.str());
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string format_field_csv(const ScalarField& field) {
  const Grid& g = field.grid();
  std::string out = g.dim() == 1 ? "x,value\n" : "x,y,value\n";
  out.reserve(out.size() + field.size() * (g.dim() == 1 ? 48 : 72));
  for (std::size_t iy = 0; iy < g.ny(); ++iy) {
    for (std::size_t ix = 0; ix < g.nx(); ++ix) {
      append_number(out, g.x(ix));
      out += ',';
      if (g.dim() == 2) {
        append_number(out, g.y(iy));
        out += ',';
      }
      append_number(out, field[g.index(ix, iy)]);
      out += '\n';
    }
  }
  return out;
}

void write_field_csv(const ScalarField& field, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << format_field_csv(field);
  if (!os) throw IoError("failed writing " + path.string());
}

ScalarField parse_field_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument("field CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  int dim = 0;
  if (line == "x,value") {
    dim = 1;
  } else if (line == "x,y,value") {
    dim = 2;
  } else {
    throw InvalidArgument("field CSV header must be 'x,value' or 'x,y,value', got '" + line +
                          "'");
  }
  std::vector<double> xs, ys, vals;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cols = split(line);
    if (cols.size() != static_cast<std::size_t>(dim + 1)) {
      std::ostringstream os;
      os << "field CSV line " << lineno << ": expected " << dim + 1 << " columns";
      throw InvalidArgument(os.str());
    }
    xs.push_back(parse_number(cols[0], lineno));
    if (dim == 2) ys.push_back(parse_number(cols[1], lineno));
    vals.push_back(parse_number(cols.back(), lineno));
  }

  std::size_t nx = xs.size();
  std::size_t ny = 1;
  if (dim == 2) {
    nx = 0;
    while (nx < ys.size() && ys[nx] == ys[0]) ++nx;
    if (nx == 0 || vals.size() % nx != 0) throw InvalidArgument("field CSV is not a full grid");
    ny = vals.size() / nx;
  }
  if (nx < 3 || (dim == 2 && ny < 3)) throw InvalidArgument("field CSV has too few nodes");
  const Grid grid = dim == 1 ? Grid::line(nx) : Grid::square(nx, ny);
  constexpr double tol = 1e-12;
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const std::size_t k = grid.index(ix, iy);
      const bool x_ok = std::abs(xs[k] - grid.x(ix)) <= tol;
      const bool y_ok = dim == 1 || std::abs(ys[k] - grid.y(iy)) <= tol;
      if (!x_ok || !y_ok) {
        std::ostringstream os;
        os << "field CSV row " << k + 2 << " is not on the uniform node-centred grid";
        throw InvalidArgument(os.str());
      }
    }
  }
  return ScalarField(grid, std::move(vals));
}

ScalarField read_field_csv(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_field_csv(ss.str());
}

}  // namespace kppfrag::io
