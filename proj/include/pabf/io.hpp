#ifndef PABF_IO_HPP
#define PABF_IO_HPP

// CSV files for grid fields. Numbers use the shortest round-trip decimal form,
// so a field written and read back is bit-identical.
//
// Vector field (one row per bin):
//   # grid xi_min=<v> xi_max=<v> n_bins=<n> boundary=<neumann|periodic>
//   i,j,z1,z2,count,F1,F2
// Bins with count 0 are read back as unvisited.
//
// Scalar field (one row per node):
//   # grid ...
//   i,j,x,y,A

#include "pabf/config.hpp"
#include "pabf/core.hpp"
#include "pabf/fields.hpp"
#include "pabf/grid.hpp"

#include <charconv>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace pabf {

struct FieldFile {
  VectorField2 field;
  std::vector<double> counts;
};

inline std::string grid_header(const Grid2 &g) {
  return "# grid xi_min=" + format_double(g.xi_min) + " xi_max=" + format_double(g.xi_max) +
         " n_bins=" + std::to_string(g.n_bins) + " boundary=" + to_string(g.boundary);
}

/// `counts` may be empty, in which case the validity mask stands in (1 or 0).
inline void write_vector_field(std::ostream &out, const VectorField2 &f, std::span<const double> counts = {}) {
  const Grid2 &g = f.grid;
  out << grid_header(g) << "\ni,j,z1,z2,count,F1,F2\n";
  for (int i = 0; i < g.n_bins; ++i)
    for (int j = 0; j < g.n_bins; ++j) {
      const std::size_t k = g.bin_flat(i, j);
      const double count = counts.empty() ? (f.is_valid(k) ? 1.0 : 0.0) : counts[k];
      out << i << ',' << j << ',' << format_double(g.bin_center(i)) << ',' << format_double(g.bin_center(j)) << ','
          << format_double(count) << ',' << format_double(f.values[k].x) << ',' << format_double(f.values[k].y)
          << '\n';
    }
}

inline void write_scalar_field(std::ostream &out, const ScalarField &a) {
  const Grid2 &g = a.grid;
  out << grid_header(g) << "\ni,j,x,y,A\n";
  for (int i = 0; i <= g.n_bins; ++i)
    for (int j = 0; j <= g.n_bins; ++j)
      out << i << ',' << j << ',' << format_double(g.node_coordinate(i)) << ',' << format_double(g.node_coordinate(j))
          << ',' << format_double(a.at(i, j)) << '\n';
}

namespace detail {

class CsvReader {
public:
  CsvReader(std::istream &in, std::string origin) : in_(in), origin_(std::move(origin)) {}

  bool next(std::string &line) {
    while (std::getline(in_, line)) {
      ++line_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  }

  int line() const { return line_; }

  ConfigError error(const std::string &msg) const {
    return ConfigError(origin_ + ":" + std::to_string(line_) + ": " + msg);
  }

  std::vector<std::string_view> split(std::string_view s) const {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
      const auto comma = s.find(',', start);
      out.push_back(s.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return out;
  }

  template <class T>
  T number(std::string_view s, const char *what) const {
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      throw error(std::string("cannot parse ") + what + " from '" + std::string(s) + "'");
    return v;
  }

  Grid2 grid_header() {
    std::string line;
    if (!next(line)) throw ConfigError(origin_ + ": empty file");
    std::istringstream ss(line);
    std::string hash, tag;
    ss >> hash >> tag;
    if (hash != "#" || tag != "grid") throw error("expected '# grid ...' metadata line");
    Grid2 g;
    bool lo = false, hi = false, bins = false;
    std::string item;
    while (ss >> item) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw error("malformed grid attribute '" + item + "'");
      const std::string key = item.substr(0, eq);
      const std::string_view value = std::string_view(item).substr(eq + 1);
      if (key == "xi_min") g.xi_min = number<double>(value, "xi_min"), lo = true;
      else if (key == "xi_max") g.xi_max = number<double>(value, "xi_max"), hi = true;
      else if (key == "n_bins") g.n_bins = number<int>(value, "n_bins"), bins = true;
      else if (key == "boundary") {
        if (value == "neumann") g.boundary = Boundary::neumann;
        else if (value == "periodic") g.boundary = Boundary::periodic;
        else throw error("unknown boundary '" + std::string(value) + "'");
      } else throw error("unknown grid attribute '" + key + "'");
    }
    if (!lo || !hi || !bins) throw error("grid line needs xi_min, xi_max and n_bins");
    try {
      g.validate();
    } catch (const DomainError &e) {
      throw error(e.what());
    }
    return g;
  }

  void expect_header(const std::string &expected) {
    std::string line;
    if (!next(line)) throw error("missing column header");
    if (line != expected) throw error("expected header '" + expected + "'");
  }

private:
  std::istream &in_;
  std::string origin_;
  int line_ = 0;
};

} // namespace detail

inline FieldFile read_vector_field(std::istream &in, const std::string &origin = "field") {
  detail::CsvReader r(in, origin);
  const Grid2 g = r.grid_header();
  r.expect_header("i,j,z1,z2,count,F1,F2");
  FieldFile out{VectorField2(g), std::vector<double>(g.bin_count(), 0.0)};
  std::vector<unsigned char> seen(g.bin_count(), 0);
  std::string line;
  while (r.next(line)) {
    const auto cols = r.split(line);
    if (cols.size() != 7) throw r.error("expected 7 columns, found " + std::to_string(cols.size()));
    const int i = r.number<int>(cols[0], "bin index i"), j = r.number<int>(cols[1], "bin index j");
    if (i < 0 || j < 0 || i >= g.n_bins || j >= g.n_bins) throw r.error("bin index out of range");
    const std::size_t k = g.bin_flat(i, j);
    if (seen[k]) throw r.error("bin (" + std::to_string(i) + "," + std::to_string(j) + ") appears twice");
    seen[k] = 1;
    out.counts[k] = r.number<double>(cols[4], "count");
    if (!(out.counts[k] >= 0.0)) throw r.error("count must be non-negative");
    out.field.values[k] = {r.number<double>(cols[5], "F1"), r.number<double>(cols[6], "F2")};
    if (!is_finite(out.field.values[k])) throw r.error("non-finite field value");
    out.field.valid[k] = out.counts[k] > 0.0;
  }
  for (std::size_t k = 0; k < seen.size(); ++k)
    if (!seen[k])
      throw ConfigError(origin + ": missing bin (" + std::to_string(k / g.n_bins) + "," +
                        std::to_string(k % g.n_bins) + ")");
  return out;
}

inline ScalarField read_scalar_field(std::istream &in, const std::string &origin = "field") {
  detail::CsvReader r(in, origin);
  const Grid2 g = r.grid_header();
  r.expect_header("i,j,x,y,A");
  ScalarField a(g);
  std::vector<unsigned char> seen(g.node_count(), 0);
  std::string line;
  while (r.next(line)) {
    const auto cols = r.split(line);
    if (cols.size() != 5) throw r.error("expected 5 columns, found " + std::to_string(cols.size()));
    const int i = r.number<int>(cols[0], "node index i"), j = r.number<int>(cols[1], "node index j");
    if (i < 0 || j < 0 || i > g.n_bins || j > g.n_bins) throw r.error("node index out of range");
    const std::size_t k = g.node_flat(i, j);
    if (seen[k]) throw r.error("node appears twice");
    seen[k] = 1;
    a.nodes[k] = r.number<double>(cols[4], "A");
  }
  for (unsigned char s : seen)
    if (!s) throw ConfigError(origin + ": missing nodes");
  return a;
}

inline FieldFile load_vector_field(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return read_vector_field(in, path);
}

inline ScalarField load_scalar_field(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return read_scalar_field(in, path);
}

template <class Writer>
void save_file(const std::string &path, Writer &&write) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  write(out);
  if (!out) throw ConfigError("write to '" + path + "' failed");
}

} // namespace pabf

#endif // PABF_IO_HPP
