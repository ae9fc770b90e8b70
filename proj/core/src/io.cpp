#include "patlab/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

#include "patlab/errors.hpp"

namespace patlab::io {

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> b{};
  for (int k = 0; k < 4; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xFFu);
  out.write(b.data(), 4);
}

void put_f64(std::ostream& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  std::array<char, 8> b{};
  for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xFFu);
  out.write(b.data(), 8);
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) throw Error("truncated binary file");
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(b[k]) << (8 * k);
  return v;
}

double get_f64(std::istream& in) {
  std::array<unsigned char, 8> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 8)) throw Error("truncated binary file");
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(b[k]) << (8 * k);
  return std::bit_cast<double>(v);
}

void expect_magic(std::istream& in, const char* magic) {
  std::array<char, 4> m{};
  if (!in.read(m.data(), 4) || std::memcmp(m.data(), magic, 4) != 0) {
    throw Error(std::string("bad magic, expected ") + magic);
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

}  // namespace

void write_field(std::ostream& out, const ScalarField2D& f) {
  const Grid2D& g = f.grid();
  out.write("PATF", 4);
  put_u32(out, static_cast<std::uint32_t>(g.nx()));
  put_u32(out, static_cast<std::uint32_t>(g.ny()));
  put_f64(out, g.hx());
  put_f64(out, g.hy());
  put_f64(out, g.origin_x());
  put_f64(out, g.origin_y());
  for (double v : f.values()) put_f64(out, v);
}

void write_field(const std::filesystem::path& path, const ScalarField2D& f) {
  auto out = open_out(path);
  write_field(out, f);
}

ScalarField2D read_field(std::istream& in) {
  expect_magic(in, "PATF");
  const std::uint32_t nx = get_u32(in);
  const std::uint32_t ny = get_u32(in);
  const double hx = get_f64(in);
  const double hy = get_f64(in);
  const double ox = get_f64(in);
  const double oy = get_f64(in);
  Grid2D grid(nx, ny, hx, hy, ox, oy);
  std::vector<double> v(grid.size());
  for (double& x : v) x = get_f64(in);
  return ScalarField2D(grid, std::move(v));
}

ScalarField2D read_field(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_field(in);
}

void write_trace(std::ostream& out, const BoundaryTrace& m) {
  out.write("PATT", 4);
  put_u32(out, static_cast<std::uint32_t>(m.n_boundary()));
  put_u32(out, static_cast<std::uint32_t>(m.n_samples()));
  put_f64(out, m.dt_record());
  for (double v : m.samples()) put_f64(out, v);
}

void write_trace(const std::filesystem::path& path, const BoundaryTrace& m) {
  auto out = open_out(path);
  write_trace(out, m);
}

BoundaryTrace read_trace(std::istream& in, const Grid2D& grid) {
  expect_magic(in, "PATT");
  const std::uint32_t nb = get_u32(in);
  const std::uint32_t ns = get_u32(in);
  const double dt = get_f64(in);
  if (nb != grid.boundary_size()) {
    throw GeometryMismatchError("trace file has " + std::to_string(nb) +
                                " boundary nodes, grid has " +
                                std::to_string(grid.boundary_size()));
  }
  std::vector<double> v(static_cast<std::size_t>(nb) * ns);
  for (double& x : v) x = get_f64(in);
  return BoundaryTrace(grid, dt, ns, std::move(v));
}

BoundaryTrace read_trace(const std::filesystem::path& path, const Grid2D& grid) {
  auto in = open_in(path);
  return read_trace(in, grid);
}

void write_field_csv(std::ostream& out, const ScalarField2D& f) {
  const Grid2D& g = f.grid();
  out << "x,y,value\n";
  for (std::size_t j = 0; j < g.ny(); ++j) {
    for (std::size_t i = 0; i < g.nx(); ++i) {
      out << format_number(g.x(i)) << ',' << format_number(g.y(j)) << ','
          << format_number(f(i, j)) << '\n';
    }
  }
}

void write_trace_csv(std::ostream& out, const BoundaryTrace& m) {
  const auto arc = m.grid().boundary_arc_length();
  out << "t,node_index,arc_length,value\n";
  for (std::size_t k = 0; k < m.n_samples(); ++k) {
    const std::string t = format_number(m.dt_record() * static_cast<double>(k));
    for (std::size_t b = 0; b < m.n_boundary(); ++b) {
      out << t << ',' << b << ',' << format_number(arc[b]) << ',' << format_number(m(k, b))
          << '\n';
    }
  }
}

}  // namespace patlab::io
