#include "gplab/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace gplab::io {

namespace {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in, const std::string& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error(path + ": truncated file");
  return v;
}

std::ofstream open_out(const std::string& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

std::ifstream open_in(const std::string& path, const char magic[4]) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char m[4];
  in.read(m, 4);
  if (!in || std::memcmp(m, magic, 4) != 0)
    throw std::runtime_error(path + ": bad magic, expected " + std::string(magic, 4));
  return in;
}

void put_values(std::ostream& out, const Eigen::VectorXcd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    put(out, v[i].real());
    put(out, v[i].imag());
  }
}

Eigen::VectorXcd get_values(std::istream& in, size_t n, const std::string& path) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(n));
  for (size_t i = 0; i < n; ++i) {
    const double re = get<double>(in, path);
    const double im = get<double>(in, path);
    v[static_cast<Eigen::Index>(i)] = cplx(re, im);
  }
  return v;
}

}  // namespace

void write_field(const std::string& path, const gp::Field& f) {
  auto out = open_out(path, true);
  out.write("GPF1", 4);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(f.grid.dim));
  for (int a = 0; a < f.grid.dim; ++a) put<std::uint32_t>(out, static_cast<std::uint32_t>(f.grid.points[a]));
  for (int a = 0; a < f.grid.dim; ++a) put<double>(out, f.grid.spacing[a]);
  put_values(out, f.values);
  if (!out) throw std::runtime_error("write failed: " + path);
}

gp::Field read_field(const std::string& path) {
  auto in = open_in(path, "GPF1");
  gp::Grid g;
  const auto dim = get<std::uint32_t>(in, path);
  if (dim < 1 || dim > 3) throw std::runtime_error(path + ": dimension must be 1, 2 or 3");
  g.dim = static_cast<int>(dim);
  for (int a = 0; a < g.dim; ++a) g.points[a] = static_cast<int>(get<std::uint32_t>(in, path));
  for (int a = 0; a < g.dim; ++a) g.spacing[a] = get<double>(in, path);
  g.validate();
  return gp::Field(g, get_values(in, g.size(), path));
}

void write_state(const std::string& path, const fock::FockVector& psi) {
  auto out = open_out(path, true);
  out.write("MBF1", 4);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(psi.modes));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(psi.particles));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(psi.coeffs.size()));
  put_values(out, psi.coeffs);
  if (!out) throw std::runtime_error("write failed: " + path);
}

fock::FockVector read_state(const std::string& path) {
  auto in = open_in(path, "MBF1");
  fock::FockVector psi;
  psi.modes = static_cast<int>(get<std::uint32_t>(in, path));
  psi.particles = static_cast<int>(get<std::uint32_t>(in, path));
  const auto n = get<std::uint64_t>(in, path);
  if (n != fock::sector_dimension(psi.modes, psi.particles))
    throw std::runtime_error(path + ": coefficient count does not match the (M, N) sector");
  psi.coeffs = get_values(in, static_cast<size_t>(n), path);
  return psi;
}

void write_coo(const std::string& path, const fock::SparseOperator& op) {
  auto out = open_out(path, false);
  op.write_coo(out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  auto out = open_out(path, false);
  for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& r : rows) {
    for (size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << format_double(r[i]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace gplab::io
