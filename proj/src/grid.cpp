#include "gplab/grid.hpp"

#include <cmath>

#include <fftw3.h>

namespace gplab::gp {

Grid Grid::cube(int dim, int points, double length) {
  Grid g;
  g.dim = dim;
  for (int a = 0; a < 3; ++a) {
    g.points[a] = a < dim ? points : 1;
    g.spacing[a] = a < dim ? length / points : 1.0;
  }
  g.validate();
  return g;
}

void Grid::validate() const {
  require(dim >= 1 && dim <= 3, "grid dimension must be 1, 2 or 3");
  for (int a = 0; a < 3; ++a) {
    if (a < dim) {
      require(points[a] >= 1 && (points[a] & (points[a] - 1)) == 0,
              "grid points per axis must be a power of two");
      require(spacing[a] > 0.0, "grid spacing must be positive");
    } else {
      require(points[a] == 1, "unused grid axes must have one point");
    }
  }
}

size_t Grid::size() const {
  return static_cast<size_t>(points[0]) * static_cast<size_t>(points[1]) * static_cast<size_t>(points[2]);
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= spacing[a];
  return v;
}

double Grid::volume() const { return cell_volume() * static_cast<double>(size()); }

double Grid::min_length() const {
  double m = length(0);
  for (int a = 1; a < dim; ++a) m = std::min(m, length(a));
  return m;
}

std::array<int, 3> Grid::coords(size_t s) const {
  std::array<int, 3> c{};
  c[2] = static_cast<int>(s % points[2]);
  s /= points[2];
  c[1] = static_cast<int>(s % points[1]);
  c[0] = static_cast<int>(s / points[1]);
  return c;
}

size_t Grid::site(const std::array<int, 3>& c) const {
  return (static_cast<size_t>(c[0]) * points[1] + c[1]) * points[2] + c[2];
}

std::array<double, 3> Grid::position(size_t s) const {
  const auto c = coords(s);
  std::array<double, 3> x{0, 0, 0};
  for (int a = 0; a < dim; ++a) x[a] = (c[a] - points[a] / 2) * spacing[a];
  return x;
}

namespace {
int wrap_signed(int c, int n) {
  c %= n;
  if (c < 0) c += n;
  return 2 * c > n ? c - n : c;
}
}  // namespace

std::array<double, 3> Grid::displacement(size_t a, size_t b) const {
  const auto ca = coords(a), cb = coords(b);
  std::array<double, 3> d{0, 0, 0};
  for (int ax = 0; ax < dim; ++ax) d[ax] = wrap_signed(ca[ax] - cb[ax], points[ax]) * spacing[ax];
  return d;
}

double Grid::distance(size_t a, size_t b) const {
  const auto d = displacement(a, b);
  return std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
}

size_t Grid::difference_site(size_t a, size_t b) const {
  const auto ca = coords(a), cb = coords(b);
  std::array<int, 3> c{0, 0, 0};
  for (int ax = 0; ax < 3; ++ax) c[ax] = ((ca[ax] - cb[ax]) % points[ax] + points[ax]) % points[ax];
  return site(c);
}

double Grid::vector_length(size_t i) const {
  const auto c = coords(i);
  double s = 0.0;
  for (int ax = 0; ax < dim; ++ax) {
    const double d = wrap_signed(c[ax], points[ax]) * spacing[ax];
    s += d * d;
  }
  return std::sqrt(s);
}

bool Grid::on_boundary(size_t s) const {
  const auto c = coords(s);
  for (int a = 0; a < dim; ++a)
    if (c[a] == 0 || c[a] == points[a] - 1) return true;
  return false;
}

std::array<double, 3> Grid::k_vector(size_t i) const {
  const auto c = coords(i);
  std::array<double, 3> k{0, 0, 0};
  for (int a = 0; a < dim; ++a) {
    const int m = c[a] < points[a] / 2 ? c[a] : c[a] - points[a];
    k[a] = 2.0 * kPi * m / length(a);
  }
  return k;
}

double Grid::k_squared(size_t i) const {
  const auto k = k_vector(i);
  return k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
}

Field::Field(const Grid& g, Eigen::VectorXcd v) : grid(g), values(std::move(v)) {
  require(static_cast<size_t>(values.size()) == g.size(), "field size does not match grid");
}

double Field::norm() const { return std::sqrt(grid.cell_volume() * values.squaredNorm()); }

cplx Field::inner(const Field& other) const {
  require(grid == other.grid, "fields live on different grids");
  return grid.cell_volume() * values.dot(other.values);
}

Field Field::normalized() const {
  const double n = norm();
  require(n > 0.0, "cannot normalize the zero field");
  return Field(grid, values / n);
}

Eigen::VectorXcd Field::mode_vector() const { return values * std::sqrt(grid.cell_volume()); }

Field Field::from_mode_vector(const Grid& g, const Eigen::VectorXcd& u) {
  return Field(g, u / std::sqrt(g.cell_volume()));
}

Field Field::constant(const Grid& g) {
  Field f(g);
  f.values.setConstant(1.0 / std::sqrt(g.volume()));
  return f;
}

Field Field::gaussian(const Grid& g, double width) {
  Field f(g);
  for (size_t s = 0; s < g.size(); ++s) {
    const auto x = g.position(s);
    const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    f.values[static_cast<Eigen::Index>(s)] = std::exp(-r2 / (2 * width * width));
  }
  return f.normalized();
}

Field Field::plane_wave(const Grid& g, const std::array<int, 3>& n) {
  Field f(g);
  const double amp = 1.0 / std::sqrt(g.volume());
  for (size_t s = 0; s < g.size(); ++s) {
    const auto x = g.position(s);
    double phase = 0.0;
    for (int a = 0; a < g.dim; ++a) phase += 2.0 * kPi * n[a] * x[a] / g.length(a);
    f.values[static_cast<Eigen::Index>(s)] = amp * std::polar(1.0, phase);
  }
  return f;
}

struct Spectral::Plans {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  ~Plans() {
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
  }
};

Spectral::Spectral(const Grid& g) : grid_(g), plans_(std::make_unique<Plans>()) {
  grid_.validate();
  const size_t m = g.size();
  ksq_.resize(m);
  for (size_t i = 0; i < m; ++i) ksq_[i] = g.k_squared(i);
  int n[3];
  for (int a = 0; a < g.dim; ++a) n[a] = g.points[a];
  std::vector<cplx> a(m), b(m);
  auto* pa = reinterpret_cast<fftw_complex*>(a.data());
  auto* pb = reinterpret_cast<fftw_complex*>(b.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plans_->fwd = fftw_plan_dft(g.dim, n, pa, pb, FFTW_FORWARD, flags);
  plans_->bwd = fftw_plan_dft(g.dim, n, pa, pb, FFTW_BACKWARD, flags);
  if (!plans_->fwd || !plans_->bwd) throw std::runtime_error("FFTW plan creation failed");
}

Spectral::~Spectral() = default;

Eigen::VectorXcd Spectral::forward(const Eigen::VectorXcd& x) const {
  require(static_cast<size_t>(x.size()) == grid_.size(), "spectral input size mismatch");
  Eigen::VectorXcd in = x, out(x.size());
  fftw_execute_dft(plans_->fwd, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

Eigen::VectorXcd Spectral::backward(const Eigen::VectorXcd& x) const {
  require(static_cast<size_t>(x.size()) == grid_.size(), "spectral input size mismatch");
  Eigen::VectorXcd in = x, out(x.size());
  fftw_execute_dft(plans_->bwd, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out / static_cast<double>(grid_.size());
}

Eigen::VectorXcd Spectral::laplacian(const Eigen::VectorXcd& x) const {
  Eigen::VectorXcd y = forward(x);
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] *= ksq_[static_cast<size_t>(i)];
  return backward(y);
}

Eigen::VectorXcd Spectral::derivative(const Eigen::VectorXcd& x, int axis) const {
  require(axis >= 0 && axis < grid_.dim, "derivative axis out of range");
  Eigen::VectorXcd y = forward(x);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const auto c = grid_.coords(static_cast<size_t>(i));
    const int n = grid_.points[axis];
    if (2 * c[axis] == n) {
      y[i] = 0.0;
      continue;
    }
    y[i] *= cplx(0.0, grid_.k_vector(static_cast<size_t>(i))[axis]);
  }
  return backward(y);
}

Eigen::VectorXcd Spectral::free_propagate(const Eigen::VectorXcd& x, double t) const {
  Eigen::VectorXcd y = forward(x);
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] *= std::polar(1.0, -ksq_[static_cast<size_t>(i)] * t);
  return backward(y);
}

double Spectral::kinetic_energy(const Eigen::VectorXcd& x) const {
  const Eigen::VectorXcd y = forward(x);
  double s = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) s += ksq_[static_cast<size_t>(i)] * std::norm(y[i]);
  return s * grid_.cell_volume() / static_cast<double>(grid_.size());
}

double Spectral::sobolev_norm(const Eigen::VectorXcd& x, int m) const {
  require(m >= 0 && m <= 4, "Sobolev index must lie in 0..4");
  const Eigen::VectorXcd y = forward(x);
  double s = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i)
    s += std::pow(1.0 + ksq_[static_cast<size_t>(i)], m) * std::norm(y[i]);
  return std::sqrt(s * grid_.cell_volume() / static_cast<double>(grid_.size()));
}

double Spectral::max_k_squared() const {
  double m = 0.0;
  for (double k : ksq_) m = std::max(m, k);
  return m;
}

Eigen::MatrixXd Spectral::laplacian_matrix() const {
  const auto m = static_cast<Eigen::Index>(grid_.size());
  Eigen::MatrixXd t(m, m);
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    e.setZero();
    e[j] = 1.0;
    t.col(j) = laplacian(e).real();
  }
  return 0.5 * (t + t.transpose());
}

Eigen::MatrixXd stencil_laplacian_matrix(const Grid& g) {
  const auto m = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index s = 0; s < m; ++s) {
    const auto c = g.coords(static_cast<size_t>(s));
    for (int a = 0; a < g.dim; ++a) {
      const double w = 1.0 / (g.spacing[a] * g.spacing[a]);
      t(s, s) += 2.0 * w;
      for (int sgn : {-1, 1}) {
        auto cn = c;
        cn[a] = (c[a] + sgn + g.points[a]) % g.points[a];
        t(s, static_cast<Eigen::Index>(g.site(cn))) -= w;
      }
    }
  }
  return t;
}

}  // namespace gplab::gp
