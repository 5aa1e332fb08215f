#include "gplab/fock.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <string>

#include <Eigen/Eigenvalues>

namespace gplab::fock {

namespace {

size_t g_cap = 0;

size_t binom_sat(int m, int k) {
  // C(m + k - 1, k) with saturation.
  if (k < 0) return 0;
  if (m <= 0) return k == 0 ? 1 : 0;
  long double r = 1.0L;
  size_t exact = 1;
  bool overflow = false;
  for (int i = 1; i <= k; ++i) {
    r = r * (m - 1 + i) / i;
    if (r > static_cast<long double>(std::numeric_limits<size_t>::max() / 2)) {
      overflow = true;
      break;
    }
  }
  if (overflow) return std::numeric_limits<size_t>::max();
  // Exact integer recomputation (fits, since the float estimate is in range).
  for (int i = 1; i <= k; ++i) exact = exact * static_cast<size_t>(m - 1 + i) / static_cast<size_t>(i);
  return exact;
}

// Column-by-column builder: each column's entries are collected, merged and appended.
class ColumnAssembler {
public:
  ColumnAssembler(size_t rows, size_t cols, size_t reserve)
      : m_(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)) {
    m_.reserve(static_cast<Eigen::Index>(reserve));
  }
  void add(size_t row, cplx v) {
    if (v != 0.0) buf_.emplace_back(row, v);
  }
  void finish_column(Eigen::Index col) {
    m_.startVec(col);
    std::sort(buf_.begin(), buf_.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (size_t i = 0; i < buf_.size();) {
      size_t j = i;
      cplx s = 0.0;
      while (j < buf_.size() && buf_[j].first == buf_[i].first) s += buf_[j++].second;
      if (s != 0.0) m_.insertBack(static_cast<Eigen::Index>(buf_[i].first), col) = s;
      i = j;
    }
    buf_.clear();
  }
  SpMat take() {
    m_.finalize();
    return std::move(m_);
  }

private:
  SpMat m_;
  std::vector<std::pair<size_t, cplx>> buf_;
};

}  // namespace

size_t dimension_cap() {
  if (g_cap == 0) {
    g_cap = 4'000'000;
    if (const char* env = std::getenv("GPLAB_DIMENSION_CAP")) {
      const long long v = std::atoll(env);
      if (v > 0) g_cap = static_cast<size_t>(v);
    }
  }
  return g_cap;
}

void set_dimension_cap(size_t cap) {
  require(cap > 0, "dimension cap must be positive");
  g_cap = cap;
}

size_t sector_dimension(int modes, int particles) { return binom_sat(modes, particles); }

SectorBasis::SectorBasis(int modes, int particles, size_t cap)
    : modes_(modes), particles_(particles), dim_(0) {
  require(modes >= 1, "a sector needs at least one mode");
  require(particles >= 0 && particles <= 255, "particle number must lie in 0..255");
  dim_ = sector_dimension(modes, particles);
  if (dim_ > cap)
    throw CapacityError("sector dimension C(" + std::to_string(modes + particles - 1) + ", " +
                        std::to_string(particles) + ") exceeds cap " + std::to_string(cap));
  count_.assign(static_cast<size_t>(modes) + 1, std::vector<size_t>(static_cast<size_t>(particles) + 2, 0));
  for (int m = 0; m <= modes; ++m)
    for (int k = 0; k <= particles + 1; ++k) count_[m][k] = binom_sat(m, k);
  occ_.reserve(dim_ * static_cast<size_t>(modes));
  std::vector<std::uint8_t> cur(static_cast<size_t>(modes), 0);
  // Depth-first enumeration; larger occupation of earlier modes comes first.
  auto rec = [&](auto&& self, int mode, int rem) -> void {
    if (mode == modes_ - 1) {
      cur[static_cast<size_t>(mode)] = static_cast<std::uint8_t>(rem);
      occ_.insert(occ_.end(), cur.begin(), cur.end());
      return;
    }
    for (int v = rem; v >= 0; --v) {
      cur[static_cast<size_t>(mode)] = static_cast<std::uint8_t>(v);
      self(self, mode + 1, rem - v);
    }
    cur[static_cast<size_t>(mode)] = 0;
  };
  rec(rec, 0, particles_);
}

std::vector<int> SectorBasis::occupations(size_t i) const {
  const auto* s = state(i);
  return std::vector<int>(s, s + modes_);
}

size_t SectorBasis::index(const std::uint8_t* occ) const {
  size_t r = 0;
  int rem = particles_;
  for (int i = 0; i < modes_ - 1 && rem > 0; ++i) {
    const int o = occ[i];
    // States with a larger occupation at mode i precede this one.
    if (rem - o - 1 >= 0) r += count_[static_cast<size_t>(modes_ - i)][static_cast<size_t>(rem - o - 1)];
    rem -= o;
  }
  return r;
}

size_t SectorBasis::index(const std::vector<int>& occ) const {
  require(static_cast<int>(occ.size()) == modes_, "occupation vector has wrong length");
  std::vector<std::uint8_t> b(occ.size());
  int sum = 0;
  for (size_t i = 0; i < occ.size(); ++i) {
    require(occ[i] >= 0, "negative occupation");
    b[i] = static_cast<std::uint8_t>(occ[i]);
    sum += occ[i];
  }
  require(sum == particles_, "occupation vector does not match the sector particle number");
  return index(b.data());
}

SparseOperator SparseOperator::adjoint() const {
  SparseOperator r;
  r.matrix = matrix.adjoint();
  r.modes = modes;
  r.domain_n = codomain_n;
  r.codomain_n = domain_n;
  return r;
}

double SparseOperator::max_abs() const {
  double m = 0.0;
  for (Eigen::Index k = 0; k < matrix.outerSize(); ++k)
    for (SpMat::InnerIterator it(matrix, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

SparseOperator& SparseOperator::prune(double tol) {
  matrix.prune([tol](const Eigen::Index&, const Eigen::Index&, const cplx& v) { return std::abs(v) > tol; });
  return *this;
}

void SparseOperator::write_coo(std::ostream& out) const {
  out.precision(17);
  out << "# rows " << matrix.rows() << " cols " << matrix.cols() << " nnz " << matrix.nonZeros() << "\n";
  // Row-major order for stable diffs.
  Eigen::SparseMatrix<cplx, Eigen::RowMajor> rm = matrix;
  for (Eigen::Index k = 0; k < rm.outerSize(); ++k)
    for (decltype(rm)::InnerIterator it(rm, k); it; ++it)
      out << it.row() << " " << it.col() << " " << it.value().real() << " " << it.value().imag() << "\n";
}

SparseOperator operator*(const SparseOperator& a, const SparseOperator& b) {
  require(a.domain_n == b.codomain_n && a.modes == b.modes, "operator product sector mismatch");
  SparseOperator r;
  r.matrix = (a.matrix * b.matrix).pruned();
  r.modes = a.modes;
  r.domain_n = b.domain_n;
  r.codomain_n = a.codomain_n;
  return r;
}

SparseOperator operator+(const SparseOperator& a, const SparseOperator& b) {
  require(a.domain_n == b.domain_n && a.codomain_n == b.codomain_n && a.modes == b.modes,
          "operator sum sector mismatch");
  SparseOperator r = a;
  r.matrix = a.matrix + b.matrix;
  return r;
}

SparseOperator operator-(const SparseOperator& a, const SparseOperator& b) {
  require(a.domain_n == b.domain_n && a.codomain_n == b.codomain_n && a.modes == b.modes,
          "operator difference sector mismatch");
  SparseOperator r = a;
  r.matrix = a.matrix - b.matrix;
  return r;
}

SparseOperator operator*(cplx c, const SparseOperator& a) {
  SparseOperator r = a;
  r.matrix = c * a.matrix;
  return r;
}

SparseOperator commutator(const SparseOperator& a, const SparseOperator& b) {
  return a * b - b * a;
}

double max_abs_diff(const SparseOperator& a, const SparseOperator& b) { return (a - b).max_abs(); }

Ladder::Ladder(int modes, int n_top, size_t cap) : modes_(modes) {
  require(n_top >= 0, "top sector must be non-negative");
  bases_.reserve(static_cast<size_t>(n_top) + 1);
  for (int n = 0; n <= n_top; ++n) bases_.emplace_back(modes, n, cap);
}

void Ladder::check_sector(int n) const {
  require(n >= 0 && n <= top(), "sector " + std::to_string(n) + " outside the ladder 0.." + std::to_string(top()));
}

const SectorBasis& Ladder::basis(int n) const {
  check_sector(n);
  return bases_[static_cast<size_t>(n)];
}

SparseOperator Ladder::identity(int n) const {
  const auto d = static_cast<Eigen::Index>(basis(n).dimension());
  SparseOperator r{SpMat(d, d), modes_, n, n};
  r.matrix.setIdentity();
  return r;
}

SparseOperator Ladder::annihilate(const Vec& f, int n) const {
  require(f.size() == modes_, "mode vector length does not match the basis");
  const auto& src = basis(n);
  if (n == 0) return SparseOperator{SpMat(0, 1), modes_, 0, -1};
  const auto& dst = basis(n - 1);
  ColumnAssembler as(dst.dimension(), src.dimension(), src.dimension() * static_cast<size_t>(std::min(n, modes_)));
  std::vector<std::uint8_t> occ(static_cast<size_t>(modes_));
  for (size_t c = 0; c < src.dimension(); ++c) {
    std::copy(src.state(c), src.state(c) + modes_, occ.begin());
    for (int j = 0; j < modes_; ++j) {
      if (occ[j] == 0 || f[j] == 0.0) continue;
      const double amp = std::sqrt(static_cast<double>(occ[j]));
      --occ[j];
      as.add(dst.index(occ.data()), std::conj(f[j]) * amp);
      ++occ[j];
    }
    as.finish_column(static_cast<Eigen::Index>(c));
  }
  return SparseOperator{as.take(), modes_, n, n - 1};
}

SparseOperator Ladder::create(const Vec& f, int n) const {
  require(f.size() == modes_, "mode vector length does not match the basis");
  const auto& src = basis(n);
  const auto& dst = basis(n + 1);
  ColumnAssembler as(dst.dimension(), src.dimension(), src.dimension() * static_cast<size_t>(modes_));
  std::vector<std::uint8_t> occ(static_cast<size_t>(modes_));
  for (size_t c = 0; c < src.dimension(); ++c) {
    std::copy(src.state(c), src.state(c) + modes_, occ.begin());
    for (int i = 0; i < modes_; ++i) {
      if (f[i] == 0.0) continue;
      const double amp = std::sqrt(static_cast<double>(occ[i]) + 1.0);
      ++occ[i];
      as.add(dst.index(occ.data()), f[i] * amp);
      --occ[i];
    }
    as.finish_column(static_cast<Eigen::Index>(c));
  }
  return SparseOperator{as.take(), modes_, n, n + 1};
}

SparseOperator Ladder::one_body(const Mat& G, int n) const {
  require(G.rows() == modes_ && G.cols() == modes_, "one-body kernel shape does not match the modes");
  const auto& b = basis(n);
  // Nonzero rows of each column of G.
  std::vector<std::vector<int>> nz(static_cast<size_t>(modes_));
  size_t total = 0;
  for (int j = 0; j < modes_; ++j)
    for (int i = 0; i < modes_; ++i)
      if (G(i, j) != 0.0) {
        nz[static_cast<size_t>(j)].push_back(i);
        ++total;
      }
  const size_t per_col = std::min<size_t>(total, static_cast<size_t>(std::min(n, modes_)) * static_cast<size_t>(modes_));
  ColumnAssembler as(b.dimension(), b.dimension(), b.dimension() * std::max<size_t>(per_col, 1));
  std::vector<std::uint8_t> occ(static_cast<size_t>(modes_));
  for (size_t c = 0; c < b.dimension(); ++c) {
    std::copy(b.state(c), b.state(c) + modes_, occ.begin());
    for (int j = 0; j < modes_; ++j) {
      if (occ[j] == 0) continue;
      const double aj = std::sqrt(static_cast<double>(occ[j]));
      --occ[j];
      for (int i : nz[static_cast<size_t>(j)]) {
        const double ai = std::sqrt(static_cast<double>(occ[i]) + 1.0);
        ++occ[i];
        as.add(b.index(occ.data()), G(i, j) * aj * ai);
        --occ[i];
      }
      ++occ[j];
    }
    as.finish_column(static_cast<Eigen::Index>(c));
  }
  return SparseOperator{as.take(), modes_, n, n};
}

SparseOperator Ladder::pair_create(const Mat& G, int n) const {
  require(G.rows() == modes_ && G.cols() == modes_, "pair kernel shape does not match the modes");
  const auto& src = basis(n);
  const auto& dst = basis(n + 2);
  ColumnAssembler as(dst.dimension(), src.dimension(), src.dimension() * static_cast<size_t>(modes_) * static_cast<size_t>(modes_ + 1) / 2);
  std::vector<std::uint8_t> occ(static_cast<size_t>(modes_));
  for (size_t c = 0; c < src.dimension(); ++c) {
    std::copy(src.state(c), src.state(c) + modes_, occ.begin());
    for (int j = 0; j < modes_; ++j) {
      const double aj = std::sqrt(static_cast<double>(occ[j]) + 1.0);
      ++occ[j];
      for (int i = 0; i < modes_; ++i) {
        if (G(i, j) == 0.0) continue;
        const double ai = std::sqrt(static_cast<double>(occ[i]) + 1.0);
        ++occ[i];
        as.add(dst.index(occ.data()), G(i, j) * aj * ai);
        --occ[i];
      }
      --occ[j];
    }
    as.finish_column(static_cast<Eigen::Index>(c));
  }
  return SparseOperator{as.take(), modes_, n, n + 2};
}

SparseOperator Ladder::density_density(const Eigen::MatrixXd& W, int n) const {
  require(W.rows() == modes_ && W.cols() == modes_, "interaction matrix shape does not match the modes");
  const auto& b = basis(n);
  ColumnAssembler as(b.dimension(), b.dimension(), b.dimension());
  std::vector<int> occupied;
  for (size_t c = 0; c < b.dimension(); ++c) {
    const auto* s = b.state(c);
    occupied.clear();
    for (int i = 0; i < modes_; ++i)
      if (s[i]) occupied.push_back(i);
    double e = 0.0;
    for (int i : occupied)
      for (int j : occupied) e += W(i, j) * s[i] * (s[j] - (i == j ? 1.0 : 0.0));
    as.add(c, 0.5 * e);
    as.finish_column(static_cast<Eigen::Index>(c));
  }
  return SparseOperator{as.take(), modes_, n, n};
}

FockSpace::FockSpace(int modes, int n_max, size_t cap) : ladder_(modes, n_max, cap) {
  offsets_.push_back(0);
  for (int n = 0; n <= n_max; ++n) offsets_.push_back(offsets_.back() + ladder_.basis(n).dimension());
}

namespace {

// Embed sector blocks into the truncated space.
SparseOperator embed(const FockSpace& fs, const std::vector<SparseOperator>& blocks) {
  std::vector<Eigen::Triplet<cplx>> t;
  for (const auto& b : blocks) {
    const auto ro = static_cast<Eigen::Index>(fs.offset(b.codomain_n));
    const auto co = static_cast<Eigen::Index>(fs.offset(b.domain_n));
    for (Eigen::Index k = 0; k < b.matrix.outerSize(); ++k)
      for (SpMat::InnerIterator it(b.matrix, k); it; ++it) t.emplace_back(ro + it.row(), co + it.col(), it.value());
  }
  const auto d = static_cast<Eigen::Index>(fs.dimension());
  SparseOperator r{SpMat(d, d), fs.ladder().modes(), -1, -1};
  r.matrix.setFromTriplets(t.begin(), t.end());
  return r;
}

}  // namespace

SparseOperator FockSpace::annihilate(const Vec& f) const {
  std::vector<SparseOperator> blocks;
  for (int n = 1; n <= n_max(); ++n) blocks.push_back(ladder_.annihilate(f, n));
  return embed(*this, blocks);
}

SparseOperator FockSpace::create(const Vec& f) const {
  std::vector<SparseOperator> blocks;
  for (int n = 0; n + 1 <= n_max(); ++n) blocks.push_back(ladder_.create(f, n));
  return embed(*this, blocks);
}

namespace {
double spectral_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(m.adjoint() * m, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}
}  // namespace

CcrDefect ccr_defect(const Vec& f, const Vec& g, const FockSpace& space) {
  const auto a = space.annihilate(f);
  const auto ad = space.create(g);
  Mat d = (a * ad - ad * a).dense();
  const cplx fg = f.dot(g);
  d -= fg * Mat::Identity(d.rows(), d.cols());
  const auto top_off = static_cast<Eigen::Index>(space.offset(space.n_max()));
  CcrDefect r;
  r.restricted = spectral_norm(d.topLeftCorner(top_off, top_off));
  const auto top_dim = d.rows() - top_off;
  r.top = spectral_norm(d.bottomRightCorner(top_dim, top_dim));
  return r;
}

Mat projector_Q(const Vec& u) {
  require(std::abs(u.norm() - 1.0) <= 1e-8, "projector_Q needs a normalized condensate");
  return Mat::Identity(u.size(), u.size()) - u * u.adjoint();
}

SparseOperator op_excitation_number(const Vec& u, const Ladder& ladder, int n) {
  return ladder.one_body(projector_Q(u), n);
}

FockVector product_state(const Vec& u, const Ladder& ladder, int n) {
  const auto& b = ladder.basis(n);
  FockVector psi{Vec(static_cast<Eigen::Index>(b.dimension())), ladder.modes(), n};
  std::vector<double> lfact(static_cast<size_t>(n) + 1, 0.0);
  for (int k = 1; k <= n; ++k) lfact[static_cast<size_t>(k)] = lfact[static_cast<size_t>(k - 1)] + std::log(static_cast<double>(k));
  for (size_t c = 0; c < b.dimension(); ++c) {
    const auto* s = b.state(c);
    double lw = lfact[static_cast<size_t>(n)];
    cplx amp = 1.0;
    for (int i = 0; i < ladder.modes(); ++i) {
      if (!s[i]) continue;
      lw -= lfact[s[i]];
      amp *= std::pow(u[i], static_cast<int>(s[i]));
    }
    psi.coeffs[static_cast<Eigen::Index>(c)] = std::exp(0.5 * lw) * amp;
  }
  return psi;
}

namespace {
size_t ipow(size_t b, int e) {
  size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}
}  // namespace

Vec to_first_quantized(const FockVector& psi) {
  const SectorBasis b(psi.modes, psi.particles);
  const size_t M = static_cast<size_t>(psi.modes);
  const size_t total = ipow(M, psi.particles);
  require(total <= 50'000'000, "first-quantized tensor too large");
  Vec out(static_cast<Eigen::Index>(total));
  std::vector<std::uint8_t> occ(M);
  std::vector<double> fact(static_cast<size_t>(psi.particles) + 1, 1.0);
  for (int k = 1; k <= psi.particles; ++k) fact[static_cast<size_t>(k)] = fact[static_cast<size_t>(k - 1)] * k;
  for (size_t t = 0; t < total; ++t) {
    std::fill(occ.begin(), occ.end(), 0);
    size_t r = t;
    for (int k = 0; k < psi.particles; ++k) {
      ++occ[r % M];
      r /= M;
    }
    double w = fact[static_cast<size_t>(psi.particles)];
    for (auto o : occ) w /= fact[o];
    out[static_cast<Eigen::Index>(t)] = psi.coeffs[static_cast<Eigen::Index>(b.index(occ.data()))] / std::sqrt(w);
  }
  return out;
}

FockVector from_first_quantized(const Vec& amplitudes, const Ladder& ladder, int n) {
  const auto& b = ladder.basis(n);
  const size_t M = static_cast<size_t>(ladder.modes());
  const size_t total = ipow(M, n);
  require(static_cast<size_t>(amplitudes.size()) == total, "first-quantized tensor has the wrong size");
  FockVector psi{Vec::Zero(static_cast<Eigen::Index>(b.dimension())), ladder.modes(), n};
  std::vector<std::uint8_t> occ(M);
  for (size_t t = 0; t < total; ++t) {
    std::fill(occ.begin(), occ.end(), 0);
    size_t r = t;
    for (int k = 0; k < n; ++k) {
      ++occ[r % M];
      r /= M;
    }
    psi.coeffs[static_cast<Eigen::Index>(b.index(occ.data()))] += amplitudes[static_cast<Eigen::Index>(t)];
  }
  std::vector<double> fact(static_cast<size_t>(n) + 1, 1.0);
  for (int k = 1; k <= n; ++k) fact[static_cast<size_t>(k)] = fact[static_cast<size_t>(k - 1)] * k;
  for (size_t c = 0; c < b.dimension(); ++c) {
    const auto* s = b.state(c);
    double w = fact[static_cast<size_t>(n)];
    for (size_t i = 0; i < M; ++i) w /= fact[s[i]];
    psi.coeffs[static_cast<Eigen::Index>(c)] /= std::sqrt(w);
  }
  return psi;
}

}  // namespace gplab::fock
