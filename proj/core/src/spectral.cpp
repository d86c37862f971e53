#include "anisograph/spectral.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "anisograph/error.hpp"
#include "anisograph/rng.hpp"

namespace anisograph {
namespace {

void require_rescaled(const Laplacian& l, const char* who) {
  if (!l.rescaled) throw StateError(std::string(who) + ": expects a rescaled Laplacian");
}

// Orthogonalizes v against the first `cols` columns of basis, twice.
void orthogonalize(const Eigen::MatrixXd& basis, Eigen::Index cols, Eigen::VectorXd& v) {
  if (cols == 0) return;
  for (int pass = 0; pass < 2; ++pass) {
    v -= basis.leftCols(cols) * (basis.leftCols(cols).transpose() * v);
  }
}

Eigen::VectorXd random_unit(Eigen::Index n, CounterRng& rng) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0);
  return v / v.norm();
}

// Thick-restart Lanczos with full reorthogonalization for the k smallest
// eigenpairs of a symmetric matrix. A*V is kept explicitly so the projected
// matrix is formed directly as V^T A V.
EigenSystem lanczos_smallest(const CsrMatrix& a, std::size_t k, const EigenOptions& opt) {
  const auto n = static_cast<Eigen::Index>(a.n);
  const auto kk = static_cast<Eigen::Index>(k);
  const Eigen::Index m = std::min<Eigen::Index>(n, std::max<Eigen::Index>(2 * kk + 20, kk + 30));
  const Eigen::Index keep = std::min<Eigen::Index>(m - 1, kk + (m - kk) / 2);

  CounterRng rng(opt.seed);
  Eigen::MatrixXd v(n, m);
  Eigen::MatrixXd av(n, m);
  Eigen::Index cols = 0;
  Eigen::VectorXd next = random_unit(n, rng);
  Eigen::MatrixXd tmp(n, 1);

  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    while (cols < m) {
      orthogonalize(v, cols, next);
      double norm = next.norm();
      if (norm < 1e-10) {
        // Invariant subspace found; continue with a fresh direction.
        next = random_unit(n, rng);
        orthogonalize(v, cols, next);
        norm = next.norm();
      }
      v.col(cols) = next / norm;
      tmp.col(0) = v.col(cols);
      av.col(cols) = a.multiply(tmp).col(0);
      next = av.col(cols);
      ++cols;
    }

    Eigen::MatrixXd h = v.transpose() * av;
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    const Eigen::MatrixXd& s = es.eigenvectors();
    const Eigen::MatrixXd ritz = v * s.leftCols(keep);
    const Eigen::MatrixXd aritz = av * s.leftCols(keep);

    bool converged = true;
    for (Eigen::Index i = 0; i < kk; ++i) {
      const double res = (aritz.col(i) - es.eigenvalues()[i] * ritz.col(i)).norm();
      if (res > opt.tol) {
        converged = false;
        break;
      }
    }
    if (converged) {
      EigenSystem out;
      out.values = es.eigenvalues().head(kk);
      out.vectors = ritz.leftCols(kk);
      return out;
    }
    // Residual direction shared by all Ritz vectors.
    next = av.col(m - 1);
    orthogonalize(v, m, next);
    v.leftCols(keep) = ritz;
    av.leftCols(keep) = aritz;
    cols = keep;
  }
  throw Error("eigensystem: Lanczos did not converge");
}

}  // namespace

ChebCoeffs::ChebCoeffs(std::size_t order, std::size_t d_in, std::size_t d_out)
    : theta(order, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d_in), static_cast<Eigen::Index>(d_out))) {}

void ChebCoeffs::validate() const {
  if (theta.empty()) throw ShapeError("cheb: need at least one coefficient matrix");
  for (const auto& t : theta) {
    if (t.rows() != theta.front().rows() || t.cols() != theta.front().cols()) {
      throw ShapeError("cheb: coefficient matrices have different shapes");
    }
    if (!t.allFinite()) throw ShapeError("cheb: non-finite coefficients");
  }
}

std::vector<Signal> cheb_basis(const Laplacian& l, const Signal& x, std::size_t order) {
  require_rescaled(l, "cheb_basis");
  if (static_cast<std::size_t>(x.rows()) != l.size()) {
    throw ShapeError("cheb: signal has " + std::to_string(x.rows()) + " rows, graph has " +
                     std::to_string(l.size()) + " vertices");
  }
  std::vector<Signal> z;
  z.reserve(order);
  if (order == 0) return z;
  z.push_back(x);
  if (order == 1) return z;
  z.push_back(l.matrix.multiply(x));
  for (std::size_t j = 2; j < order; ++j) {
    Signal next = l.matrix.multiply(z[j - 1]);
    next = 2.0 * next - z[j - 2];
    z.push_back(std::move(next));
  }
  return z;
}

Signal cheb_apply(const Laplacian& l, const Signal& x, const ChebCoeffs& theta,
                  std::vector<Signal>* basis) {
  theta.validate();
  if (static_cast<std::size_t>(x.cols()) != theta.d_in()) {
    throw ShapeError("cheb: signal has " + std::to_string(x.cols()) + " channels, filter expects " +
                     std::to_string(theta.d_in()));
  }
  auto z = cheb_basis(l, x, theta.order());
  Signal y = z[0] * theta.theta[0];
  for (std::size_t j = 1; j < z.size(); ++j) y.noalias() += z[j] * theta.theta[j];
  if (basis) *basis = std::move(z);
  return y;
}

Signal cheb_polynomial_apply(const Laplacian& l, const Signal& x, std::span<const double> coeffs) {
  require_rescaled(l, "cheb_polynomial_apply");
  if (static_cast<std::size_t>(x.rows()) != l.size()) throw ShapeError("cheb: signal/graph size mismatch");
  Signal y = Signal::Zero(x.rows(), x.cols());
  if (coeffs.empty()) return y;
  Signal prev = x;
  y += coeffs[0] * prev;
  if (coeffs.size() == 1) return y;
  Signal cur = l.matrix.multiply(x);
  y += coeffs[1] * cur;
  for (std::size_t j = 2; j < coeffs.size(); ++j) {
    Signal next = 2.0 * l.matrix.multiply(cur) - prev;
    y += coeffs[j] * next;
    prev = std::move(cur);
    cur = std::move(next);
  }
  return y;
}

std::vector<double> chebyshev_coefficients(const std::function<double(double)>& f, std::size_t order) {
  const std::size_t nodes = std::max<std::size_t>(4 * (order + 1), 128);
  std::vector<double> fv(nodes);
  for (std::size_t k = 0; k < nodes; ++k) {
    fv[k] = f(std::cos(std::numbers::pi * (static_cast<double>(k) + 0.5) / static_cast<double>(nodes)));
  }
  std::vector<double> c(order + 1, 0.0);
  for (std::size_t j = 0; j <= order; ++j) {
    double s = 0.0;
    for (std::size_t k = 0; k < nodes; ++k) {
      s += fv[k] * std::cos(std::numbers::pi * static_cast<double>(j) * (static_cast<double>(k) + 0.5) /
                            static_cast<double>(nodes));
    }
    c[j] = 2.0 * s / static_cast<double>(nodes);
  }
  c[0] *= 0.5;
  return c;
}

Signal heat_diffuse(const Laplacian& l, const Signal& x, double tau, int order) {
  if (order < 1) throw ArgumentError("heat_diffuse: order must be >= 1");
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw ArgumentError("heat_diffuse: tau must be >= 0");
  if (l.rescaled) throw StateError("heat_diffuse: expects an unrescaled Laplacian");
  const double lmax = l.lambda_max > 0.0 ? l.lambda_max : 2.0;
  const auto coeffs = chebyshev_coefficients(
      [&](double t) { return std::exp(-tau * 0.5 * lmax * (t + 1.0)); }, static_cast<std::size_t>(order));
  return cheb_polynomial_apply(rescale(l, lmax), x, coeffs);
}

void canonicalize_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    const double scale = vectors.col(c).cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
      if (std::abs(vectors(i, c)) > 1e-8 * scale) {
        if (vectors(i, c) < 0.0) vectors.col(c) *= -1.0;
        break;
      }
    }
  }
}

EigenSystem eigensystem(const Laplacian& l, std::size_t k, const EigenOptions& options) {
  const std::size_t n = l.size();
  if (k == 0 || k > n) {
    throw ArgumentError("eigensystem: k must be in [1, " + std::to_string(n) + "], got " + std::to_string(k));
  }
  EigenSystem out;
  const bool dense = !options.force_iterative && n <= options.dense_cap;
  if (dense || k + 30 >= n) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l.matrix.to_dense());
    if (es.info() != Eigen::Success) throw Error("eigensystem: dense solver failed");
    out.values = es.eigenvalues().head(static_cast<Eigen::Index>(k));
    out.vectors = es.eigenvectors().leftCols(static_cast<Eigen::Index>(k));
  } else {
    out = lanczos_smallest(l.matrix, k, options);
  }
  canonicalize_signs(out.vectors);
  return out;
}

Eigen::MatrixXd gft(const EigenSystem& phi, const Signal& f) {
  if (f.rows() != phi.vectors.rows()) throw ShapeError("gft: signal/eigensystem size mismatch");
  return phi.vectors.transpose() * f;
}

Signal igft(const EigenSystem& phi, const Eigen::MatrixXd& coeffs) {
  if (!phi.full()) throw StateError("igft: requires the full eigensystem");
  if (coeffs.rows() != phi.vectors.cols()) throw ShapeError("igft: coefficient count mismatch");
  return phi.vectors * coeffs;
}

bool is_permutation(const Permutation& p) {
  std::vector<bool> seen(p.size(), false);
  for (auto v : p) {
    if (v >= p.size() || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

Permutation inverse_permutation(const Permutation& p) {
  Permutation inv(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) inv[p[i]] = i;
  return inv;
}

Permutation compose_permutations(const Permutation& a, const Permutation& b) {
  if (a.size() != b.size()) throw ShapeError("permutation sizes differ");
  Permutation out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = b[a[i]];
  return out;
}

Signal permute_rows(const Signal& x, const Permutation& p) {
  if (static_cast<std::size_t>(x.rows()) != p.size()) throw ShapeError("permute: size mismatch");
  Signal y(x.rows(), x.cols());
  for (std::size_t i = 0; i < p.size(); ++i) {
    y.row(static_cast<Eigen::Index>(p[i])) = x.row(static_cast<Eigen::Index>(i));
  }
  return y;
}

Permutation rotation_permutation(const GridSpec& spec, int quarter_turns) {
  if (spec.kind != Manifold::SE2 && spec.kind != Manifold::R2) {
    throw ArgumentError("rotation_permutation: only planar SE2/R2 grids are supported");
  }
  if (spec.nx != spec.ny) throw ArgumentError("rotation_permutation: grid must be square (nx == ny)");
  const int q = ((quarter_turns % 4) + 4) % 4;
  const std::uint32_t no = spec.n_orient;
  if (spec.kind == Manifold::SE2 && (q % 2 == 1) && (no % 2 != 0)) {
    throw ArgumentError("rotation_permutation: odd quarter turns need an even orientation count");
  }
  const std::size_t n = spec.nx;
  const std::size_t vs = n * n;
  Permutation p(spec.vertex_count());
  for (std::size_t k = 0; k < no; ++k) {
    for (std::size_t iy = 0; iy < n; ++iy) {
      for (std::size_t ix = 0; ix < n; ++ix) {
        std::size_t x = ix;
        std::size_t y = iy;
        std::size_t o = k;
        for (int t = 0; t < q; ++t) {
          const std::size_t nx = n - 1 - y;
          y = x;
          x = nx;
          if (spec.kind == Manifold::SE2) o = (o + no / 2) % no;
        }
        p[k * vs + iy * n + ix] = o * vs + y * n + x;
      }
    }
  }
  return p;
}

double equivariance_error(const CsrMatrix& l, const Permutation& p) {
  if (p.size() != l.n || !is_permutation(p)) throw ArgumentError("equivariance_error: invalid permutation");
  const auto inv = inverse_permutation(p);
  double diff2 = 0.0;
  std::vector<std::pair<std::uint64_t, double>> moved;
  for (std::size_t i = 0; i < l.n; ++i) {
    // Row i of P^T L P is row p[i] of L with columns relabeled through p^-1.
    moved.clear();
    const auto src = p[i];
    for (auto k = l.row_begin(src); k < l.row_end(src); ++k) moved.emplace_back(inv[l.cols[k]], l.values[k]);
    std::sort(moved.begin(), moved.end());
    std::size_t a = l.row_begin(i);
    std::size_t b = 0;
    while (a < l.row_end(i) || b < moved.size()) {
      if (b == moved.size() || (a < l.row_end(i) && l.cols[a] < moved[b].first)) {
        diff2 += l.values[a] * l.values[a];
        ++a;
      } else if (a == l.row_end(i) || moved[b].first < l.cols[a]) {
        diff2 += moved[b].second * moved[b].second;
        ++b;
      } else {
        const double d = moved[b].second - l.values[a];
        diff2 += d * d;
        ++a;
        ++b;
      }
    }
  }
  const double norm = l.frobenius_norm();
  if (norm == 0.0) return std::sqrt(diff2);
  return std::sqrt(diff2) / norm;
}

double equivariance_error(const Laplacian& l, const Permutation& p) {
  return equivariance_error(l.matrix, p);
}

SliceSpread slice_spread(const VertexSet& vertices, const Eigen::VectorXd& values, std::size_t orient_index) {
  if (vertices.spec.kind != Manifold::SE2 && vertices.spec.kind != Manifold::R2) {
    throw ArgumentError("slice_spread: only planar grids are supported");
  }
  if (static_cast<std::size_t>(values.size()) != vertices.size()) throw ShapeError("slice_spread: size mismatch");
  const double theta = vertices.orientation(orient_index);
  const Eigen::Vector2d fwd(std::cos(theta), std::sin(theta));
  const Eigen::Vector2d lat(-fwd.y(), fwd.x());

  SliceSpread s;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  const std::size_t vs = vertices.spec.spatial_count();
  for (std::size_t sp = 0; sp < vs; ++sp) {
    const auto id = orient_index * vs + sp;
    const double w = std::max(values[static_cast<Eigen::Index>(id)], 0.0);
    s.mass += w;
    mean += w * vertices.elements[id].params().head<2>();
  }
  if (s.mass <= 0.0) return s;
  mean /= s.mass;
  for (std::size_t sp = 0; sp < vs; ++sp) {
    const auto id = orient_index * vs + sp;
    const double w = std::max(values[static_cast<Eigen::Index>(id)], 0.0);
    const Eigen::Vector2d d = vertices.elements[id].params().head<2>() - mean;
    s.forward_variance += w * d.dot(fwd) * d.dot(fwd);
    s.lateral_variance += w * d.dot(lat) * d.dot(lat);
  }
  s.forward_variance /= s.mass;
  s.lateral_variance /= s.mass;
  s.ratio = s.lateral_variance > 0.0 ? s.forward_variance / s.lateral_variance : 0.0;
  return s;
}

std::string format_double(double v) {
  if (v == 0.0) v = 0.0;  // drops the sign of -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string eigenmap_csv(const EigenSystem& phi) {
  std::ostringstream out;
  out << "k,lambda";
  for (Eigen::Index v = 0; v < phi.vectors.rows(); ++v) out << ",v" << v;
  out << '\n';
  for (Eigen::Index k = 0; k < phi.values.size(); ++k) {
    out << k << ',' << format_double(phi.values[k]);
    for (Eigen::Index v = 0; v < phi.vectors.rows(); ++v) out << ',' << format_double(phi.vectors(v, k));
    out << '\n';
  }
  return out.str();
}

}  // namespace anisograph
