#include "gemesh/kernel_basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gemesh/errors.hpp"

namespace gemesh {

namespace {

// trig basis functions [1, cos t, sin t, cos 2t, sin 2t, ...] up to band B
void trig_values(int band, double t, Eigen::VectorXd& out) {
  out.resize(2 * band + 1);
  out[0] = 1.0;
  for (int f = 1; f <= band; ++f) {
    out[2 * f - 1] = std::cos(f * t);
    out[2 * f] = std::sin(f * t);
  }
}

}  // namespace

Eigen::MatrixXd PairBasis::eval(int k, double theta) const {
  check(k >= 0 && k < dim(), Err::IndexOutOfRange, "PairBasis::eval element index");
  const auto& coeffs = elements[k];
  Eigen::MatrixXd out = coeffs[0];
  for (size_t c = 1; c < coeffs.size(); ++c) {
    int f = static_cast<int>(c + 1) / 2;
    double fn = (c % 2 == 1) ? std::cos(f * theta) : std::sin(f * theta);
    out += fn * coeffs[c];
  }
  return out;
}

PairBasis solve_kernel_basis(int n_in, int n_out, KernelKind kind, int band_limit) {
  check(band_limit >= 0, Err::IndexOutOfRange, "band limit must be nonnegative");
  PairBasis pb;
  pb.n_in = n_in;
  pb.n_out = n_out;
  pb.band_limit = band_limit;
  pb.kind = kind;

  const int d_in = irrep_dim(n_in), d_out = irrep_dim(n_out);
  const int nc = (kind == KernelKind::Self) ? 1 : 2 * band_limit + 1;
  const int nx = nc * d_out * d_in;
  const int grid = 8 * band_limit + 9;

  // Unknown layout: coefficient matrix index c outer, row-major inside.
  auto xi = [&](int c, int r, int col) { return (c * d_out + r) * d_in + col; };

  const int theta_steps = (kind == KernelKind::Self) ? 1 : grid;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<long>(theta_steps) * grid * d_out * d_in, nx);

  Eigen::VectorXd fn_shift, fn_theta;
  long row = 0;
  for (int i = 0; i < theta_steps; ++i) {
    double theta = 2.0 * std::numbers::pi * i / grid;
    for (int j = 0; j < grid; ++j) {
      double g = 2.0 * std::numbers::pi * j / grid;
      if (kind == KernelKind::Self) {
        fn_shift.setConstant(1, 1.0);
        fn_theta.setConstant(1, 1.0);
      } else {
        trig_values(band_limit, theta - g, fn_shift);
        trig_values(band_limit, theta, fn_theta);
      }
      Eigen::MatrixXd rho_out = irrep_matrix(n_out, -g);
      Eigen::MatrixXd rho_in = irrep_matrix(n_in, g);
      // constraint row block: K(theta-g) - rho_out(-g) K(theta) rho_in(g) = 0
      for (int r = 0; r < d_out; ++r) {
        for (int col = 0; col < d_in; ++col, ++row) {
          for (int c = 0; c < nc; ++c) {
            a(row, xi(c, r, col)) += fn_shift[c];
            for (int r2 = 0; r2 < d_out; ++r2) {
              for (int col2 = 0; col2 < d_in; ++col2) {
                a(row, xi(c, r2, col2)) -= fn_theta[c] * rho_out(r, r2) * rho_in(col2, col);
              }
            }
          }
        }
      }
    }
  }

  // Column scaling makes euclidean orthonormality of nullspace vectors equal
  // orthonormality under the theta-averaged Frobenius product (constant term
  // weight 1, each cos/sin term weight 1/2).
  Eigen::VectorXd dinv(nx);
  for (int c = 0; c < nc; ++c) {
    double s = (c == 0) ? 1.0 : std::numbers::sqrt2;
    for (int e = 0; e < d_out * d_in; ++e) dinv[c * d_out * d_in + e] = s;
  }
  Eigen::MatrixXd scaled = a * dinv.asDiagonal();

  // JacobiSVD: BDCSVD mis-deflates on these highly degenerate spectra
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeThinV);
  const Eigen::VectorXd& sig = svd.singularValues();
  double smax = sig.size() ? sig[0] : 0.0;

  std::vector<Eigen::VectorXd> null_vecs;
  if (smax < 1e-12) {
    // vacuous constraint: the whole coefficient space satisfies it
    for (int e = 0; e < nx; ++e) null_vecs.push_back(Eigen::VectorXd::Unit(nx, e));
  } else {
    for (int k = 0; k < sig.size(); ++k) {
      if (sig[k] < 1e-8 * smax) null_vecs.push_back(svd.matrixV().col(k));
    }
  }

  for (Eigen::VectorXd& v : null_vecs) {
    Eigen::VectorXd x = dinv.asDiagonal() * v;
    double scale = x.cwiseAbs().maxCoeff();
    for (int e = 0; e < nx; ++e) {
      if (std::abs(x[e]) > 1e-9 * scale) {
        if (x[e] < 0) x = -x;
        break;
      }
    }
    std::vector<Eigen::MatrixXd> coeffs(nc);
    for (int c = 0; c < nc; ++c) {
      coeffs[c].resize(d_out, d_in);
      for (int r = 0; r < d_out; ++r) {
        for (int col = 0; col < d_in; ++col) coeffs[c](r, col) = x[xi(c, r, col)];
      }
    }
    pb.elements.push_back(std::move(coeffs));
  }
  return pb;
}

double kernel_constraint_residual(const PairBasis& basis, int k, int grid) {
  double worst = 0.0;
  for (int i = 0; i < grid; ++i) {
    // offset keeps the probe off the solver's own grid
    double theta = 2.0 * std::numbers::pi * (i + 0.13) / grid;
    for (int j = 0; j < grid; ++j) {
      double g = 2.0 * std::numbers::pi * (j + 0.37) / grid;
      Eigen::MatrixXd lhs = basis.eval(k, theta - g);
      Eigen::MatrixXd rhs = irrep_matrix(basis.n_out, -g) * basis.eval(k, theta) *
                            irrep_matrix(basis.n_in, g);
      worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

const PairBasis& KernelBasisCache::get(int n_in, int n_out, KernelKind kind, int band_limit) {
  auto key = std::make_tuple(n_in, n_out, static_cast<int>(kind), band_limit);
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    auto solved = std::make_unique<PairBasis>(solve_kernel_basis(n_in, n_out, kind, band_limit));
    it = cache_.emplace(key, std::move(solved)).first;
  }
  return *it->second;
}

KernelBasisCache& kernel_cache() {
  static KernelBasisCache cache;
  return cache;
}

int BlockKernel::num_params() const {
  int n = 0;
  for (const Pair& p : pairs) n += p.in_copies * p.out_copies * p.basis->dim();
  return n;
}

BlockKernel block_kernel(const FeatureType& rho_in, const FeatureType& rho_out, KernelKind kind,
                         int band_limit, KernelBasisCache& cache) {
  BlockKernel bk;
  bk.rho_in = rho_in;
  bk.rho_out = rho_out;
  bk.kind = kind;
  bk.band_limit = band_limit;
  for (const auto& bi : rho_in.blocks()) {
    for (const auto& bo : rho_out.blocks()) {
      const PairBasis& basis = cache.get(bi.freq, bo.freq, kind, band_limit);
      if (basis.dim() == 0) continue;
      bk.pairs.push_back({bi.freq, bo.freq, bi.copies, bo.copies, &basis});
    }
  }
  // ascending (n_in, n_out); input blocks iterate outer so only out order needs fixing
  std::sort(bk.pairs.begin(), bk.pairs.end(), [](const auto& x, const auto& y) {
    return std::make_pair(x.n_in, x.n_out) < std::make_pair(y.n_in, y.n_out);
  });
  return bk;
}

Eigen::MatrixXd assemble_block_kernel(const BlockKernel& bk,
                                      const std::vector<Eigen::MatrixXd>& pair_weights,
                                      double theta) {
  check(pair_weights.size() == bk.pairs.size(), Err::ShapeMismatch,
        "assemble_block_kernel: one weight matrix per pair");
  auto block_offset = [](const FeatureType& t, int freq) {
    for (const auto& b : t.blocks()) {
      if (b.freq == freq) return b.offset;
    }
    fail(Err::IndexOutOfRange, "frequency not present in type");
  };
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(bk.rho_out.dim(), bk.rho_in.dim());
  for (size_t i = 0; i < bk.pairs.size(); ++i) {
    const auto& p = bk.pairs[i];
    const Eigen::MatrixXd& w = pair_weights[i];
    int kdim = p.basis->dim();
    check(w.rows() == p.out_copies && w.cols() == static_cast<long>(p.in_copies) * kdim,
          Err::ShapeMismatch, "assemble_block_kernel: weight shape");
    int d_in = irrep_dim(p.n_in), d_out = irrep_dim(p.n_out);
    int in_off = block_offset(bk.rho_in, p.n_in);
    int out_off = block_offset(bk.rho_out, p.n_out);
    for (int k = 0; k < kdim; ++k) {
      Eigen::MatrixXd basis_val = p.basis->eval(k, theta);
      for (int a = 0; a < p.out_copies; ++a) {
        for (int b = 0; b < p.in_copies; ++b) {
          out.block(out_off + a * d_out, in_off + b * d_in, d_out, d_in) +=
              w(a, b * kdim + k) * basis_val;
        }
      }
    }
  }
  return out;
}

}  // namespace gemesh
