#include "ovp/bgapn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>

namespace ovp {

namespace {

// Unknowns are stored interleaved by sample: u[t*nc + i] = b_i[t]. For 1D
// problems with M = I this makes the quadratic form block tridiagonal, so a
// banded Cholesky handles signals of any length in linear time.

// ---------------------------------------------------------------------------
// banded symmetric positive definite storage (upper band) and Cholesky
// ---------------------------------------------------------------------------

struct BandMatrix {
  int n = 0;
  int hbw = 0;
  std::vector<double> a;  // a[i*(hbw+1) + (j-i)] holds entry (i, j), j >= i

  void init(int n_, int hbw_) {
    n = n_;
    hbw = hbw_;
    a.assign(static_cast<std::size_t>(n) * (hbw + 1), 0.0);
  }
  double& at(int i, int j) {
    return a[static_cast<std::size_t>(i) * (hbw + 1) + (j - i)];
  }
  double at(int i, int j) const {
    return a[static_cast<std::size_t>(i) * (hbw + 1) + (j - i)];
  }
  void add_sym(int i, int j, double v) {
    if (i > j) std::swap(i, j);
    at(i, j) += v;
  }
};

// In-place factorization A = U^T U; returns false if a pivot fails.
bool band_cholesky(BandMatrix& m) {
  for (int i = 0; i < m.n; ++i) {
    double diag = m.at(i, i);
    if (!(diag > 0.0)) return false;
    const double piv = std::sqrt(diag);
    m.at(i, i) = piv;
    const int jmax = std::min(m.n - 1, i + m.hbw);
    for (int j = i + 1; j <= jmax; ++j) m.at(i, j) /= piv;
    for (int j = i + 1; j <= jmax; ++j) {
      const double f = m.at(i, j);
      if (f == 0.0) continue;
      for (int k = j; k <= jmax; ++k) m.at(j, k) -= f * m.at(i, k);
    }
  }
  return true;
}

Eigen::VectorXd band_solve(const BandMatrix& u, const Eigen::VectorXd& b) {
  const int n = u.n;
  Eigen::VectorXd y = b;
  for (int i = 0; i < n; ++i) {
    const int kmin = std::max(0, i - u.hbw);
    double s = y[i];
    for (int k = kmin; k < i; ++k) s -= u.at(k, i) * y[k];
    y[i] = s / u.at(i, i);
  }
  for (int i = n - 1; i >= 0; --i) {
    const int jmax = std::min(n - 1, i + u.hbw);
    double s = y[i];
    for (int j = i + 1; j <= jmax; ++j) s -= u.at(i, j) * y[j];
    y[i] = s / u.at(i, i);
  }
  return y;
}

// ---------------------------------------------------------------------------
// shared problem context
// ---------------------------------------------------------------------------

constexpr int kDenseCap = 2000;  // direct factorization above this uses CG
constexpr int kMaxDoublings = 60;
constexpr int kMaxBisections = 60;
constexpr int kMaxCgIters = 4000;

struct Context {
  const Eigen::VectorXd* g = nullptr;
  const MeasurementOperator* M = nullptr;
  const Parameterization* param = nullptr;
  const AnalysisOperator* omega = nullptr;
  std::vector<int> cosupport;      // 0-based row ids
  std::vector<int> weighted_rows;  // 0-based row ids carrying the gamma term
  double gamma = 0.0;
  double ridge = 0.0;
  double ls_tol = 1e-8;
  int d = 0;
  int nc = 0;
  int N = 0;

  double weight(int i, int t) const { return (*param).weights[i][t]; }

  // f[t] = sum_i w_i[t] u[t*nc+i]
  Eigen::VectorXd synthesize(const Eigen::VectorXd& u) const {
    Eigen::VectorXd f(d);
    for (int t = 0; t < d; ++t) {
      double s = 0.0;
      for (int i = 0; i < nc; ++i) s += weight(i, t) * u[t * nc + i];
      f[t] = s;
    }
    return f;
  }

  double residual_norm(const Eigen::VectorXd& u) const {
    return (*g - M->apply(synthesize(u))).norm();
  }

  // out += (Q1 + gamma*Q2 + ridge I) u
  void apply_quadratic(const Eigen::VectorXd& u, Eigen::VectorXd& out) const {
    for (int r : cosupport) {
      const auto& row = omega->entries[r];
      for (int i = 0; i < nc; ++i) {
        double s = 0.0;
        for (const auto& [j, a] : row) s += a * u[j * nc + i];
        for (const auto& [j, a] : row) out[j * nc + i] += a * s;
      }
    }
    if (gamma > 0.0 && !weighted_rows.empty()) {
      for (int r : weighted_rows) {
        const auto& row = omega->entries[r];
        double s = 0.0;
        for (const auto& [j, a] : row)
          for (int i = 0; i < nc; ++i) s += a * weight(i, j) * u[j * nc + i];
        s *= gamma;
        for (const auto& [j, a] : row)
          for (int i = 0; i < nc; ++i) out[j * nc + i] += a * weight(i, j) * s;
      }
    }
    out += ridge * u;
  }

  // out += lambda * X' M' M X u
  void apply_data(double lambda, const Eigen::VectorXd& u,
                  Eigen::VectorXd& out) const {
    Eigen::VectorXd y = M->apply_transpose(M->apply(synthesize(u)));
    for (int t = 0; t < d; ++t)
      for (int i = 0; i < nc; ++i)
        out[t * nc + i] += lambda * weight(i, t) * y[t];
  }

  Eigen::VectorXd data_rhs(double lambda) const {
    Eigen::VectorXd y = M->apply_transpose(*g);
    Eigen::VectorXd rhs(N);
    for (int t = 0; t < d; ++t)
      for (int i = 0; i < nc; ++i) rhs[t * nc + i] = lambda * weight(i, t) * y[t];
    return rhs;
  }

  // Trace of the cosupport gram (the gamma penalty is excluded: the ridge
  // guards the joint degeneracy of Omega_Lambda and the constraint, and the
  // penalty term must not inflate it).
  double quadratic_trace() const {
    double tr = 0.0;
    for (int r : cosupport) {
      double s = 0.0;
      for (const auto& [j, a] : omega->entries[r]) {
        (void)j;
        s += a * a;
      }
      tr += nc * s;
    }
    return tr;
  }

  double data_trace() const {
    // trace of X' M' M X
    Eigen::VectorXd col2(d);
    if (M->kind == MeasureKind::kIdentity) {
      col2.setOnes();
    } else {
      for (int t = 0; t < d; ++t) col2[t] = M->matrix.col(t).squaredNorm();
    }
    double tr = 0.0;
    for (int t = 0; t < d; ++t)
      for (int i = 0; i < nc; ++i) tr += col2[t] * weight(i, t) * weight(i, t);
    return tr;
  }
};

// ---------------------------------------------------------------------------
// lambda-parameterized solvers: (Q + ridge I + lambda C) u = lambda X'M'g
// ---------------------------------------------------------------------------

class Engine {
 public:
  virtual ~Engine() = default;
  // rel_tol only matters for iterative engines; direct ones solve exactly.
  virtual Eigen::VectorXd solve(double lambda, const Eigen::VectorXd* warm,
                                double rel_tol) = 0;
  virtual bool iterative() const { return false; }
};

class BandedEngine : public Engine {
 public:
  explicit BandedEngine(const Context& ctx) : ctx_(ctx) {
    const int nc = ctx.nc;
    hbw_ = 2 * nc - 1;
    quad_.init(ctx.N, hbw_);
    data_.init(ctx.N, hbw_);
    for (int r : ctx.cosupport) add_row_outer(quad_, ctx.omega->entries[r], 1.0);
    if (ctx.gamma > 0.0)
      for (int r : ctx.weighted_rows) add_signal_row_outer(quad_, r, ctx.gamma);
    for (int i = 0; i < ctx.N; ++i) quad_.at(i, i) += ctx.ridge;
    for (int t = 0; t < ctx.d; ++t)
      for (int i = 0; i < nc; ++i)
        for (int j = i; j < nc; ++j)
          data_.add_sym(t * nc + i, t * nc + j,
                        ctx.weight(i, t) * ctx.weight(j, t));
  }

  Eigen::VectorXd solve(double lambda, const Eigen::VectorXd*, double) override {
    BandMatrix a = quad_;
    for (std::size_t i = 0; i < a.a.size(); ++i) a.a[i] += lambda * data_.a[i];
    if (!band_cholesky(a))
      throw std::runtime_error("banded cholesky failed");
    return band_solve(a, ctx_.data_rhs(lambda));
  }

 private:
  void add_row_outer(BandMatrix& m,
                     const std::vector<std::pair<int, double>>& row,
                     double scale) {
    for (int i = 0; i < ctx_.nc; ++i)
      for (const auto& [j1, a1] : row)
        for (const auto& [j2, a2] : row) {
          const int p = j1 * ctx_.nc + i;
          const int q = j2 * ctx_.nc + i;
          if (p <= q) m.add_sym(p, q, scale * a1 * a2);
        }
  }
  // outer product of the row of Omega X (couples all blocks at both samples)
  void add_signal_row_outer(BandMatrix& m, int r, double scale) {
    const auto& row = ctx_.omega->entries[r];
    for (const auto& [j1, a1] : row)
      for (int i1 = 0; i1 < ctx_.nc; ++i1)
        for (const auto& [j2, a2] : row)
          for (int i2 = 0; i2 < ctx_.nc; ++i2) {
            const int p = j1 * ctx_.nc + i1;
            const int q = j2 * ctx_.nc + i2;
            if (p <= q)
              m.add_sym(p, q, scale * a1 * ctx_.weight(i1, j1) * a2 *
                                  ctx_.weight(i2, j2));
          }
  }

  const Context& ctx_;
  int hbw_ = 0;
  BandMatrix quad_;
  BandMatrix data_;
};

class DenseEngine : public Engine {
 public:
  explicit DenseEngine(const Context& ctx) : ctx_(ctx) {
    const int N = ctx.N;
    quad_ = Eigen::MatrixXd::Zero(N, N);
    Eigen::VectorXd e(N), col(N);
    for (int c = 0; c < N; ++c) {
      e.setZero();
      e[c] = 1.0;
      col.setZero();
      ctx.apply_quadratic(e, col);
      quad_.col(c) = col;
    }
    // B = M X, one column per unknown
    b_.resize(ctx.M->m, N);
    for (int t = 0; t < ctx.d; ++t) {
      Eigen::VectorXd mcol = ctx.M->kind == MeasureKind::kIdentity
                                 ? Eigen::VectorXd::Unit(ctx.d, t)
                                 : Eigen::VectorXd(ctx.M->matrix.col(t));
      for (int i = 0; i < ctx.nc; ++i)
        b_.col(t * ctx.nc + i) = mcol * ctx.weight(i, t);
    }
    data_ = b_.transpose() * b_;
    btg_ = b_.transpose() * (*ctx.g);
  }

  Eigen::VectorXd solve(double lambda, const Eigen::VectorXd*, double) override {
    Eigen::MatrixXd a = quad_ + lambda * data_;
    return Eigen::LDLT<Eigen::MatrixXd>(a).solve(lambda * btg_);
  }

  const Eigen::MatrixXd& design() const { return b_; }
  const Eigen::MatrixXd& quad() const { return quad_; }

 private:
  const Context& ctx_;
  Eigen::MatrixXd quad_;
  Eigen::MatrixXd b_;
  Eigen::MatrixXd data_;
  Eigen::VectorXd btg_;
};

class CgEngine : public Engine {
 public:
  explicit CgEngine(const Context& ctx) : ctx_(ctx) {
    if (ctx.M->kind == MeasureKind::kIdentity) {
      mtm_diag_ = Eigen::VectorXd::Ones(ctx.d);
    } else {
      mtm_diag_.resize(ctx.d);
      for (int t = 0; t < ctx.d; ++t)
        mtm_diag_[t] = ctx.M->matrix.col(t).squaredNorm();
    }
    build_components();
  }

  Eigen::VectorXd solve(double lambda, const Eigen::VectorXd* warm,
                        double rel_tol) override {
    const int N = ctx_.N;
    const Eigen::VectorXd rhs = ctx_.data_rhs(lambda);
    Eigen::VectorXd x =
        (warm && warm->size() == N) ? *warm : Eigen::VectorXd::Zero(N);
    const double rhs_norm = rhs.norm();
    if (rhs_norm == 0.0) return Eigen::VectorXd::Zero(N);

    build_preconditioner(lambda);
    Eigen::VectorXd r = rhs;
    Eigen::VectorXd tmp = Eigen::VectorXd::Zero(N);
    apply(lambda, x, tmp);
    r -= tmp;
    Eigen::VectorXd z = precondition(r);
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    const double tol = rel_tol * rhs_norm;
    for (int it = 0; it < kMaxCgIters; ++it) {
      if (r.norm() <= tol) break;
      tmp.setZero();
      apply(lambda, p, tmp);
      const double alpha = rz / p.dot(tmp);
      x += alpha * p;
      r -= alpha * tmp;
      z = precondition(r);
      const double rz_new = r.dot(z);
      p = z + (rz_new / rz) * p;
      rz = rz_new;
    }
    return x;
  }

  bool iterative() const override { return true; }

 private:
  void apply(double lambda, const Eigen::VectorXd& u, Eigen::VectorXd& out) const {
    ctx_.apply_quadratic(u, out);
    ctx_.apply_data(lambda, u, out);
  }

  // block-Jacobi over the per-sample nc x nc diagonal blocks
  void build_preconditioner(double lambda) {
    const int nc = ctx_.nc;
    blocks_.assign(ctx_.d, Eigen::MatrixXd::Zero(nc, nc));
    for (int r : ctx_.cosupport)
      for (const auto& [j, a] : ctx_.omega->entries[r])
        for (int i = 0; i < nc; ++i) blocks_[j](i, i) += a * a;
    if (ctx_.gamma > 0.0) {
      for (int r : ctx_.weighted_rows)
        for (const auto& [j, a] : ctx_.omega->entries[r])
          for (int i = 0; i < nc; ++i)
            for (int k = 0; k < nc; ++k)
              blocks_[j](i, k) +=
                  ctx_.gamma * a * a * ctx_.weight(i, j) * ctx_.weight(k, j);
    }
    factors_.resize(ctx_.d);
    for (int t = 0; t < ctx_.d; ++t) {
      for (int i = 0; i < nc; ++i) {
        for (int k = 0; k < nc; ++k)
          blocks_[t](i, k) +=
              lambda * mtm_diag_[t] * ctx_.weight(i, t) * ctx_.weight(k, t);
        blocks_[t](i, i) += ctx_.ridge;
      }
      factors_[t].compute(blocks_[t]);
    }
    build_coarse(lambda);
  }

  Eigen::VectorXd precondition(const Eigen::VectorXd& r) const {
    const int nc = ctx_.nc;
    Eigen::VectorXd z(r.size());
    for (int t = 0; t < ctx_.d; ++t)
      z.segment(t * nc, nc) = factors_[t].solve(r.segment(t * nc, nc));
    // coarse correction over the per-component constant modes
    Eigen::VectorXd y = restrict(r);
    y = coarse_.solve(y);
    for (int t = 0; t < ctx_.d; ++t) {
      const int k = comp_[t];
      for (int i = 0; i < nc; ++i) z[t * nc + i] += y[k * nc + i];
    }
    return z;
  }

  // Once cosupport rows are removed the pixel graph splits; vectors constant
  // per component and per block are exact null directions of the cosupport
  // term and make plain block-Jacobi CG stall. They are deflated by an
  // additive coarse solve, whose matrix assembles analytically because
  // Q1 V = 0 holds by construction.
  void build_components() {
    const int d = ctx_.d;
    parent_.resize(d);
    for (int t = 0; t < d; ++t) parent_[t] = t;
    for (int r : ctx_.cosupport) {
      const auto& row = ctx_.omega->entries[r];
      for (std::size_t e = 1; e < row.size(); ++e)
        unite(row[0].first, row[e].first);
    }
    comp_.assign(d, -1);
    ncomp_ = 0;
    for (int t = 0; t < d; ++t) {
      const int root = find(t);
      if (comp_[root] < 0) comp_[root] = ncomp_++;
      comp_[t] = comp_[root];
    }
    const int nc = ctx_.nc;
    comp_gram_.assign(ncomp_, Eigen::MatrixXd::Zero(nc, nc));
    comp_size_.assign(ncomp_, 0);
    for (int t = 0; t < d; ++t) {
      const int k = comp_[t];
      ++comp_size_[k];
      for (int i = 0; i < nc; ++i)
        for (int j = 0; j < nc; ++j)
          comp_gram_[k](i, j) +=
              mtm_diag_[t] * ctx_.weight(i, t) * ctx_.weight(j, t);
    }
  }

  int find(int a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[a] = b;
  }

  Eigen::VectorXd restrict(const Eigen::VectorXd& r) const {
    const int nc = ctx_.nc;
    Eigen::VectorXd y = Eigen::VectorXd::Zero(ncomp_ * nc);
    for (int t = 0; t < ctx_.d; ++t) {
      const int k = comp_[t];
      for (int i = 0; i < nc; ++i) y[k * nc + i] += r[t * nc + i];
    }
    return y;
  }

  void build_coarse(double lambda) {
    const int nc = ctx_.nc;
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(ncomp_ * nc, ncomp_ * nc);
    for (int k = 0; k < ncomp_; ++k) {
      e.block(k * nc, k * nc, nc, nc) = lambda * comp_gram_[k];
      for (int i = 0; i < nc; ++i)
        e(k * nc + i, k * nc + i) += ctx_.ridge * comp_size_[k];
    }
    if (ctx_.gamma > 0.0) {
      for (int r : ctx_.weighted_rows) {
        const auto& row = ctx_.omega->entries[r];
        // (Omega X v) for v constant per component: sum the weighted entries
        Eigen::VectorXd coef = Eigen::VectorXd::Zero(ncomp_ * nc);
        for (const auto& [j, a] : row)
          for (int i = 0; i < nc; ++i)
            coef[comp_[j] * nc + i] += a * ctx_.weight(i, j);
        e += ctx_.gamma * coef * coef.transpose();
      }
    }
    coarse_.compute(e);
  }

  const Context& ctx_;
  Eigen::VectorXd mtm_diag_;
  std::vector<Eigen::MatrixXd> blocks_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> factors_;
  std::vector<int> parent_;
  std::vector<int> comp_;
  int ncomp_ = 0;
  std::vector<Eigen::MatrixXd> comp_gram_;
  std::vector<int> comp_size_;
  Eigen::LDLT<Eigen::MatrixXd> coarse_;
};

// ---------------------------------------------------------------------------
// equality-constrained path (noise_norm = 0)
// ---------------------------------------------------------------------------

// With M = I the constraint X b = g is eliminated through block 0 (its weight
// vector never vanishes for the parameterizations used here): b_0[t] =
// (g[t] - sum_{i>=1} w_i[t] b_i[t]) / w_0[t]. What remains is an
// unconstrained least squares over the other blocks, banded in 1D.
Eigen::VectorXd solve_equality_identity(const Context& ctx) {
  const int nc = ctx.nc;
  const int d = ctx.d;
  const Eigen::VectorXd& g = *ctx.g;
  Eigen::VectorXd u(ctx.N);
  if (nc == 1) {
    for (int t = 0; t < d; ++t) u[t] = g[t] / ctx.weight(0, t);
    return u;
  }
  const int m = nc - 1;
  const int n_red = m * d;
  std::vector<Eigen::VectorXd> what(nc, Eigen::VectorXd(d));
  Eigen::VectorXd ghat(d);
  for (int t = 0; t < d; ++t) {
    const double w0 = ctx.weight(0, t);
    ghat[t] = g[t] / w0;
    for (int i = 1; i < nc; ++i) what[i][t] = ctx.weight(i, t) / w0;
  }

  // Residual rows, for each cosupport row r with entries (j, a):
  //  row0:  c_r - sum_j sum_{i>=1} a*what_i[j] v_i[j],  c_r = sum_j a*ghat[j]
  //  row i: sum_j a v_i[j]
  auto apply_h = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out) {
    out = ctx.ridge * v;
    for (int r : ctx.cosupport) {
      const auto& row = ctx.omega->entries[r];
      double s0 = 0.0;
      for (const auto& [j, a] : row)
        for (int i = 1; i < nc; ++i) s0 += a * what[i][j] * v[j * m + i - 1];
      for (const auto& [j, a] : row)
        for (int i = 1; i < nc; ++i) out[j * m + i - 1] += a * what[i][j] * s0;
      for (int i = 1; i < nc; ++i) {
        double si = 0.0;
        for (const auto& [j, a] : row) si += a * v[j * m + i - 1];
        for (const auto& [j, a] : row) out[j * m + i - 1] += a * si;
      }
    }
  };
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_red);
  for (int r : ctx.cosupport) {
    const auto& row = ctx.omega->entries[r];
    double cr = 0.0;
    for (const auto& [j, a] : row) cr += a * ghat[j];
    for (const auto& [j, a] : row)
      for (int i = 1; i < nc; ++i) rhs[j * m + i - 1] += a * what[i][j] * cr;
  }

  Eigen::VectorXd v;
  if (ctx.omega->geometry == Geometry::kOneD) {
    BandMatrix h;
    h.init(n_red, std::max(1, 2 * m - 1));
    for (int r : ctx.cosupport) {
      const auto& row = ctx.omega->entries[r];
      for (const auto& [j1, a1] : row)
        for (int i1 = 1; i1 < nc; ++i1)
          for (const auto& [j2, a2] : row)
            for (int i2 = 1; i2 < nc; ++i2) {
              const int p = j1 * m + i1 - 1;
              const int q = j2 * m + i2 - 1;
              if (p <= q)
                h.add_sym(p, q, a1 * what[i1][j1] * a2 * what[i2][j2] +
                                    (i1 == i2 ? a1 * a2 : 0.0));
            }
    }
    for (int i = 0; i < n_red; ++i) h.at(i, i) += ctx.ridge;
    if (!band_cholesky(h)) throw std::runtime_error("banded cholesky failed");
    v = band_solve(h, rhs);
    // iterated Tikhonov: cancel the ridge bias against the plain objective
    for (int pass = 0; pass < 3; ++pass)
      v = band_solve(h, rhs + ctx.ridge * v);
  } else {
    // preconditioned CG on the reduced normal equations
    std::vector<Eigen::LLT<Eigen::MatrixXd>> factors(d);
    {
      std::vector<Eigen::MatrixXd> blocks(d, Eigen::MatrixXd::Zero(m, m));
      for (int r : ctx.cosupport)
        for (const auto& [j, a] : ctx.omega->entries[r])
          for (int i1 = 1; i1 < nc; ++i1)
            for (int i2 = 1; i2 < nc; ++i2)
              blocks[j](i1 - 1, i2 - 1) +=
                  a * a * (what[i1][j] * what[i2][j] + (i1 == i2 ? 1.0 : 0.0));
      for (int t = 0; t < d; ++t) {
        for (int i = 0; i < m; ++i) blocks[t](i, i) += ctx.ridge;
        factors[t].compute(blocks[t]);
      }
    }
    auto precond = [&](const Eigen::VectorXd& r) {
      Eigen::VectorXd z(n_red);
      for (int t = 0; t < d; ++t)
        z.segment(t * m, m) = factors[t].solve(r.segment(t * m, m));
      return z;
    };
    v = Eigen::VectorXd::Zero(n_red);
    const double tol = ctx.ls_tol * rhs.norm();
    // outer passes implement the same iterated-Tikhonov bias correction
    for (int pass = 0; pass < 4; ++pass) {
      const Eigen::VectorXd b_rhs = pass == 0 ? rhs : rhs + ctx.ridge * v;
      Eigen::VectorXd r = b_rhs, tmp(n_red);
      apply_h(v, tmp);
      r -= tmp;
      Eigen::VectorXd z = precond(r);
      Eigen::VectorXd p = z;
      double rz = r.dot(z);
      for (int it = 0; it < kMaxCgIters && r.norm() > tol; ++it) {
        apply_h(p, tmp);
        const double alpha = rz / p.dot(tmp);
        v += alpha * p;
        r -= alpha * tmp;
        z = precond(r);
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
      }
    }
  }

  for (int t = 0; t < d; ++t) {
    double acc = ghat[t];
    for (int i = 1; i < nc; ++i) {
      u[t * nc + i] = v[t * m + i - 1];
      acc -= what[i][t] * v[t * m + i - 1];
    }
    u[t * nc] = acc;
  }
  return u;
}

// General M: Schur-complement solve of   min b' Q~ b  s.t.  B b = g.
// The ridge keeps the factorization definite but biases the minimizer along
// small-curvature feasible directions; a few iterated-Tikhonov passes
// (minimize b'Qb + ridge ||b - b_prev||^2) cancel that bias to high order.
Eigen::VectorXd solve_equality_schur(const Context& ctx) {
  DenseEngine dense(ctx);
  const Eigen::MatrixXd& b = dense.design();
  Eigen::MatrixXd quad = dense.quad();
  Eigen::LLT<Eigen::MatrixXd> qf(quad);
  if (qf.info() != Eigen::Success)
    throw std::runtime_error("equality path: quadratic form not SPD");
  Eigen::MatrixXd y = qf.solve(b.transpose());       // N x m
  Eigen::MatrixXd schur = b * y;                     // m x m
  Eigen::LDLT<Eigen::MatrixXd> sf(schur);
  Eigen::VectorXd u = y * sf.solve(*ctx.g);
  for (int pass = 0; pass < 3; ++pass) {
    const Eigen::VectorXd p = ctx.ridge * qf.solve(u);
    u = p + y * sf.solve(*ctx.g - b * p);
  }
  return u;
}

// ---------------------------------------------------------------------------

CosupportSolution solve_impl(const Context& ctx, double noise_norm,
                             double bisection_tol, const Eigen::VectorXd* warm,
                             Eigen::VectorXd* warm_out, double lambda_hint) {
  CosupportSolution out;
  const double gnorm = ctx.g->norm();
  Eigen::VectorXd u;

  auto finish = [&](double lambda, bool unmet) {
    out.lambda = lambda;
    out.bound_unmet = unmet;
    out.residual_norm = ctx.residual_norm(u);
    out.b.resize(ctx.nc);
    for (int i = 0; i < ctx.nc; ++i) {
      out.b[i].resize(ctx.d);
      for (int t = 0; t < ctx.d; ++t) out.b[i][t] = u[t * ctx.nc + i];
    }
    if (warm_out) *warm_out = u;
    return out;
  };

  // The objective has no data term, so its unconstrained minimizer is b = 0;
  // feasible whenever the measurements themselves are within the bound.
  if (gnorm <= noise_norm) {
    u = Eigen::VectorXd::Zero(ctx.N);
    return finish(0.0, false);
  }

  if (noise_norm == 0.0) {
    if (ctx.M->kind == MeasureKind::kIdentity) {
      u = solve_equality_identity(ctx);
    } else if (ctx.N + ctx.M->m <= 2 * kDenseCap) {
      u = solve_equality_schur(ctx);
    } else {
      // out of direct reach: treat as a very tight residual target below
      noise_norm = 1e-12 * gnorm;
      bisection_tol = noise_norm;
    }
    if (u.size() == ctx.N) {
      const double res = ctx.residual_norm(u);
      return finish(std::numeric_limits<double>::infinity(),
                    res > 1e-6 * gnorm);
    }
  }

  std::unique_ptr<Engine> engine;
  const bool banded = ctx.M->kind == MeasureKind::kIdentity &&
                      ctx.omega->geometry == Geometry::kOneD;
  if (banded)
    engine = std::make_unique<BandedEngine>(ctx);
  else if (ctx.N <= kDenseCap)
    engine = std::make_unique<DenseEngine>(ctx);
  else
    engine = std::make_unique<CgEngine>(ctx);

  // Bracketing solves may run at a looser tolerance; the returned solution is
  // re-solved tight below.
  const double loose_tol =
      engine->iterative() ? std::max(ctx.ls_tol, 1e-5) : ctx.ls_tol;
  Eigen::VectorXd warm_local = warm ? *warm : Eigen::VectorXd();
  const Eigen::VectorXd* warm_ptr = warm ? &warm_local : nullptr;
  auto eval = [&](double lam) {
    Eigen::VectorXd cand = engine->solve(lam, warm_ptr, loose_tol);
    warm_local = cand;
    warm_ptr = &warm_local;
    return std::make_pair(std::move(cand), ctx.residual_norm(warm_local));
  };

  // Bracket the multiplier: residual(lambda) decreases from ||g||. A hint
  // from the previous cosupport iteration narrows the search considerably.
  double lam_lo = 0.0;
  double lam_hi = -1.0;
  Eigen::VectorXd u_hi;
  double res_hi = 0.0;
  bool feasible = false;
  if (lambda_hint > 0.0 && std::isfinite(lambda_hint)) {
    auto [cand, res] = eval(lambda_hint);
    if (res <= noise_norm) {
      lam_hi = lambda_hint;
      u_hi = std::move(cand);
      res_hi = res;
      feasible = true;
      double probe = lambda_hint;
      for (int i = 0; i < kMaxDoublings && lam_lo == 0.0; ++i) {
        probe *= 0.5;
        if (probe < 1e-300) break;
        auto [cand_lo, res_lo] = eval(probe);
        if (res_lo > noise_norm) {
          lam_lo = probe;
        } else {
          lam_hi = probe;
          u_hi = std::move(cand_lo);
          res_hi = res_lo;
        }
      }
    } else {
      lam_lo = lambda_hint;
      double probe = lambda_hint;
      for (int i = 0; i <= kMaxDoublings; ++i) {
        probe *= 2.0;
        auto [cand_hi, r] = eval(probe);
        if (r <= noise_norm) {
          lam_hi = probe;
          u_hi = std::move(cand_hi);
          res_hi = r;
          feasible = true;
          break;
        }
        lam_lo = probe;
      }
    }
  } else {
    double probe = 1.0;
    for (int i = 0; i <= kMaxDoublings; ++i) {
      auto [cand, r] = eval(probe);
      if (r <= noise_norm) {
        lam_hi = probe;
        u_hi = std::move(cand);
        res_hi = r;
        feasible = true;
        break;
      }
      lam_lo = probe;
      probe *= 2.0;
    }
  }
  if (!feasible) {
    u = u_hi.size() == ctx.N ? u_hi
                             : engine->solve(lam_lo, warm_ptr, ctx.ls_tol);
    return finish(lam_lo, true);  // lambda -> infinity branch: least squares
  }

  u = u_hi;
  double lambda = lam_hi;
  if (std::abs(res_hi - noise_norm) > bisection_tol) {
    for (int i = 0; i < kMaxBisections; ++i) {
      const double mid = 0.5 * (lam_lo + lam_hi);
      auto [cand, res] = eval(mid);
      if (res <= noise_norm) {
        lam_hi = mid;
        u = std::move(cand);
        lambda = mid;
        if (noise_norm - res <= bisection_tol) break;
      } else {
        lam_lo = mid;
        if (res - noise_norm <= bisection_tol) {
          u = std::move(cand);
          lambda = mid;
          break;
        }
      }
    }
  }
  if (engine->iterative() && loose_tol > ctx.ls_tol) {
    warm_local = u;
    warm_ptr = &warm_local;
    u = engine->solve(lambda, warm_ptr, ctx.ls_tol);
  }
  return finish(lambda, false);
}

Context make_context(const Eigen::VectorXd& g, const MeasurementOperator& M,
                     const Parameterization& param, const AnalysisOperator& omega,
                     const std::vector<int>& cosupport_1b,
                     const std::vector<int>& weighted_1b, double gamma,
                     const BGAPNConfig& cfg) {
  if (param.dim != M.d || omega.cols != param.dim)
    throw std::invalid_argument("cosupport ls: dimension mismatch");
  if (g.size() != M.m)
    throw std::invalid_argument("cosupport ls: measurement length mismatch");
  Context ctx;
  ctx.g = &g;
  ctx.M = &M;
  ctx.param = &param;
  ctx.omega = &omega;
  ctx.gamma = gamma;
  ctx.ls_tol = cfg.ls_tolerance;
  ctx.d = param.dim;
  ctx.nc = param.count();
  ctx.N = ctx.d * ctx.nc;
  ctx.cosupport.reserve(cosupport_1b.size());
  for (int r : cosupport_1b) {
    if (r < 1 || r > omega.rows)
      throw std::invalid_argument("cosupport ls: row index out of range");
    ctx.cosupport.push_back(r - 1);
  }
  for (int r : weighted_1b) {
    if (r < 1 || r > omega.rows)
      throw std::invalid_argument("cosupport ls: weighted row out of range");
    ctx.weighted_rows.push_back(r - 1);
  }
  const double tr = ctx.quadratic_trace() + ctx.data_trace();
  ctx.ridge = cfg.tikhonov * (tr > 0.0 ? tr / ctx.N : 1.0);
  return ctx;
}

}  // namespace

CosupportSolution solve_cosupport_ls(const Eigen::VectorXd& g,
                                     const MeasurementOperator& M,
                                     const Parameterization& param,
                                     const AnalysisOperator& omega,
                                     const std::vector<int>& cosupport,
                                     const std::vector<int>& weighted_rows,
                                     double gamma, double noise_norm,
                                     double bisection_tol,
                                     const BGAPNConfig& cfg) {
  if (noise_norm < 0.0)
    throw std::invalid_argument("cosupport ls: noise_norm must be >= 0");
  Context ctx = make_context(g, M, param, omega, cosupport, weighted_rows,
                             gamma, cfg);
  return solve_impl(ctx, noise_norm, bisection_tol, nullptr, nullptr, 0.0);
}

namespace {

RecoveryOutput bgapn_impl(const Eigen::VectorXd& g, const MeasurementOperator& M,
                          const Parameterization& param_in,
                          const AnalysisOperator& omega, const BGAPNConfig& cfg,
                          double gamma) {
  if (cfg.noise_norm < 0.0)
    throw std::invalid_argument("bgapn: noise_norm must be >= 0");
  if (cfg.max_iters < 1)
    throw std::invalid_argument("bgapn: max_iters must be >= 1");
  if (gamma < 0.0) throw std::invalid_argument("bgapn: gamma must be >= 0");

  std::vector<double> ratios;
  const Parameterization param = normalize_weights(param_in, &ratios);
  const int p = omega.rows;
  const int nc = param.count();

  int rows_per_iter = cfg.rows_per_iter;
  if (rows_per_iter <= 0)
    rows_per_iter = (omega.geometry == Geometry::kOneD && param.dim <= 1000)
                        ? 1
                        : (p + 99) / 100;

  double epsilon = cfg.epsilon;
  if (epsilon < 0.0) {
    const double dynrange = g.size() > 0 ? g.maxCoeff() - g.minCoeff() : 0.0;
    epsilon = 1e-3 * dynrange;
    if (epsilon <= 0.0)  // constant input: stop on rounding-level residues
      epsilon = 1e-12 * (1.0 + g.cwiseAbs().maxCoeff());
  }

  std::vector<int> cosupport(p);
  std::iota(cosupport.begin(), cosupport.end(), 1);
  std::vector<int> removed;

  RecoveryOutput out;
  const double tol = 1e-3 * cfg.noise_norm;

  // Two solve families: the penalty-free problem drives row selection and
  // halting; with gamma > 0 the weighted re-solve supplies the estimate.
  Eigen::VectorXd warm_free, warm_est;
  double hint_free = 0.0, hint_est = 0.0;
  CosupportSolution sol_free, sol_est;

  auto solve_free = [&]() {
    Context ctx = make_context(g, M, param, omega, cosupport, {}, 0.0, cfg);
    sol_free = solve_impl(ctx, cfg.noise_norm, tol,
                          warm_free.size() ? &warm_free : nullptr, &warm_free,
                          hint_free);
    if (sol_free.lambda > 0.0 && std::isfinite(sol_free.lambda) &&
        !sol_free.bound_unmet)
      hint_free = sol_free.lambda;
  };
  auto solve_weighted = [&]() {
    Context ctx = make_context(g, M, param, omega, cosupport, removed, gamma, cfg);
    sol_est = solve_impl(ctx, cfg.noise_norm, tol,
                         warm_est.size() ? &warm_est : nullptr, &warm_est,
                         hint_est);
    if (sol_est.lambda > 0.0 && std::isfinite(sol_est.lambda) &&
        !sol_est.bound_unmet)
      hint_est = sol_est.lambda;
  };

  auto row_scores = [&]() {
    // squared joint energy per cosupport row, used for removal ranking
    std::vector<std::pair<double, int>> scores;
    scores.reserve(cosupport.size());
    for (int r : cosupport) {
      double s = 0.0;
      for (int i = 0; i < nc; ++i) {
        const double v = omega.apply_row(r - 1, sol_free.b[i]);
        s += v * v;
      }
      scores.emplace_back(s, r);
    }
    return scores;
  };
  auto stop_metric = [&]() {
    double m = 0.0;
    for (int r : cosupport) {
      double s = 0.0;
      for (int i = 0; i < nc; ++i)
        s += std::abs(omega.apply_row(r - 1, sol_free.b[i]));
      m = std::max(m, s);
    }
    return m;
  };

  solve_free();
  sol_est = sol_free;
  out.iterations = 1;
  out.residual_history.push_back(sol_est.residual_norm);
  out.converged = false;

  while (out.iterations <= cfg.max_iters) {
    if (cosupport.empty() || stop_metric() < epsilon) {
      out.converged = true;
      break;
    }
    if (out.iterations == cfg.max_iters) break;  // no more solves budgeted
    auto scores = row_scores();
    std::sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    const int take = std::min<int>(rows_per_iter, scores.size());
    std::vector<int> drop;
    for (int i = 0; i < take; ++i) drop.push_back(scores[i].second);
    std::sort(drop.begin(), drop.end());
    std::vector<int> next;
    next.reserve(cosupport.size() - drop.size());
    std::set_difference(cosupport.begin(), cosupport.end(), drop.begin(),
                        drop.end(), std::back_inserter(next));
    cosupport.swap(next);
    removed.insert(removed.end(), drop.begin(), drop.end());
    std::sort(removed.begin(), removed.end());

    solve_free();
    if (gamma > 0.0) {
      solve_weighted();
    } else {
      sol_est = sol_free;
    }
    ++out.iterations;
    out.residual_history.push_back(sol_est.residual_norm);
  }

  out.bound_unmet = sol_est.bound_unmet;
  out.jump_set = removed;
  out.estimate = param.synthesize(sol_est.b);
  out.coeff_vectors.resize(nc);
  for (int i = 0; i < nc; ++i) out.coeff_vectors[i] = sol_est.b[i] / ratios[i];
  return out;
}

}  // namespace

RecoveryOutput bgapn(const Eigen::VectorXd& g, const MeasurementOperator& M,
                     const Parameterization& param, const AnalysisOperator& omega,
                     const BGAPNConfig& cfg) {
  return bgapn_impl(g, M, param, omega, cfg, 0.0);
}

RecoveryOutput bgapn_continuity(const Eigen::VectorXd& g,
                                const MeasurementOperator& M,
                                const Parameterization& param,
                                const AnalysisOperator& omega,
                                const BGAPNConfig& cfg) {
  const double gamma = cfg.gamma < 0.0 ? 100.0 : cfg.gamma;
  return bgapn_impl(g, M, param, omega, cfg, gamma);
}

}  // namespace ovp
