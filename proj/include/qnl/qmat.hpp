#pragma once
// Matrix layer: real and complex dense matrices over a shared storage type,
// multipartite index bookkeeping, Hermitian eigensolves, and random ensembles.
//
// A complex matrix is a pair (re, im) of real matrices; no std::complex storage
// anywhere. Hermitian eigenproblems for complex inputs go through the real
// embedding E = [[re, -im], [im, re]], whose spectrum is that of the complex
// matrix with every eigenvalue doubled in multiplicity.

#include <Eigen/Dense>

#include <cassert>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qnl/rng.hpp"

namespace qnl {

enum class Field { real, cplx };

struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// field == real  => im has size 0x0.
// field == cplx  => im has the same shape as re.
struct Mat {
  Field field = Field::real;
  Eigen::MatrixXd re, im;

  Mat() = default;

  long rows() const { return re.rows(); }
  long cols() const { return re.cols(); }
  bool is_real() const { return field == Field::real; }

  static Mat zero(Field f, long rows, long cols) {
    Mat m;
    m.field = f;
    m.re = Eigen::MatrixXd::Zero(rows, cols);
    if (f == Field::cplx) m.im = Eigen::MatrixXd::Zero(rows, cols);
    return m;
  }

  static Mat id(Field f, long n) {
    Mat m = zero(f, n, n);
    m.re = Eigen::MatrixXd::Identity(n, n);
    return m;
  }

  // View under the other field tag; real -> complex adds a zero imaginary part.
  Mat to_field(Field f) const {
    if (f == field) return *this;
    if (f == Field::cplx) {
      Mat m = *this;
      m.field = Field::cplx;
      m.im = Eigen::MatrixXd::Zero(re.rows(), re.cols());
      return m;
    }
    if (im.size() > 0 && im.cwiseAbs().maxCoeff() > 1e-12)
      throw ValidationError("to_field(real): imaginary part is not negligible");
    Mat m;
    m.field = Field::real;
    m.re = re;
    return m;
  }
};

inline Mat real_mat(Eigen::MatrixXd re) {
  Mat m;
  m.field = Field::real;
  m.re = std::move(re);
  return m;
}

inline Mat complex_mat(Eigen::MatrixXd re, Eigen::MatrixXd im) {
  assert(re.rows() == im.rows() && re.cols() == im.cols());
  Mat m;
  m.field = Field::cplx;
  m.re = std::move(re);
  m.im = std::move(im);
  return m;
}

inline Field join(Field a, Field b) {
  return (a == Field::cplx || b == Field::cplx) ? Field::cplx : Field::real;
}

/* ---- arithmetic ---- */

inline Mat add(const Mat& a, const Mat& b) {
  assert(a.rows() == b.rows() && a.cols() == b.cols());
  Field f = join(a.field, b.field);
  if (f == Field::real) return real_mat(a.re + b.re);
  Mat ac = a.to_field(Field::cplx), bc = b.to_field(Field::cplx);
  return complex_mat(ac.re + bc.re, ac.im + bc.im);
}

inline Mat sub(const Mat& a, const Mat& b) {
  assert(a.rows() == b.rows() && a.cols() == b.cols());
  Field f = join(a.field, b.field);
  if (f == Field::real) return real_mat(a.re - b.re);
  Mat ac = a.to_field(Field::cplx), bc = b.to_field(Field::cplx);
  return complex_mat(ac.re - bc.re, ac.im - bc.im);
}

inline Mat scale(const Mat& a, double s) {
  Mat m = a;
  m.re *= s;
  if (m.field == Field::cplx) m.im *= s;
  return m;
}

inline Mat mul(const Mat& a, const Mat& b) {
  assert(a.cols() == b.rows());
  Field f = join(a.field, b.field);
  if (f == Field::real) return real_mat(a.re * b.re);
  Mat ac = a.to_field(Field::cplx), bc = b.to_field(Field::cplx);
  return complex_mat(ac.re * bc.re - ac.im * bc.im, ac.re * bc.im + ac.im * bc.re);
}

inline Mat mul(const Mat& a, const Mat& b, const Mat& c) { return mul(mul(a, b), c); }

inline Mat transpose(const Mat& a) {
  Mat m;
  m.field = a.field;
  m.re = a.re.transpose();
  if (a.field == Field::cplx) m.im = a.im.transpose();
  return m;
}

inline Mat conj(const Mat& a) {
  Mat m = a;
  if (m.field == Field::cplx) m.im = -m.im;
  return m;
}

inline Mat dagger(const Mat& a) {
  Mat m;
  m.field = a.field;
  m.re = a.re.transpose();
  if (a.field == Field::cplx) m.im = -a.im.transpose();
  return m;
}

inline double trace_re(const Mat& a) { return a.re.trace(); }
inline double trace_im(const Mat& a) { return a.field == Field::cplx ? a.im.trace() : 0.0; }

// Re tr(a^dag b); the Hilbert-Schmidt inner product restricted to its real part.
inline double hs_inner(const Mat& a, const Mat& b) {
  assert(a.rows() == b.rows() && a.cols() == b.cols());
  double v = (a.re.array() * b.re.array()).sum();
  if (a.field == Field::cplx && b.field == Field::cplx)
    v += (a.im.array() * b.im.array()).sum();
  return v;
}

inline double fro_norm(const Mat& a) {
  double v = a.re.squaredNorm();
  if (a.field == Field::cplx) v += a.im.squaredNorm();
  return std::sqrt(v);
}

// Largest entrywise modulus.
inline double max_abs(const Mat& a) {
  if (a.re.size() == 0) return 0.0;
  if (a.field == Field::real) return a.re.cwiseAbs().maxCoeff();
  return (a.re.array().square() + a.im.array().square()).sqrt().maxCoeff();
}

inline double herm_defect(const Mat& a) { return max_abs(sub(a, dagger(a))); }

inline bool approx_equal(const Mat& a, const Mat& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return max_abs(sub(a, b)) <= tol;
}

inline Mat tensor(const Mat& a, const Mat& b) {
  Field f = join(a.field, b.field);
  Mat ac = a.to_field(f), bc = b.to_field(f);
  Mat m = Mat::zero(f, a.rows() * b.rows(), a.cols() * b.cols());
  for (long i = 0; i < a.rows(); ++i)
    for (long j = 0; j < a.cols(); ++j) {
      m.re.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
          ac.re(i, j) * bc.re;
      if (f == Field::cplx) {
        m.re.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) -=
            ac.im(i, j) * bc.im;
        m.im.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
            ac.re(i, j) * bc.im + ac.im(i, j) * bc.re;
      }
    }
  return m;
}

inline Mat tensor(const std::vector<Mat>& parts) {
  assert(!parts.empty());
  Mat m = parts[0];
  for (std::size_t k = 1; k < parts.size(); ++k) m = tensor(m, parts[k]);
  return m;
}

// a b^dag for column vectors a, b.
inline Mat outer(const Mat& a, const Mat& b) { return mul(a, dagger(b)); }

/* ---- multipartite bookkeeping ----
   Subsystem 0 is the leftmost tensor factor; row-major composite indexing. */

inline long dims_product(const std::vector<int>& dims) {
  long p = 1;
  for (int d : dims) p *= d;
  return p;
}

// Lift an operator acting on `sites` (in the listed order) to the full space.
inline Mat embed_op(const Mat& op, const std::vector<int>& sites,
                    const std::vector<int>& dims) {
  const int n = int(dims.size());
  long dop = 1;
  for (int s : sites) {
    assert(s >= 0 && s < n);
    dop *= dims[s];
  }
  assert(op.rows() == dop && op.cols() == dop);
  const long D = dims_product(dims);
  std::vector<long> stride(n, 1);
  for (int k = n - 2; k >= 0; --k) stride[k] = stride[k + 1] * dims[k + 1];
  std::vector<long> op_stride(sites.size(), 1);
  for (int k = int(sites.size()) - 2; k >= 0; --k)
    op_stride[k] = op_stride[k + 1] * dims[sites[k + 1]];

  std::vector<char> on_site(n, 0);
  for (int s : sites) on_site[s] = 1;
  std::vector<int> rest;
  for (int k = 0; k < n; ++k)
    if (!on_site[k]) rest.push_back(k);
  long Drest = 1;
  for (int k : rest) Drest *= dims[k];

  Mat m = Mat::zero(op.field, D, D);
  // Enumerate the identity factor, then paste op entries.
  for (long r = 0; r < Drest; ++r) {
    long base = 0, t = r;
    for (int k = int(rest.size()) - 1; k >= 0; --k) {
      base += (t % dims[rest[k]]) * stride[rest[k]];
      t /= dims[rest[k]];
    }
    for (long i = 0; i < op.rows(); ++i) {
      long row = base, ti = i;
      for (int k = int(sites.size()) - 1; k >= 0; --k) {
        row += (ti % dims[sites[k]]) * stride[sites[k]];
        ti /= dims[sites[k]];
      }
      for (long j = 0; j < op.cols(); ++j) {
        long col = base, tj = j;
        for (int k = int(sites.size()) - 1; k >= 0; --k) {
          col += (tj % dims[sites[k]]) * stride[sites[k]];
          tj /= dims[sites[k]];
        }
        m.re(row, col) = op.re(i, j);
        if (op.field == Field::cplx) m.im(row, col) = op.im(i, j);
      }
    }
  }
  return m;
}

// Trace out everything not in `keep`; kept subsystems stay in their original
// relative order regardless of the order given in `keep`.
inline Mat partial_trace(const Mat& m, const std::vector<int>& keep,
                         const std::vector<int>& dims) {
  const int n = int(dims.size());
  assert(m.rows() == dims_product(dims) && m.cols() == m.rows());
  std::vector<char> keep_mask(n, 0);
  for (int s : keep) {
    assert(s >= 0 && s < n);
    keep_mask[s] = 1;
  }
  std::vector<int> kept, traced;
  for (int k = 0; k < n; ++k) (keep_mask[k] ? kept : traced).push_back(k);

  std::vector<long> stride(n, 1);
  for (int k = n - 2; k >= 0; --k) stride[k] = stride[k + 1] * dims[k + 1];
  long Dk = 1, Dt = 1;
  for (int k : kept) Dk *= dims[k];
  for (int k : traced) Dt *= dims[k];

  Mat out = Mat::zero(m.field, Dk, Dk);
  std::vector<long> kbase(Dk);
  for (long a = 0; a < Dk; ++a) {
    long base = 0, t = a;
    for (int k = int(kept.size()) - 1; k >= 0; --k) {
      base += (t % dims[kept[k]]) * stride[kept[k]];
      t /= dims[kept[k]];
    }
    kbase[a] = base;
  }
  std::vector<long> tbase(Dt);
  for (long r = 0; r < Dt; ++r) {
    long base = 0, t = r;
    for (int k = int(traced.size()) - 1; k >= 0; --k) {
      base += (t % dims[traced[k]]) * stride[traced[k]];
      t /= dims[traced[k]];
    }
    tbase[r] = base;
  }
  for (long a = 0; a < Dk; ++a)
    for (long b = 0; b < Dk; ++b) {
      double sre = 0, sim = 0;
      for (long r = 0; r < Dt; ++r) {
        sre += m.re(kbase[a] + tbase[r], kbase[b] + tbase[r]);
        if (m.field == Field::cplx) sim += m.im(kbase[a] + tbase[r], kbase[b] + tbase[r]);
      }
      out.re(a, b) = sre;
      if (m.field == Field::cplx) out.im(a, b) = sim;
    }
  return out;
}

// Transpose the listed subsystems in place of the full transpose.
inline Mat partial_transpose(const Mat& m, const std::vector<int>& sites,
                             const std::vector<int>& dims) {
  const int n = int(dims.size());
  assert(m.rows() == dims_product(dims) && m.cols() == m.rows());
  std::vector<char> flip(n, 0);
  for (int s : sites) {
    assert(s >= 0 && s < n);
    flip[s] = 1;
  }
  std::vector<long> stride(n, 1);
  for (int k = n - 2; k >= 0; --k) stride[k] = stride[k + 1] * dims[k + 1];
  const long D = m.rows();
  Mat out = Mat::zero(m.field, D, D);
  std::vector<int> ri(n), ci(n);
  for (long r = 0; r < D; ++r) {
    long t = r;
    for (int k = n - 1; k >= 0; --k) {
      ri[k] = int(t % dims[k]);
      t /= dims[k];
    }
    for (long c = 0; c < D; ++c) {
      t = c;
      for (int k = n - 1; k >= 0; --k) {
        ci[k] = int(t % dims[k]);
        t /= dims[k];
      }
      long rr = 0, cc = 0;
      for (int k = 0; k < n; ++k) {
        rr += (flip[k] ? ci[k] : ri[k]) * stride[k];
        cc += (flip[k] ? ri[k] : ci[k]) * stride[k];
      }
      out.re(rr, cc) = m.re(r, c);
      if (m.field == Field::cplx) out.im(rr, cc) = m.im(r, c);
    }
  }
  return out;
}

/* ---- Hermitian eigensolves ---- */

struct Eigh {
  Eigen::VectorXd vals;  // ascending
  Mat vecs;              // columns, orthonormal over the input field
};

namespace detail {

// Complex Gram-Schmidt selection of n columns out of the 2n real-embedding
// eigenvectors. Embedding eigenvectors come in J-partner pairs spanning the
// same complex line, so exactly half survive.
inline Eigh eigh_complex(const Mat& h) {
  const long n = h.rows();
  Eigen::MatrixXd E(2 * n, 2 * n);
  E.topLeftCorner(n, n) = h.re;
  E.topRightCorner(n, n) = -h.im;
  E.bottomLeftCorner(n, n) = h.im;
  E.bottomRightCorner(n, n) = h.re;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(E);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigh: solver failed");

  Eigh out;
  out.vals.resize(n);
  out.vecs = Mat::zero(Field::cplx, n, n);
  long taken = 0;
  for (long k = 0; k < 2 * n && taken < n; ++k) {
    Eigen::VectorXd u = es.eigenvectors().col(k).head(n);
    Eigen::VectorXd v = es.eigenvectors().col(k).tail(n);
    // Project out already accepted vectors (complex inner product).
    for (long j = 0; j < taken; ++j) {
      const auto& qu = out.vecs.re.col(j);
      const auto& qv = out.vecs.im.col(j);
      double cre = qu.dot(u) + qv.dot(v);
      double cim = qu.dot(v) - qv.dot(u);
      u -= cre * qu - cim * qv;
      v -= cre * qv + cim * qu;
    }
    double nrm = std::sqrt(u.squaredNorm() + v.squaredNorm());
    if (nrm < 0.5) continue;  // J-partner of an accepted vector
    out.vecs.re.col(taken) = u / nrm;
    out.vecs.im.col(taken) = v / nrm;
    out.vals(taken) = es.eigenvalues()(k);
    ++taken;
  }
  if (taken != n) throw std::runtime_error("eigh: embedding pair selection failed");
  return out;
}

}  // namespace detail

// Hermitian eigendecomposition; eigenvalues ascending, eigenvectors as columns.
inline Eigh eigh(const Mat& h) {
  assert(h.rows() == h.cols());
  assert(herm_defect(h) <= 1e-8 * std::max(1.0, max_abs(h)));
  if (h.field == Field::real) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (h.re + h.re.transpose()));
    if (es.info() != Eigen::Success) throw std::runtime_error("eigh: solver failed");
    Eigh out;
    out.vals = es.eigenvalues();
    out.vecs = real_mat(es.eigenvectors());
    return out;
  }
  return detail::eigh_complex(h);
}

inline Mat eigh_reconstruct(const Eigh& e) {
  Mat d = Mat::zero(e.vecs.field, e.vals.size(), e.vals.size());
  d.re = e.vals.asDiagonal();
  return mul(e.vecs, d, dagger(e.vecs));
}

inline double min_eig(const Mat& h) {
  Eigh e = eigh(h);
  return e.vals(0);
}

// Sum of |eigenvalue| for Hermitian input; trace distance is half the trace
// norm of the difference.
inline double trace_norm(const Mat& h) {
  Eigh e = eigh(h);
  return e.vals.cwiseAbs().sum();
}

inline double trace_distance(const Mat& a, const Mat& b) {
  return 0.5 * trace_norm(sub(a, b));
}

// Apply f to the eigenvalues of a Hermitian matrix.
template <class F>
inline Mat herm_func(const Mat& h, F f) {
  Eigh e = eigh(h);
  for (long k = 0; k < e.vals.size(); ++k) e.vals(k) = f(e.vals(k));
  return eigh_reconstruct(e);
}

inline Mat psd_sqrt(const Mat& h, double neg_tol = 1e-9) {
  return herm_func(h, [&](double v) {
    assert(v >= -neg_tol * 10 - 1e-12);
    (void)neg_tol;
    return v > 0 ? std::sqrt(v) : 0.0;
  });
}

// Pseudo inverse square root on the support (eigenvalues > rank_tol).
inline Mat psd_pinv_sqrt(const Mat& h, double rank_tol = 1e-12) {
  return herm_func(h, [&](double v) { return v > rank_tol ? 1.0 / std::sqrt(v) : 0.0; });
}

// Projector onto the strictly positive eigenspace (eigenvalues > tol).
inline Mat pos_eigenspace_projector(const Mat& h, double tol = 1e-12) {
  return herm_func(h, [&](double v) { return v > tol ? 1.0 : 0.0; });
}

struct ClipResult {
  Mat m;
  double clipped;  // total negative eigenvalue mass removed
};

// Zero out negative eigenvalues, then rescale to the original trace.
inline ClipResult clip_psd(const Mat& h) {
  Eigh e = eigh(h);
  const double tr0 = trace_re(h);
  double clipped = 0;
  for (long k = 0; k < e.vals.size(); ++k)
    if (e.vals(k) < 0) {
      clipped += -e.vals(k);
      e.vals(k) = 0;
    }
  Mat m = eigh_reconstruct(e);
  const double tr1 = trace_re(m);
  if (tr1 > 0 && tr0 > 0) m = scale(m, tr0 / tr1);
  return {m, clipped};
}

/* ---- states and channels ---- */

struct DensityMatrix {
  Mat m;
  std::vector<int> dims;

  long dim() const { return m.rows(); }
};

// Validation gate used by every constructor in the library:
// unit trace to 1e-10, Hermitian to 1e-10, min eigenvalue >= -1e-9.
inline DensityMatrix density_matrix(Mat m, std::vector<int> dims) {
  if (m.rows() != m.cols()) throw ValidationError("density_matrix: not square");
  if (dims.empty()) dims = {int(m.rows())};
  if (dims_product(dims) != m.rows())
    throw ValidationError("density_matrix: dims do not match matrix size");
  if (std::abs(trace_re(m) - 1.0) > 1e-10 || std::abs(trace_im(m)) > 1e-10)
    throw ValidationError("density_matrix: trace is not 1");
  if (herm_defect(m) > 1e-10) throw ValidationError("density_matrix: not Hermitian");
  if (min_eig(m) < -1e-9) throw ValidationError("density_matrix: negative eigenvalue");
  return DensityMatrix{std::move(m), std::move(dims)};
}

struct KrausMap {
  std::vector<Mat> ks;  // shared shape dout x din

  long dim_in() const { return ks.at(0).cols(); }
  long dim_out() const { return ks.at(0).rows(); }
};

inline Mat apply(const KrausMap& e, const Mat& rho) {
  Mat out = Mat::zero(join(e.ks.at(0).field, rho.field), e.dim_out(), e.dim_out());
  for (const Mat& k : e.ks) out = add(out, mul(k, rho, dagger(k)));
  return out;
}

inline double tp_defect(const KrausMap& e) {
  Mat s = Mat::zero(e.ks.at(0).field, e.dim_in(), e.dim_in());
  for (const Mat& k : e.ks) s = add(s, mul(dagger(k), k));
  return max_abs(sub(s, Mat::id(s.field, e.dim_in())));
}

/* ---- fixed operators ---- */

inline Mat pauli_x() {
  Eigen::MatrixXd m(2, 2);
  m << 0, 1, 1, 0;
  return real_mat(m);
}

inline Mat pauli_z() {
  Eigen::MatrixXd m(2, 2);
  m << 1, 0, 0, -1;
  return real_mat(m);
}

inline Mat pauli_y() {
  Eigen::MatrixXd re = Eigen::MatrixXd::Zero(2, 2), im(2, 2);
  im << 0, -1, 1, 0;
  return complex_mat(re, im);
}

// Column vector |k> in dimension d.
inline Mat basis_vec(Field f, long d, long k) {
  Mat v = Mat::zero(f, d, 1);
  v.re(k, 0) = 1.0;
  return v;
}

// Bell vectors on two qubits: 0 -> phi+, 1 -> psi+, 2 -> phi-, 3 -> psi-.
inline Mat bell_vec(int which) {
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(4, 1);
  const double s = 1.0 / std::sqrt(2.0);
  switch (which) {
    case 0: v(0) = s; v(3) = s; break;
    case 1: v(1) = s; v(2) = s; break;
    case 2: v(0) = s; v(3) = -s; break;
    case 3: v(1) = s; v(2) = -s; break;
    default: throw std::out_of_range("bell_vec: index");
  }
  return real_mat(v);
}

inline Mat bell_proj(int which) { return outer(bell_vec(which), bell_vec(which)); }

/* ---- random ensembles ---- */

inline Mat random_gauss(Field f, long rows, long cols, Rng& rng) {
  Mat m = Mat::zero(f, rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) m.re(i, j) = rng.gauss();
  if (f == Field::cplx)
    for (long i = 0; i < rows; ++i)
      for (long j = 0; j < cols; ++j) m.im(i, j) = rng.gauss();
  return m;
}

inline Mat random_hermitian(Field f, long d, Rng& rng) {
  Mat g = random_gauss(f, d, d, rng);
  return scale(add(g, dagger(g)), 0.5);
}

// Ginibre state G G^dag normalized; full rank almost surely.
inline DensityMatrix random_state(Field f, long d, Rng& rng, long rank = 0) {
  if (rank <= 0) rank = d;
  Mat g = random_gauss(f, d, rank, rng);
  Mat m = mul(g, dagger(g));
  m = scale(m, 1.0 / trace_re(m));
  return density_matrix(std::move(m), {int(d)});
}

inline Mat random_pure_vec(Field f, long d, Rng& rng) {
  Mat v = random_gauss(f, d, 1, rng);
  return scale(v, 1.0 / fro_norm(v));
}

// POVM from Ginibre pieces: E_i = S^{-1/2} G_i G_i^dag S^{-1/2}, S = sum G G^dag.
inline std::vector<Mat> random_povm(Field f, long d, int n_out, Rng& rng) {
  std::vector<Mat> gg;
  Mat s = Mat::zero(f, d, d);
  for (int i = 0; i < n_out; ++i) {
    Mat g = random_gauss(f, d, d, rng);
    gg.push_back(mul(g, dagger(g)));
    s = add(s, gg.back());
  }
  Mat w = psd_pinv_sqrt(s);
  std::vector<Mat> es;
  for (auto& g : gg) es.push_back(mul(w, g, w));
  return es;
}

// Projective measurement: eigenspaces of a random Hermitian matrix, grouped
// into n_out bins of near-equal size.
inline std::vector<Mat> random_projective(Field f, long d, int n_out, Rng& rng) {
  assert(n_out <= d);
  Mat h = random_hermitian(f, d, rng);
  Eigh e = eigh(h);
  std::vector<Mat> ps(n_out, Mat::zero(f, d, d));
  for (long k = 0; k < d; ++k) {
    int bin = int((k * n_out) / d);
    Mat v = Mat::zero(f, d, 1);
    v.re = e.vecs.re.col(k);
    if (f == Field::cplx) v.im = e.vecs.im.col(k);
    ps[bin] = add(ps[bin], outer(v, v));
  }
  return ps;
}

// Trace preserving map with n_kraus operators: stack a Haar-ish isometry from
// QR of a gaussian (n_kraus*d) x d matrix and slice it.
inline KrausMap random_tp_map(Field f, long d, int n_kraus, Rng& rng) {
  if (f == Field::real) {
    Eigen::MatrixXd g(n_kraus * d, d);
    for (long i = 0; i < g.rows(); ++i)
      for (long j = 0; j < g.cols(); ++j) g(i, j) = rng.gauss();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n_kraus * d, d);
    KrausMap e;
    for (int k = 0; k < n_kraus; ++k) e.ks.push_back(real_mat(q.block(k * d, 0, d, d)));
    return e;
  }
  // Complex QR through the real embedding of the tall matrix.
  Mat g = random_gauss(f, n_kraus * d, d, rng);
  // Gram-Schmidt over columns (d is small throughout this library).
  for (long j = 0; j < d; ++j) {
    for (long i = 0; i < j; ++i) {
      double cre = g.re.col(i).dot(g.re.col(j)) + g.im.col(i).dot(g.im.col(j));
      double cim = g.re.col(i).dot(g.im.col(j)) - g.im.col(i).dot(g.re.col(j));
      g.re.col(j) -= cre * g.re.col(i) - cim * g.im.col(i);
      g.im.col(j) -= cre * g.im.col(i) + cim * g.re.col(i);
    }
    double nrm = std::sqrt(g.re.col(j).squaredNorm() + g.im.col(j).squaredNorm());
    g.re.col(j) /= nrm;
    g.im.col(j) /= nrm;
  }
  KrausMap e;
  for (int k = 0; k < n_kraus; ++k)
    e.ks.push_back(complex_mat(g.re.block(k * d, 0, d, d), g.im.block(k * d, 0, d, d)));
  return e;
}

}  // namespace qnl
