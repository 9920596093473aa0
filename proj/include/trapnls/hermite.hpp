#pragma once

// Hermite eigenbasis of the isotropic harmonic oscillator
//
//   H_d = sum_j (-d^2/dy_j^2 + y_j^2),   H_d psi_k = (2|k|+d) psi_k,
//
// with tensor-product Hermite functions psi_k = prod_j psi_{k_j}(y_j) and
// multi-indices |k| <= n_max.  The basis carries two Gauss-Hermite node sets
// built from the same q-point rule:
//
//   * std lattice: nodes t_i of psi_q, total weights w_i; exact for
//     poly(deg <= 2q-1) * exp(-y^2), i.e. for every pair product of basis
//     functions.  Used by analyze/synthesize (round-trip is exact).
//   * cub lattice: t_i/sqrt(2) with weights w_i/sqrt(2); exact for
//     poly(deg <= 2q-1) * exp(-2y^2), i.e. for every quadruple product.
//     Used by the trilinear/quartic quadratures in the resonant module.
//
// Sign convention used everywhere: e^{isH} multiplies level n by
// e^{+is(2n+d)}, so the linear flow of (i d/dt + D)U = 0 is U(t) = e^{itD}U(0).

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <numeric>

#include "trapnls/common.hpp"

namespace trapnls {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

struct BasisSpec {
  int d = 1;
  int n_max = 0;
  int quad_nodes = 0;

  void validate() const {
    if (d < 1 || d > 4) throw ValidationError("BasisSpec: d must be in {1,2,3,4}");
    if (n_max < 0) throw ValidationError("BasisSpec: n_max must be >= 0");
    if (quad_nodes < 2 * n_max + 1)
      throw ValidationError("BasisSpec: quad_nodes must be >= 2*n_max+1 (quadrature would be inexact)");
    if (quad_nodes < 2) throw ValidationError("BasisSpec: quad_nodes must be >= 2");
  }
};

inline double eig_level(int n, int d) { return 2.0 * n + d; }

inline std::uint64_t level_degeneracy(int n, int d) {
  if (n < 0) throw ValidationError("level_degeneracy: n must be >= 0");
  return binomial(n + d - 1, d - 1);
}

// psi_0..psi_n at x, by the normalized three-term recurrence
//   psi_{k+1} = x sqrt(2/(k+1)) psi_k - sqrt(k/(k+1)) psi_{k-1}.
inline void hermite_eval(int n, double x, double* out) {
  const double p0 = std::pow(pi, -0.25) * std::exp(-0.5 * x * x);
  out[0] = p0;
  if (n == 0) return;
  out[1] = std::sqrt(2.0) * x * p0;
  for (int k = 1; k < n; ++k)
    out[k + 1] = x * std::sqrt(2.0 / (k + 1)) * out[k] - std::sqrt(double(k) / (k + 1)) * out[k - 1];
}

inline VectorXd hermite_eval(int n, double x) {
  VectorXd v(n + 1);
  hermite_eval(n, x, v.data());
  return v;
}

namespace detail {

// psi_q and psi_q' at x (derivative from the ladder identity
// psi' = (sqrt(k) psi_{k-1} - sqrt(k+1) psi_{k+1})/sqrt(2)).
inline void psi_and_deriv(int q, double x, double& val, double& der) {
  std::vector<double> tab(q + 2);
  hermite_eval(q + 1, x, tab.data());
  val = tab[q];
  der = (std::sqrt(double(q)) * (q > 0 ? tab[q - 1] : 0.0) - std::sqrt(double(q + 1)) * tab[q + 1]) / std::sqrt(2.0);
}

// Roots of psi_q by sign-change scan plus Newton polish.  All q roots lie in
// (-sqrt(2q+1), sqrt(2q+1)).
inline std::vector<double> hermite_roots(int q) {
  const double R = std::sqrt(2.0 * q + 1.0) + 1.0;
  const int samples = 80 * q + 160;
  std::vector<double> roots;
  roots.reserve(q);
  double xa = -R;
  std::vector<double> tab(q + 1);
  auto psi_q = [&](double x) {
    hermite_eval(q, x, tab.data());
    return tab[q];
  };
  double fa = psi_q(xa);
  for (int i = 1; i <= samples; ++i) {
    const double xb = -R + 2.0 * R * i / samples;
    const double fb = psi_q(xb);
    if (fa == 0.0) roots.push_back(xa);
    else if (fa * fb < 0.0) {
      double lo = xa, hi = xb, flo = fa;
      for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = psi_q(mid);
        if (flo * fm <= 0.0) hi = mid;
        else { lo = mid; flo = fm; }
      }
      double x = 0.5 * (lo + hi);
      for (int it = 0; it < 8; ++it) {
        double v, dv;
        psi_and_deriv(q, x, v, dv);
        const double step = v / dv;
        x -= step;
        if (std::abs(step) < 1e-15 * (1.0 + std::abs(x))) break;
      }
      roots.push_back(x);
    }
    xa = xb;
    fa = fb;
  }
  if ((int)roots.size() != q)
    throw std::runtime_error("hermite_roots: found " + std::to_string(roots.size()) + " of " + std::to_string(q));
  // enforce exact symmetry of the rule
  for (int i = 0; i < q / 2; ++i) {
    const double m = 0.5 * (roots[i] - roots[q - 1 - i]);
    roots[i] = m;
    roots[q - 1 - i] = -m;
  }
  if (q % 2 == 1) roots[q / 2] = 0.0;
  return roots;
}

}  // namespace detail

struct HermiteBasis {
  BasisSpec spec;

  // multi-indices |k| <= n_max, sorted by (level, lexicographic); only the
  // first spec.d slots of each entry are used
  std::vector<std::array<int, 4>> modes;
  std::vector<int> mode_level;
  std::vector<double> mode_eig;  // 2*level + d

  // 1D rule and tables (shared across coordinates)
  std::vector<double> nodes_std, w_std;  // total weights: sum w f(t) ~ int f, f = poly e^{-y^2}
  std::vector<double> nodes_cub, w_cub;  // sum w f(u) ~ int f, f = poly e^{-2y^2}
  MatrixXd psi_std;                      // (n_max+1) x q, psi_k(t_i)
  MatrixXd psi_cub;                      // (n_max+1) x q, psi_k(u_i)

  // dense lattice transforms; lattice index runs with the last coordinate
  // fastest, p = ((i_1 q + i_2) q + ...)
  MatrixXd synth_std;    // q^d x modes
  MatrixXd analyze_std;  // modes x q^d
  MatrixXd synth_cub;
  MatrixXd analyze_cub;

  std::vector<int> mode_lookup;  // packed multi-index -> mode position, -1 if absent

  int dim() const { return spec.d; }
  int n_modes() const { return (int)modes.size(); }
  int n_lattice() const { return synth_std.rows(); }

  int pack(const std::array<int, 4>& k) const {
    int key = 0;
    for (int j = 0; j < spec.d; ++j) key = key * (spec.n_max + 1) + k[j];
    return key;
  }
  int mode_index(const std::array<int, 4>& k) const {
    for (int j = 0; j < spec.d; ++j)
      if (k[j] < 0 || k[j] > spec.n_max) return -1;
    return mode_lookup[pack(k)];
  }

  // coordinates of lattice point p on the std or cub lattice
  std::array<double, 4> lattice_point(int p, bool cub = false) const {
    const auto& nd = cub ? nodes_cub : nodes_std;
    const int q = spec.quad_nodes;
    std::array<double, 4> x{0, 0, 0, 0};
    for (int j = spec.d - 1; j >= 0; --j) {
      x[j] = nd[p % q];
      p /= q;
    }
    return x;
  }
};

using BasisPtr = std::shared_ptr<const HermiteBasis>;

inline BasisPtr build_basis(const BasisSpec& spec) {
  spec.validate();
  auto b = std::make_shared<HermiteBasis>();
  b->spec = spec;
  const int d = spec.d, q = spec.quad_nodes, nmax = spec.n_max;

  b->nodes_std = detail::hermite_roots(q);
  b->w_std.resize(q);
  b->nodes_cub.resize(q);
  b->w_cub.resize(q);
  // Christoffel weights through the orthonormal functions:
  // w_i = 1 / sum_{k<q} psi_k(t_i)^2 integrates poly*e^{-y^2} exactly.
  {
    std::vector<double> tab(q);
    for (int i = 0; i < q; ++i) {
      hermite_eval(q - 1, b->nodes_std[i], tab.data());
      double s = 0;
      for (int k = 0; k < q; ++k) s += tab[k] * tab[k];
      b->w_std[i] = 1.0 / s;
      b->nodes_cub[i] = b->nodes_std[i] / std::sqrt(2.0);
      b->w_cub[i] = b->w_std[i] / std::sqrt(2.0);
    }
  }

  b->psi_std.resize(nmax + 1, q);
  b->psi_cub.resize(nmax + 1, q);
  {
    std::vector<double> tab(nmax + 1);
    for (int i = 0; i < q; ++i) {
      hermite_eval(nmax, b->nodes_std[i], tab.data());
      for (int k = 0; k <= nmax; ++k) b->psi_std(k, i) = tab[k];
      hermite_eval(nmax, b->nodes_cub[i], tab.data());
      for (int k = 0; k <= nmax; ++k) b->psi_cub(k, i) = tab[k];
    }
  }

  // modes by (level, lex)
  for (int lev = 0; lev <= nmax; ++lev) {
    std::array<int, 4> k{0, 0, 0, 0};
    std::function<void(int, int)> rec = [&](int j, int rem) {
      if (j == d - 1) {
        k[j] = rem;
        b->modes.push_back(k);
        return;
      }
      for (int v = 0; v <= rem; ++v) {
        k[j] = v;
        rec(j + 1, rem - v);
      }
    };
    rec(0, lev);
  }
  const int M = (int)b->modes.size();
  b->mode_level.resize(M);
  b->mode_eig.resize(M);
  int lookup_size = 1;
  for (int j = 0; j < d; ++j) lookup_size *= (nmax + 1);
  b->mode_lookup.assign(lookup_size, -1);
  for (int m = 0; m < M; ++m) {
    int lev = 0;
    for (int j = 0; j < d; ++j) lev += b->modes[m][j];
    b->mode_level[m] = lev;
    b->mode_eig[m] = eig_level(lev, d);
    b->mode_lookup[b->pack(b->modes[m])] = m;
  }

  // dense lattice transforms
  int P = 1;
  for (int j = 0; j < d; ++j) P *= q;
  for (int cub = 0; cub < 2; ++cub) {
    const MatrixXd& tab = cub ? b->psi_cub : b->psi_std;
    const auto& w = cub ? b->w_cub : b->w_std;
    MatrixXd S(P, M), A(M, P);
    for (int p = 0; p < P; ++p) {
      std::array<int, 4> idx{0, 0, 0, 0};
      int pp = p;
      for (int j = d - 1; j >= 0; --j) {
        idx[j] = pp % q;
        pp /= q;
      }
      double wp = 1.0;
      for (int j = 0; j < d; ++j) wp *= w[idx[j]];
      for (int m = 0; m < M; ++m) {
        double v = 1.0;
        for (int j = 0; j < d; ++j) v *= tab(b->modes[m][j], idx[j]);
        S(p, m) = v;
        A(m, p) = wp * v;
      }
    }
    if (cub) {
      b->synth_cub = std::move(S);
      b->analyze_cub = std::move(A);
    } else {
      b->synth_std = std::move(S);
      b->analyze_std = std::move(A);
    }
  }
  return b;
}

struct HermiteField {
  BasisPtr basis;
  VectorXcd coeffs;

  HermiteField() = default;
  explicit HermiteField(BasisPtr b) : basis(std::move(b)), coeffs(VectorXcd::Zero(basis->n_modes())) {}
  HermiteField(BasisPtr b, VectorXcd c) : basis(std::move(b)), coeffs(std::move(c)) {
    if (coeffs.size() != basis->n_modes()) throw ValidationError("HermiteField: coefficient length mismatch");
  }

  double norm() const { return coeffs.norm(); }
};

// product of a real matrix with a complex matrix via two real GEMMs
template <class Derived>
inline MatrixXcd real_times_complex(const MatrixXd& A, const Eigen::MatrixBase<Derived>& X) {
  MatrixXcd out(A.rows(), X.cols());
  out.real() = A * X.real();
  out.imag() = A * X.imag();
  return out;
}

// grid_values live on the std lattice (q^d points, last coordinate fastest)
inline HermiteField analyze(const BasisPtr& basis, const VectorXcd& grid_values) {
  if (grid_values.size() != basis->n_lattice())
    throw ValidationError("analyze: grid shape mismatch");
  return HermiteField(basis, real_times_complex(basis->analyze_std, grid_values));
}

inline VectorXcd synthesize(const HermiteField& f) {
  return real_times_complex(f.basis->synth_std, f.coeffs);
}

inline HermiteField project_level(const HermiteField& f, int n) {
  if (n < 0 || n > f.basis->spec.n_max) throw ValidationError("project_level: level out of range");
  HermiteField out(f.basis);
  for (int m = 0; m < f.basis->n_modes(); ++m)
    if (f.basis->mode_level[m] == n) out.coeffs[m] = f.coeffs[m];
  return out;
}

inline HermiteField propagate_harmonic(const HermiteField& f, double s) {
  HermiteField out(f.basis);
  const auto& eig = f.basis->mode_eig;
  // one phase per level would do; per-mode keeps the loop branch-free
  for (int m = 0; m < f.basis->n_modes(); ++m)
    out.coeffs[m] = f.coeffs[m] * std::polar(1.0, s * eig[m]);
  return out;
}

// multiplication by y_j:  y psi_k = (sqrt(k) psi_{k-1} + sqrt(k+1) psi_{k+1})/sqrt(2).
// Content raised past n_max is dropped; the caller owns the headroom.
inline HermiteField apply_y(const HermiteField& f, int j) {
  const auto& b = *f.basis;
  if (j < 0 || j >= b.spec.d) throw ValidationError("apply_y: coordinate out of range");
  HermiteField out(f.basis);
  for (int m = 0; m < b.n_modes(); ++m) {
    const Cx c = f.coeffs[m];
    if (c == 0.0) continue;
    auto k = b.modes[m];
    const int kj = k[j];
    k[j] = kj - 1;
    if (int t = b.mode_index(k); t >= 0) out.coeffs[t] += std::sqrt(kj / 2.0) * c;
    k[j] = kj + 1;
    if (int t = b.mode_index(k); t >= 0) out.coeffs[t] += std::sqrt((kj + 1) / 2.0) * c;
  }
  return out;
}

// d/dy_j:  psi_k' = (sqrt(k) psi_{k-1} - sqrt(k+1) psi_{k+1})/sqrt(2).
inline HermiteField apply_ddy(const HermiteField& f, int j) {
  const auto& b = *f.basis;
  if (j < 0 || j >= b.spec.d) throw ValidationError("apply_ddy: coordinate out of range");
  HermiteField out(f.basis);
  for (int m = 0; m < b.n_modes(); ++m) {
    const Cx c = f.coeffs[m];
    if (c == 0.0) continue;
    auto k = b.modes[m];
    const int kj = k[j];
    k[j] = kj - 1;
    if (int t = b.mode_index(k); t >= 0) out.coeffs[t] += std::sqrt(kj / 2.0) * c;
    k[j] = kj + 1;
    if (int t = b.mode_index(k); t >= 0) out.coeffs[t] -= std::sqrt((kj + 1) / 2.0) * c;
  }
  return out;
}

// Hermite series at an arbitrary point
inline Cx eval_at(const HermiteField& f, const std::array<double, 4>& x) {
  const auto& b = *f.basis;
  const int d = b.spec.d, nmax = b.spec.n_max;
  std::array<VectorXd, 4> tab;
  for (int j = 0; j < d; ++j) tab[j] = hermite_eval(nmax, x[j]);
  Cx acc = 0.0;
  for (int m = 0; m < b.n_modes(); ++m) {
    double v = 1.0;
    for (int j = 0; j < d; ++j) v *= tab[j][b.modes[m][j]];
    acc += v * f.coeffs[m];
  }
  return acc;
}

// The vortex family g_n(y) = (y_1 + i y_2)^n e^{-|y|^2/2} (d = 2), expanded
// in the tensor basis by the ladder operators; conjugate selects (y_1 - i y_2)^n.
inline HermiteField special_g_n(const BasisPtr& basis, int n, bool conjugate = false) {
  if (basis->spec.d != 2) throw ValidationError("special_g_n: requires d = 2");
  if (n < 0 || n > basis->spec.n_max) throw ValidationError("special_g_n: n out of range");
  HermiteField f(basis);
  f.coeffs[0] = std::sqrt(pi);  // e^{-|y|^2/2} = sqrt(pi) psi_{(0,0)}
  const Cx unit = conjugate ? Cx(0, -1) : Cx(0, 1);
  for (int it = 0; it < n; ++it) {
    HermiteField next(basis);
    next.coeffs = apply_y(f, 0).coeffs + unit * apply_y(f, 1).coeffs;
    f = std::move(next);
  }
  // the lowering parts cancel analytically; strip the rounding residue
  for (int m = 0; m < basis->n_modes(); ++m)
    if (basis->mode_level[m] != n) f.coeffs[m] = 0.0;
  return f;
}

// samples of e^{it Laplacian} f at the given points, via the lens transform
//   u(t,x) = (1+4t^2)^{-d/4} v(arctan(2t)/2, x/sqrt(1+4t^2)) e^{i|x|^2 t/(1+4t^2)},
// v(tau) = e^{-i tau H} f.
inline std::vector<Cx> lens_map(const HermiteField& f, double t,
                                const std::vector<std::array<double, 4>>& points) {
  const int d = f.basis->spec.d;
  const double tau = 0.5 * std::atan(2.0 * t);
  const double s2 = std::sqrt(1.0 + 4.0 * t * t);
  const double pref = std::pow(1.0 + 4.0 * t * t, -0.25 * d);
  const HermiteField v = propagate_harmonic(f, -tau);
  std::vector<Cx> out;
  out.reserve(points.size());
  for (const auto& x : points) {
    double r2 = 0;
    std::array<double, 4> xs{0, 0, 0, 0};
    for (int j = 0; j < d; ++j) {
      xs[j] = x[j] / s2;
      r2 += x[j] * x[j];
    }
    out.push_back(pref * eval_at(v, xs) * std::polar(1.0, r2 * t / (1.0 + 4.0 * t * t)));
  }
  return out;
}

// residual of the commutation identity
//   d_{y_j} e^{isH} = e^{isH} (cos(2s) d_{y_j} + i sin(2s) y_j),
// maximized over j.  Meaningful for fields with a level of headroom.
inline double commutator_check(const HermiteField& f, double s) {
  double worst = 0.0;
  const HermiteField fs = propagate_harmonic(f, s);
  for (int j = 0; j < f.basis->spec.d; ++j) {
    const VectorXcd lhs = apply_ddy(fs, j).coeffs;
    HermiteField mixed(f.basis);
    mixed.coeffs = std::cos(2 * s) * apply_ddy(f, j).coeffs +
                   Cx(0, 1) * std::sin(2 * s) * apply_y(f, j).coeffs;
    const VectorXcd rhs = propagate_harmonic(mixed, s).coeffs;
    worst = std::max(worst, (lhs - rhs).norm());
  }
  return worst;
}

}  // namespace trapnls
