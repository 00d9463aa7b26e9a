#pragma once

// Rank-reducing eigenvalues of the rectangular pencil A + lambda*B through
// the staged Thompson-Weil reduction.
//
// Stage 1 brings B to [I_r 0; 0 0] and A to
//
//          r     t     q
//     r [ E11   E12   0    0 ]
//     s [ E21   0     0    0 ]
//     q [ 0     0     I_q  0 ]
//       [ 0     0     0    0 ]
//
// with E12 of full column rank t and E21 of full row rank s. When s + t > 0,
// stage 2 uses the identity blocks hidden inside E12 / E21 to split off a
// strictly smaller pencil C11 + lambda*D11, and the loop repeats on it. The
// loop ends either with s = t = 0, where the eigenvalues are those of the
// square pencil E11 + lambda*I, or with r = s or r = t, where none exist.

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rankred/matrix_core.hpp"

namespace rankred {

struct PencilStage {
  Matrix a_form;  // left * A * right
  Matrix b_form;  // left * B * right == [I_r 0; 0 0]
  Matrix left;
  Matrix right;
  Index r = 0;
  Index s = 0;
  Index t = 0;
  Index q = 0;

  [[nodiscard]] Matrix e11() const { return a_form.topLeftCorner(r, r); }
  [[nodiscard]] Matrix e12() const { return a_form.block(0, r, r, t); }
  [[nodiscard]] Matrix e21() const { return a_form.block(r, 0, s, r); }
};

/// Result of the second-stage split. `left`/`right` act on the stage-1
/// forms: left * stage.a_form * right == a_form, likewise for B.
struct StageSplit {
  Matrix c11;
  Matrix d11;
  Matrix a_form;
  Matrix b_form;
  Matrix left;
  Matrix right;
};

struct PencilEigenvalue {
  Complex value;
  Index multiplicity = 0;
};

struct PencilSpectrum {
  std::vector<PencilEigenvalue> eigenvalues;
  Index r = 0;  // rank(B) at the first stage
  Index q = 0;  // identity block size at the first stage
  // rank(A + lambda*B) away from the spectrum, accumulated over all stages.
  // Equals r + q unless E12/E21 couple at some stage.
  Index generic_rank = 0;
  Index stages = 0;
  bool empty = true;
  std::vector<std::string> warnings;
};

namespace detail {

inline Matrix block_diag(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

inline Matrix block_diag(const Matrix& a, const Matrix& b, const Matrix& c) {
  return block_diag(block_diag(a, b), c);
}

inline std::vector<Index> concat_ranges(std::initializer_list<std::pair<Index, Index>> ranges) {
  std::vector<Index> order;
  for (const auto& [begin, end] : ranges) {
    for (Index i = begin; i < end; ++i) {
      order.push_back(i);
    }
  }
  return order;
}

inline double pencil_scale(const Matrix& a, const Matrix& b) {
  if (a.size() == 0) return 0.0;
  return std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
}

inline double eig_radius(const Complex& z, const Tolerance& tol) {
  return tol.eig_tol * (1.0 + std::abs(z));
}

}  // namespace detail

inline PencilStage tw_stage1(const Matrix& a, const Matrix& b, const Tolerance& tol = {}) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("tw_stage1: A and B must have the same shape");
  }
  const Index m = a.rows();
  const Index n = a.cols();
  const double ref = detail::pencil_scale(a, b);

  const RankNormalForm nb = rank_normal_form(b, tol, ref);
  const Index r = nb.rank;
  Matrix left = nb.left;
  Matrix right = nb.right;
  Matrix work = left * a * right;

  const RankNormalForm n22 = rank_normal_form(work.bottomRightCorner(m - r, n - r), tol, ref);
  const Index q = n22.rank;
  {
    const Matrix l2 = detail::block_diag(Matrix::Identity(r, r), n22.left);
    const Matrix r2 = detail::block_diag(Matrix::Identity(r, r), n22.right);
    left = l2 * left;
    right = right * r2;
    work = l2 * work * r2;
  }

  // Clear the q-columns of the top rows with the I_q rows, then the q-rows of
  // the first r columns with the I_q columns. B vanishes on both, so it keeps
  // its [I_r 0; 0 0] shape.
  {
    Matrix le = Matrix::Identity(m, m);
    le.block(0, r, r, q) = -work.block(0, r, r, q);
    work = le * work;
    left = le * left;
    Matrix re = Matrix::Identity(n, n);
    re.block(r, 0, q, r) = -work.block(r, 0, q, r);
    work = work * re;
    right = right * re;
  }

  const Index rest_cols = n - r - q;
  const Index rest_rows = m - r - q;
  const EchelonResult ce = column_echelon_with_transforms(work.block(0, r + q, r, rest_cols), tol, ref);
  const EchelonResult re = row_echelon_with_transforms(work.block(r + q, 0, rest_rows, r), tol, ref);
  const Index t = ce.pivot_count;
  const Index s = re.pivot_count;
  {
    const Matrix l3 = detail::block_diag(Matrix::Identity(r + q, r + q), re.left);
    const Matrix r3 = detail::block_diag(Matrix::Identity(r + q, r + q), ce.right);
    left = l3 * left;
    right = right * r3;
    work = l3 * work * r3;
  }

  const Matrix prow = row_permutation(
      detail::concat_ranges({{0, r}, {r + q, r + q + s}, {r, r + q}, {r + q + s, m}}));
  const Matrix pcol = row_permutation(
                          detail::concat_ranges({{0, r}, {r + q, r + q + t}, {r, r + q}, {r + q + t, n}}))
                          .transpose();
  left = prow * left;
  right = right * pcol;
  work = prow * work * pcol;

  PencilStage st;
  st.r = r;
  st.s = s;
  st.t = t;
  st.q = q;
  st.left = std::move(left);
  st.right = std::move(right);
  st.a_form = Matrix::Zero(m, n);
  st.a_form.topLeftCorner(r, r) = work.topLeftCorner(r, r);
  st.a_form.block(0, r, r, t) = work.block(0, r, r, t);
  st.a_form.block(r, 0, s, r) = work.block(r, 0, s, r);
  st.a_form.block(r + s, r + t, q, q).setIdentity();
  st.b_form = Matrix::Zero(m, n);
  st.b_form.topLeftCorner(r, r).setIdentity();
  return st;
}

inline StageSplit tw_stage2(const PencilStage& st, const Tolerance& tol = {}) {
  if (st.s + st.t == 0) {
    throw std::invalid_argument("tw_stage2: requires s + t > 0; use the terminal eigenproblem");
  }
  const Index m = st.a_form.rows();
  const Index n = st.a_form.cols();
  const Index r = st.r;
  const Index s = st.s;
  const Index t = st.t;

  // E12 (r x t, rank t) -> [0; I_t] by row ops on the top block and column
  // ops inside the t-block.
  const double ref = detail::pencil_scale(st.a_form, st.b_form);
  const RankNormalForm n12 = rank_normal_form(st.e12(), tol, ref);
  // E21 (s x r, rank s) -> [0 I_s] by row ops inside the s-block and column
  // ops on the first r columns.
  const RankNormalForm n21 = rank_normal_form(st.e21(), tol, ref);
  if (n12.rank != t || n21.rank != s) {
    throw NumericError("tw_stage2: echelon blocks lost rank; pencil is too ill-conditioned");
  }
  const Matrix rows_to_bottom = row_permutation(detail::concat_ranges({{t, r}, {0, t}}));
  const Matrix cols_to_right =
      row_permutation(detail::concat_ranges({{s, r}, {0, s}})).transpose();

  Matrix left = detail::block_diag(rows_to_bottom * n12.left, n21.left,
                                   Matrix::Identity(m - r - s, m - r - s));
  Matrix right = detail::block_diag(n21.right * cols_to_right, n12.right,
                                    Matrix::Identity(n - r - t, n - r - t));
  Matrix a2 = left * st.a_form * right;

  // The I_s rows clear the last s columns of the top block; the I_t columns
  // clear the last t rows of what remains. B is zero on both.
  Matrix le = Matrix::Identity(m, m);
  le.block(0, r, r, s) = -a2.block(0, r - s, r, s);
  a2 = le * a2;
  Matrix re = Matrix::Identity(n, n);
  re.block(r, 0, t, r - s) = -a2.block(r - t, 0, t, r - s);
  a2 = a2 * re;

  left = le * left;
  right = right * re;
  Matrix b2 = left * st.b_form * right;

  StageSplit out;
  out.c11 = a2.topLeftCorner(r - t, r - s);
  out.d11 = b2.topLeftCorner(r - t, r - s);
  out.a_form = std::move(a2);
  out.b_form = std::move(b2);
  out.left = std::move(left);
  out.right = std::move(right);
  return out;
}

namespace detail {

struct Cluster {
  std::vector<Complex> members;
  [[nodiscard]] Complex mean() const {
    Complex sum{0.0, 0.0};
    for (const auto& z : members) sum += z;
    return sum / static_cast<double>(members.size());
  }
};

// Real candidates chain along the line; complex ones (upper half-plane only)
// cluster by distance to the running mean. Lower half-plane values are
// recovered by conjugation so pairs stay symmetric.
inline std::pair<std::vector<Cluster>, std::vector<Cluster>> cluster_eigenvalues(
    const std::vector<Complex>& values, const Tolerance& tol) {
  std::vector<double> reals;
  std::vector<Complex> uppers;
  for (const auto& z : values) {
    const double radius = eig_radius(z, tol);
    if (std::abs(z.imag()) <= radius) {
      reals.push_back(z.real());
    } else if (z.imag() > 0) {
      uppers.push_back(z);
    }
  }
  std::sort(reals.begin(), reals.end());
  std::vector<Cluster> real_clusters;
  for (double x : reals) {
    if (!real_clusters.empty() &&
        x - real_clusters.back().members.back().real() <= eig_radius(Complex{x, 0.0}, tol)) {
      real_clusters.back().members.emplace_back(x, 0.0);
    } else {
      real_clusters.push_back(Cluster{{Complex{x, 0.0}}});
    }
  }
  std::vector<Cluster> upper_clusters;
  for (const auto& z : uppers) {
    bool placed = false;
    for (auto& c : upper_clusters) {
      if (std::abs(c.mean() - z) <= eig_radius(z, tol)) {
        c.members.push_back(z);
        placed = true;
        break;
      }
    }
    if (!placed) {
      upper_clusters.push_back(Cluster{{z}});
    }
  }
  return {std::move(real_clusters), std::move(upper_clusters)};
}

inline Index nullity_shifted(const Matrix& e11, const Complex& lambda, const Tolerance& tol) {
  const Index n = e11.rows();
  CMatrix shifted = e11.cast<Complex>();
  shifted.diagonal().array() += lambda;
  // The terminal pencil is E11 + lambda*I, whose B-part has norm sqrt(n).
  const double ref =
      std::max(e11.norm(), std::max(1.0, std::abs(lambda)) * std::sqrt(static_cast<double>(n)));
  return n - rank(shifted, tol, ref);
}

inline Index pencil_rank(const Matrix& a, const Matrix& b, const Complex& lambda,
                         const Tolerance& tol) {
  const double ref = std::max(a.norm(), std::abs(lambda) * b.norm());
  if (lambda.imag() == 0.0) {
    return rank(Matrix(a + lambda.real() * b), tol, ref);
  }
  return rank(CMatrix(a.cast<Complex>() + lambda * b.cast<Complex>()), tol, ref);
}

}  // namespace detail

/// Direct numerical rank of A + lambda*B (complex lambda allowed).
inline Index direct_pencil_rank(const Matrix& a, const Matrix& b, const Complex& lambda,
                                const Tolerance& tol = {}) {
  return detail::pencil_rank(a, b, lambda, tol);
}

inline PencilSpectrum twcf_spectrum(const Matrix& a, const Matrix& b, const Tolerance& tol = {}) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("twcf_spectrum: A and B must have the same shape");
  }
  PencilSpectrum spec;
  Matrix cur_a = a;
  Matrix cur_b = b;
  Matrix terminal_e11;
  bool terminal = false;
  const Index max_stages = std::min(a.rows(), a.cols()) + 1;

  while (true) {
    if (spec.stages > max_stages) {
      throw NumericError("twcf_spectrum: stage loop failed to terminate");
    }
    const PencilStage st = tw_stage1(cur_a, cur_b, tol);
    if (spec.stages == 0) {
      spec.r = st.r;
      spec.q = st.q;
    }
    ++spec.stages;
    if (st.r == st.s || st.r == st.t) {
      spec.generic_rank += st.q + st.s + st.t;
      break;
    }
    if (st.s + st.t == 0) {
      spec.generic_rank += st.q + st.r;
      terminal_e11 = st.e11();
      terminal = true;
      break;
    }
    spec.generic_rank += st.q + st.s + st.t;
    StageSplit split = tw_stage2(st, tol);
    cur_a = std::move(split.c11);
    cur_b = std::move(split.d11);
  }

  if (terminal) {
    const auto values = eigenvalues(terminal_e11);
    auto [real_clusters, upper_clusters] = detail::cluster_eigenvalues(values, tol);

    auto multiplicity = [&](const detail::Cluster& c, const Complex& mean) {
      Index mult = detail::nullity_shifted(terminal_e11, mean, tol);
      if (mult == 0) {
        for (const auto& z : c.members) {
          mult = std::max(mult, detail::nullity_shifted(terminal_e11, z, tol));
        }
      }
      return std::clamp<Index>(mult, 1, static_cast<Index>(c.members.size()));
    };
    auto certify = [&](const Complex& value) {
      if (detail::pencil_rank(a, b, value, tol) < spec.generic_rank) {
        return true;
      }
      std::ostringstream msg;
      msg << "dropped uncertified eigenvalue " << value.real() << (value.imag() < 0 ? "-" : "+")
          << std::abs(value.imag()) << "i: no rank drop below " << spec.generic_rank;
      spec.warnings.push_back(msg.str());
      return false;
    };

    for (const auto& c : real_clusters) {
      const Complex mean{c.mean().real(), 0.0};
      if (certify(mean)) {
        spec.eigenvalues.push_back({mean, multiplicity(c, mean)});
      }
    }
    for (const auto& c : upper_clusters) {
      const Complex mean = c.mean();
      if (certify(mean)) {
        const Index mult = multiplicity(c, mean);
        spec.eigenvalues.push_back({mean, mult});
        spec.eigenvalues.push_back({std::conj(mean), mult});
      }
    }
    std::sort(spec.eigenvalues.begin(), spec.eigenvalues.end(),
              [](const PencilEigenvalue& x, const PencilEigenvalue& y) {
                if (x.value.real() != y.value.real()) return x.value.real() < y.value.real();
                return x.value.imag() < y.value.imag();
              });
  }
  spec.empty = spec.eigenvalues.empty();
  return spec;
}

/// m(lambda): multiplicity of the spectrum entry within eig_tol of lambda, else 0.
inline Index multiplicity_at(const PencilSpectrum& spec, const Complex& lambda,
                             const Tolerance& tol = {}) {
  for (const auto& e : spec.eigenvalues) {
    if (std::abs(e.value - lambda) <= detail::eig_radius(lambda, tol)) {
      return e.multiplicity;
    }
  }
  return 0;
}

/// Rank of A + lambda*B predicted from the spectrum: generic rank minus m(lambda).
inline Index rank_at(const PencilSpectrum& spec, const Complex& lambda, const Tolerance& tol = {}) {
  return spec.generic_rank - multiplicity_at(spec, lambda, tol);
}

struct RealEigenvalue {
  double value = 0.0;
  Index multiplicity = 0;
};

/// Real, strictly positive part of the spectrum, ascending.
inline std::vector<RealEigenvalue> positive_real_spectrum(const PencilSpectrum& spec,
                                                          const Tolerance& tol = {}) {
  std::vector<RealEigenvalue> out;
  for (const auto& e : spec.eigenvalues) {
    if (std::abs(e.value.imag()) <= detail::eig_radius(e.value, tol) &&
        e.value.real() > tol.eig_tol) {
      out.push_back({e.value.real(), e.multiplicity});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const RealEigenvalue& x, const RealEigenvalue& y) { return x.value < y.value; });
  return out;
}

}  // namespace rankred
