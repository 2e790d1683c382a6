#include "thinns/chebyshev_fit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace thinns {

std::optional<Eigen::VectorXd> solve_lp_min(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                                            const Eigen::VectorXd& b) {
  const Eigen::Index rows = A.rows(), n = A.cols();
  if (c.size() != n || b.size() != rows) throw std::invalid_argument("lp: dimension mismatch");
  if ((c.array() < 0.0).any()) throw std::invalid_argument("lp: objective must be nonnegative");

  // Dual: max -b^T y  s.t.  -A^T y <= c, y >= 0. Tableau columns: y (rows),
  // slacks (n), rhs.
  const Eigen::Index cols = rows + n + 1;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n + 1, cols);
  T.block(0, 0, n, rows) = -A.transpose();
  T.block(0, rows, n, n).setIdentity();
  T.block(0, cols - 1, n, 1) = c;
  T.block(n, 0, 1, rows) = b.transpose();
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) basis[j] = rows + j;

  const double scale = std::max({1.0, A.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff(), c.cwiseAbs().maxCoeff()});
  const double tol = 1e-12 * scale;
  const int max_pivots = 50 * static_cast<int>(rows + n) + 1000;
  for (int iter = 0;; ++iter) {
    if (iter > max_pivots) throw std::runtime_error("lp: pivot limit exceeded");
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < cols - 1; ++j)
      if (T(n, j) < -tol) {
        enter = j;
        break;
      }
    if (enter < 0) break;
    Eigen::Index leave = -1;
    double best = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (T(r, enter) <= tol) continue;
      const double ratio = T(r, cols - 1) / T(r, enter);
      if (leave < 0 || ratio < best - tol || (std::abs(ratio - best) <= tol && basis[r] < basis[leave])) {
        leave = r;
        best = ratio;
      }
    }
    if (leave < 0) return std::nullopt;  // dual unbounded: primal infeasible
    T.row(leave) /= T(leave, enter);
    for (Eigen::Index r = 0; r <= n; ++r)
      if (r != leave && T(r, enter) != 0.0) T.row(r) -= T(r, enter) * T.row(leave);
    basis[leave] = enter;
  }
  Eigen::VectorXd x = T.block(n, rows, 1, n).transpose();
  return x.cwiseMax(0.0);
}

InequalityFit fit_inequality(const Eigen::VectorXd& lhs, const Eigen::MatrixXd& terms,
                             const Eigen::VectorXd& signs, const Eigen::VectorXd& slack,
                             const GuardPreference& guard) {
  const Eigen::Index N = lhs.size(), m = terms.cols();
  if (N == 0) throw std::invalid_argument("fit: no samples");
  if (terms.rows() != N || signs.size() != m || slack.size() != N)
    throw std::invalid_argument("fit: dimension mismatch");

  Eigen::VectorXd colscale(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double s = terms.col(j).cwiseAbs().maxCoeff();
    colscale[j] = s > 0.0 ? s : 1.0;
  }
  const double sigma = std::max({lhs.cwiseAbs().maxCoeff(), slack.cwiseAbs().maxCoeff(), 1e-300});
  // Normalised signed terms: r'_i = lhs'_i - G_i kappa'.
  Eigen::MatrixXd G(N, m);
  for (Eigen::Index j = 0; j < m; ++j) G.col(j) = signs[j] * terms.col(j) / colscale[j];
  const Eigen::VectorXd l = lhs / sigma;
  const Eigen::VectorXd s = slack / sigma;

  auto unscale = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd kappa(m);
    for (Eigen::Index j = 0; j < m; ++j) kappa[j] = x[j] * sigma / colscale[j];
    return kappa;
  };

  Eigen::VectorXd cz = Eigen::VectorXd::Zero(m + 1);
  cz[m] = 1.0;

  // Stage A: min z  s.t.  r'_i - s'_i <= z.
  Eigen::MatrixXd A1(N, m + 1);
  A1 << -G, -Eigen::VectorXd::Ones(N);
  auto stageA = solve_lp_min(cz, A1, s - l);
  if (!stageA) throw std::runtime_error("fit: stage A infeasible");
  Eigen::VectorXd x = *stageA;

  if ((*stageA)[m] <= 1e-12) {
    // Stage B: min z  s.t.  r'_i <= s'_i,  r'_i <= z,  -r'_i <= z.
    Eigen::MatrixXd A2(3 * N, m + 1);
    Eigen::VectorXd b2(3 * N);
    A2.topRows(N) << -G, Eigen::VectorXd::Zero(N);
    b2.head(N) = s - l;
    A2.middleRows(N, N) << -G, -Eigen::VectorXd::Ones(N);
    b2.segment(N, N) = -l;
    A2.bottomRows(N) << G, -Eigen::VectorXd::Ones(N);
    b2.tail(N) = l;
    if (auto stageB = solve_lp_min(cz, A2, b2)) x = *stageB;

    const Eigen::Index a = guard.threshold, c = guard.coupling;
    if (a >= 0 && c >= 0) {
      // Stage C. Each dissipative term dominates the guarded one, so half of
      // its tight constant may move onto the threshold. With
      //   x_j = x_j^B / 2 + z_j  (other dissipative j),  x_a = cap - y,
      //   cap = kappa_a^B + sum_j kappa_j^B / 2  (normalised for column a),
      // minimise g_max x_c / colscale_c + y / colscale_a  s.t.  r'_i <= s'_i, y <= cap.
      const Eigen::VectorXd xb = x.head(m);
      Eigen::VectorXd floor = Eigen::VectorXd::Zero(m);
      double cap = xb[a];
      for (Eigen::Index j = 0; j < m; ++j)
        if (j != a && signs[j] < 0.0) {
          floor[j] = 0.5 * xb[j];
          cap += 0.5 * xb[j] / colscale[j] * colscale[a];
        }
      if (cap > 0.0) {
        Eigen::MatrixXd A3 = Eigen::MatrixXd::Zero(N + 1, m);
        Eigen::VectorXd b3(N + 1);
        A3.topRows(N) = -G;
        A3.col(a).head(N) = G.col(a);
        b3.head(N) = s - l + G.col(a) * cap + G * floor;
        A3(N, a) = 1.0;
        b3[N] = cap;
        Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
        w[c] = guard.g_max / colscale[c];
        w[a] = 1.0 / colscale[a];
        if (auto stageC = solve_lp_min(w, A3, b3)) {
          x.head(m) = floor + *stageC;
          x[a] = cap - (*stageC)[a];
        }
      }
    }
  }

  InequalityFit fit;
  fit.kappa = unscale(x.head(m));
  Eigen::VectorXd signed_kappa = fit.kappa.cwiseProduct(signs);
  fit.residuals = lhs - terms * signed_kappa;
  fit.max_residual = fit.residuals.maxCoeff();
  // Roundoff allowance at the slack boundary.
  fit.admissible = ((fit.residuals - slack).array() <= 1e-9 * sigma).all();
  return fit;
}

}  // namespace thinns
