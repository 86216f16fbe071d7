#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "grid.hpp"

namespace whlab::linalg {

// y = A x and y = A* x on flat complex vectors.
struct LinearMap {
  std::size_t rows = 0, cols = 0;
  std::function<void(const CVec&, CVec&)> apply;
  std::function<void(const CVec&, CVec&)> adjoint;
};

inline LinearMap dense_map(const Eigen::MatrixXcd& m) {
  LinearMap a;
  a.rows = static_cast<std::size_t>(m.rows());
  a.cols = static_cast<std::size_t>(m.cols());
  a.apply = [&m](const CVec& x, CVec& y) {
    Eigen::Map<const Eigen::VectorXcd> xv(x.data(), m.cols());
    y.resize(static_cast<std::size_t>(m.rows()));
    Eigen::Map<Eigen::VectorXcd>(y.data(), m.rows()) = m * xv;
  };
  a.adjoint = [&m](const CVec& x, CVec& y) {
    Eigen::Map<const Eigen::VectorXcd> xv(x.data(), m.rows());
    y.resize(static_cast<std::size_t>(m.cols()));
    Eigen::Map<Eigen::VectorXcd>(y.data(), m.cols()) = m.adjoint() * xv;
  };
  return a;
}

struct LanczosOptions {
  std::size_t max_steps = 400;
  double tol = 1e-11;  // relative change of the top Ritz value
  std::size_t patience = 5;
  std::uint64_t seed = 12345;
};

struct LanczosResult {
  double sigma_max = 0.0;
  std::size_t steps = 0;
  bool converged = false;
};

// Largest singular value through Lanczos on A*A with full reorthogonalization.
inline LanczosResult largest_singular_value(const LinearMap& a, const LanczosOptions& opt = {}) {
  LanczosResult res;
  const std::size_t n = a.cols;
  if (n == 0 || a.rows == 0) return res;
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> nd;
  std::vector<CVec> q;
  CVec v(n);
  for (auto& c : v) c = cplx(nd(rng), nd(rng));
  auto norm = [](const CVec& x) {
    double s = 0.0;
    for (auto& c : x) s += std::norm(c);
    return std::sqrt(s);
  };
  auto dot = [](const CVec& x, const CVec& y) {  // <x, y> conjugate-linear in x
    cplx s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += std::conj(x[i]) * y[i];
    return s;
  };
  double nv = norm(v);
  for (auto& c : v) c /= nv;
  q.push_back(v);
  std::vector<double> alpha, beta;
  CVec t1, w;
  double prev = 0.0;
  std::size_t stable = 0;
  const std::size_t steps = std::min(opt.max_steps, n);
  for (std::size_t j = 0; j < steps; ++j) {
    a.apply(q[j], t1);
    a.adjoint(t1, w);
    double aj = dot(q[j], w).real();
    alpha.push_back(aj);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& qi : q) {
        cplx c = dot(qi, w);
        for (std::size_t i = 0; i < n; ++i) w[i] -= c * qi[i];
      }
    double bj = norm(w);
    Eigen::VectorXd d = Eigen::Map<Eigen::VectorXd>(alpha.data(), static_cast<Eigen::Index>(alpha.size()));
    double theta = 0.0;
    if (alpha.size() == 1) {
      theta = alpha[0];
    } else {
      Eigen::VectorXd e = Eigen::Map<Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
      es.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
      theta = es.eigenvalues().maxCoeff();
    }
    res.steps = j + 1;
    res.sigma_max = std::sqrt(std::max(theta, 0.0));
    if (bj <= 1e-13 * std::max(theta, 1e-300)) {
      res.converged = true;
      break;
    }
    if (j > 0 && std::abs(theta - prev) <= opt.tol * std::abs(theta)) {
      if (++stable >= opt.patience) {
        res.converged = true;
        break;
      }
    } else {
      stable = 0;
    }
    prev = theta;
    beta.push_back(bj);
    for (auto& c : w) c /= bj;
    q.push_back(w);
  }
  if (res.steps == n) res.converged = true;
  return res;
}

struct TridiagonalMin {
  double eigenvalue = 0.0;
  Eigen::VectorXd vector;
};

// Smallest eigenpair of the real symmetric tridiagonal (diag, offdiag).
inline TridiagonalMin smallest_eigenpair(const Eigen::VectorXd& diag, const Eigen::VectorXd& off) {
  TridiagonalMin r;
  if (diag.size() == 1) {
    r.eigenvalue = diag(0);
    r.vector = Eigen::VectorXd::Ones(1);
    return r;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  r.eigenvalue = es.eigenvalues()(0);
  r.vector = es.eigenvectors().col(0);
  return r;
}

}  // namespace whlab::linalg
