#pragma once

// Internal growth-curve and quadrature helpers shared by the solver modules;
// not installed.

#include <Eigen/Eigenvalues>
#include <cmath>

#include "sylverse/matcore.hpp"

namespace sylverse::detail {

// Gauss-Legendre nodes and weights on [0,1] by Golub-Welsch: nodes are the
// Jacobi-matrix eigenvalues, weights the squared first eigenvector entries.
inline void gauss_legendre_01(int G, Eigen::VectorXd& nodes,
                              Eigen::VectorXd& weights) {
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(G, G);
  for (int k = 1; k < G; ++k) {
    double off = k / std::sqrt(4.0 * k * k - 1.0);
    T(k - 1, k) = off;
    T(k, k - 1) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  nodes = (es.eigenvalues().array() + 1.0) / 2.0;
  weights.resize(G);
  for (int i = 0; i < G; ++i) {
    double head = es.eigenvectors()(0, i);
    weights(i) = head * head;
  }
}

// max_{s in [0,t]} ||e^{sY}||: 65-point scan followed by golden-section
// refinement around the best sample. ||e^{sY}|| is smooth in s, so the
// bracket around the best grid point contains the maximum.
inline double max_exp_norm(const CMatrix& Y, double t) {
  if (!(t > 0.0)) return 1.0;
  auto g = [&](double s) { return spectral_norm(expm(s * Y, 1e-12)); };
  constexpr int kSamples = 65;
  double best = 1.0, sbest = 0.0;
  for (int i = 0; i < kSamples; ++i) {
    double s = t * i / (kSamples - 1);
    double v = g(s);
    if (v > best) {
      best = v;
      sbest = s;
    }
  }
  double lo = std::max(0.0, sbest - t / (kSamples - 1));
  double hi = std::min(t, sbest + t / (kSamples - 1));
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = g(x1), f2 = g(x2);
  for (int it = 0; it < 50 && hi - lo > 1e-12 * t; ++it) {
    if (f1 > f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = g(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = g(x2);
    }
  }
  return std::max(best, std::max(f1, f2));
}

// int_0^t ||e^{sY}|| ds by adaptive quadrature.
inline double integral_exp_norm(const CMatrix& Y, double t, double tol) {
  if (!(t > 0.0)) return 0.0;
  return quad_integrate_scalar(
      [&](double s) { return spectral_norm(expm(s * Y, 1e-12)); }, 0.0, t, tol);
}

}  // namespace sylverse::detail
