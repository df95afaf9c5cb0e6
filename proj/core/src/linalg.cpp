// Copyright 2026 The sebeu Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sebeu/linalg.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "sebeu/error.hpp"

namespace sebeu {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse: return "ParseError";
    case ErrorKind::kDimension: return "DimensionMismatch";
    case ErrorKind::kDefiniteness: return "DefinitenessViolation";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kBudgetExceeded: return "BudgetExceeded";
    case ErrorKind::kStructure: return "StructureViolation";
    case ErrorKind::kSingularEquilibrium: return "SingularEquilibrium";
    case ErrorKind::kNoConvergence: return "NoConvergence";
    case ErrorKind::kInstabilityDetected: return "InstabilityDetected";
    case ErrorKind::kFilterRiccatiDiverged: return "FilterRiccatiDiverged";
    case ErrorKind::kClosedLoopUnstable: return "ClosedLoopUnstable";
    case ErrorKind::kSteadyStateInfeasible: return "SteadyStateInfeasible";
  }
  return "Unknown";
}

bool IsSolverFailure(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSingularEquilibrium:
    case ErrorKind::kNoConvergence:
    case ErrorKind::kInstabilityDetected:
    case ErrorKind::kFilterRiccatiDiverged:
    case ErrorKind::kClosedLoopUnstable:
    case ErrorKind::kSteadyStateInfeasible:
    case ErrorKind::kDefiniteness:
    case ErrorKind::kBudgetExceeded:
      return true;
    default:
      return false;
  }
}

namespace linalg {

double MinEigenvalue(const Mat& m) {
  if (m.size() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()),
                                        Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool IsSymmetric(const Mat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

double SpectralRadius(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Mat> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

std::complex<double> DominantEigenvalue(const Mat& m) {
  if (m.size() == 0) return {0.0, 0.0};
  Eigen::EigenSolver<Mat> es(m, false);
  Eigen::Index idx = 0;
  es.eigenvalues().cwiseAbs().maxCoeff(&idx);
  return es.eigenvalues()(idx);
}

Mat SpdSolve(const Mat& s, const Mat& rhs, std::string_view what) {
  if (s.rows() == 0) return Mat::Zero(0, rhs.cols());
  Eigen::LLT<Mat> llt(0.5 * (s + s.transpose()));
  if (llt.info() != Eigen::Success) {
    const double min_eig = MinEigenvalue(s);
    std::ostringstream os;
    os << what << " is not positive definite (minimum eigenvalue " << min_eig
       << ")";
    throw Error(ErrorKind::kDefiniteness, os.str(), std::string(what),
                min_eig);
  }
  return llt.solve(rhs);
}

Mat PsdPseudoInverse(const Mat& s, double tol) {
  if (s.size() == 0) return s;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (s + s.transpose()));
  const Vec& ev = es.eigenvalues();
  const double cut = tol * std::max(1.0, ev.cwiseAbs().maxCoeff());
  Vec inv = Vec::Zero(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > cut) inv(i) = 1.0 / ev(i);
  }
  return es.eigenvectors() * inv.asDiagonal() *
         es.eigenvectors().transpose();
}

Mat PsdLowerFactor(const Mat& c) {
  const Eigen::Index n = c.rows();
  Mat l = Mat::Zero(n, n);
  if (n == 0) return l;
  const double scale = std::max(1.0, c.diagonal().cwiseAbs().maxCoeff());
  const double tol = 1e-14 * scale;
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = c(j, j) - l.row(j).head(j).squaredNorm();
    if (d <= tol) continue;
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      l(i, j) = (c(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / ljj;
    }
  }
  return l;
}

double ConditionNumber(const Mat& m) {
  if (m.size() == 0) return 1.0;
  Eigen::JacobiSVD<Mat> svd(m);
  const Vec& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / smin;
}

bool IsStabilizable(const Mat& a, const Mat& b, double tol) {
  const Eigen::Index n = a.rows();
  if (n == 0) return true;
  using CMat = Eigen::MatrixXcd;
  Eigen::EigenSolver<Mat> es(a, false);
  const double scale =
      std::max({1.0, a.cwiseAbs().maxCoeff(),
                b.size() ? b.cwiseAbs().maxCoeff() : 0.0});
  for (Eigen::Index k = 0; k < n; ++k) {
    const std::complex<double> lambda = es.eigenvalues()(k);
    if (std::abs(lambda) < 1.0) continue;
    CMat pbh(n, n + b.cols());
    pbh.leftCols(n) = a.cast<std::complex<double>>() -
                      lambda * CMat::Identity(n, n);
    pbh.rightCols(b.cols()) = b.cast<std::complex<double>>();
    Eigen::JacobiSVD<CMat> svd(pbh);
    const double smin = svd.singularValues()(n - 1);
    if (smin <= tol * scale) return false;
  }
  return true;
}

Mat SolveStein(const Mat& gamma, const Mat& rhs, const Mat& a) {
  const Eigen::Index r = gamma.rows();
  const Eigen::Index c = a.rows();
  if (r == 0 || c == 0) return Mat::Zero(r, c);
  // vec(gamma x a) = (a' kron gamma) vec(x)
  Mat kron(r * c, r * c);
  for (Eigen::Index i = 0; i < c; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) {
      kron.block(i * r, j * r, r, r) = a(j, i) * gamma;
    }
  }
  Mat system = Mat::Identity(r * c, r * c) - kron;
  Vec rhs_vec = Eigen::Map<const Vec>(rhs.data(), rhs.size());
  Vec x = system.partialPivLu().solve(rhs_vec);
  return Eigen::Map<Mat>(x.data(), r, c);
}

Mat SolveDiscreteLyapunov(const Mat& a, const Mat& q) {
  const Eigen::Index n = a.rows();
  if (n == 0) return q;
  // Doubling: p_{k+1} = p_k + a_k p_k a_k', a_{k+1} = a_k^2.
  Mat p = q;
  Mat ak = a;
  for (int it = 0; it < 200; ++it) {
    Mat next = p + ak * p * ak.transpose();
    const double change = (next - p).norm();
    p = next;
    ak = ak * ak;
    if (change <= 1e-16 * std::max(1.0, p.norm()) || ak.norm() < 1e-300)
      break;
  }
  p = Symmetrize(p);
  if (n <= 40) {
    // One Newton-type refinement on the residual through the Kronecker form.
    Mat resid = a * p * a.transpose() + q - p;
    Mat kron(n * n, n * n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        kron.block(i * n, j * n, n, n) = a(i, j) * a;
      }
    }
    Mat system = Mat::Identity(n * n, n * n) - kron;
    Vec rv = Eigen::Map<const Vec>(resid.data(), resid.size());
    Vec dv = system.partialPivLu().solve(rv);
    p += Eigen::Map<Mat>(dv.data(), n, n);
    p = Symmetrize(p);
  }
  return p;
}

Mat Symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

Mat BlockDiagonal(const std::vector<Mat>& blocks) {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  for (const auto& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  Mat out = Mat::Zero(rows, cols);
  Eigen::Index r = 0;
  Eigen::Index c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

}  // namespace linalg
}  // namespace sebeu
