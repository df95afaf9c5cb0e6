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

#ifndef SEBEU_LINALG_HPP_
#define SEBEU_LINALG_HPP_

#include <complex>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace sebeu {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

namespace linalg {

// Smallest eigenvalue of the symmetric part of `m`. Empty matrices report
// +infinity so that "min eigenvalue > 0" checks pass vacuously.
double MinEigenvalue(const Mat& m);

bool IsSymmetric(const Mat& m, double tol = 1e-12);

// Largest eigenvalue modulus; 0 for empty matrices.
double SpectralRadius(const Mat& m);

// Eigenvalue of largest modulus.
std::complex<double> DominantEigenvalue(const Mat& m);

// Solves s * x = rhs for symmetric positive definite s by Cholesky.
// Throws Error(kDefiniteness) naming `what` and the minimum eigenvalue when
// s is not positive definite.
Mat SpdSolve(const Mat& s, const Mat& rhs, std::string_view what);

// Moore-Penrose inverse of a symmetric positive semidefinite matrix;
// eigenvalues below tol * max(1, largest) are treated as zero.
Mat PsdPseudoInverse(const Mat& s, double tol = 1e-13);

// Lower-triangular l with l * l' == c for symmetric PSD c, computed by an
// unpivoted Cholesky that zeroes a column whenever its pivot is numerically
// zero. The row ordering of c is preserved, so the leading k rows of l only
// involve the leading k columns.
Mat PsdLowerFactor(const Mat& c);

// 2-norm condition number via SVD; +infinity for singular matrices.
double ConditionNumber(const Mat& m);

// PBH test: (a, b) is stabilizable iff [a - lambda I, b] has full row rank
// for every eigenvalue lambda with |lambda| >= 1. The rank decision uses the
// smallest singular value against `tol` (scaled by the matrix norm).
bool IsStabilizable(const Mat& a, const Mat& b, double tol = 1e-9);

// Solves x = rhs + gamma * x * a for x (a discrete Stein equation) through
// the Kronecker form (I - a' (x) gamma) vec(x) = vec(rhs).
Mat SolveStein(const Mat& gamma, const Mat& rhs, const Mat& a);

// Solves p = a p a' + q for stable a by the doubling iteration, refined
// with a Kronecker solve when the state is small.
Mat SolveDiscreteLyapunov(const Mat& a, const Mat& q);

Mat Symmetrize(const Mat& m);

// Dense block-diagonal assembly.
Mat BlockDiagonal(const std::vector<Mat>& blocks);

}  // namespace linalg
}  // namespace sebeu

#endif  // SEBEU_LINALG_HPP_
