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

#ifndef SEBEU_GAUSSIAN_FORMS_HPP_
#define SEBEU_GAUSSIAN_FORMS_HPP_

#include <vector>

#include "sebeu/linalg.hpp"
#include "sebeu/model.hpp"

namespace sebeu {

// offset + coeff * eps, with eps a vector of independent standard normals.
// Every quantity of a linear-Gaussian closed loop is exactly of this form.
struct Form {
  Vec offset;
  Mat coeff;

  static Form Zero(Eigen::Index dim, Eigen::Index width) {
    return {Vec::Zero(dim), Mat::Zero(dim, width)};
  }
  static Form Constant(const Vec& v, Eigen::Index width) {
    return {v, Mat::Zero(v.size(), width)};
  }
  Eigen::Index dim() const { return offset.size(); }
  Eigen::Index width() const { return coeff.cols(); }

  Form Rows(Eigen::Index start, Eigen::Index len) const {
    return {offset.segment(start, len), coeff.middleRows(start, len)};
  }
  Form& operator+=(const Form& o) {
    offset += o.offset;
    coeff += o.coeff;
    return *this;
  }
  Form& operator-=(const Form& o) {
    offset -= o.offset;
    coeff -= o.coeff;
    return *this;
  }
  Form& operator+=(const Vec& v) {
    offset += v;
    return *this;
  }
  // this += m * o without temporaries.
  void AddProduct(const Mat& m, const Form& o) {
    offset.noalias() += m * o.offset;
    coeff.noalias() += m * o.coeff;
  }
};

inline Form operator+(Form a, const Form& b) { return a += b; }
inline Form operator-(Form a, const Form& b) { return a -= b; }
inline Form operator*(const Mat& m, const Form& f) {
  return {m * f.offset, m * f.coeff};
}

Form Stack(const std::vector<Form>& parts);

inline Vec Mean(const Form& f) { return f.offset; }
inline Mat Cov(const Form& a, const Form& b) {
  return a.coeff * b.coeff.transpose();
}
inline Mat Cov(const Form& a) { return Cov(a, a); }

// E[a' P b].
double ExpectQuad(const Form& a, const Mat& p, const Form& b);
// E[|a|_P^2].
inline double ExpectQuad(const Form& a, const Mat& p) {
  return ExpectQuad(a, p, a);
}

// Column layout of the primitive vector. Blocks are laid out first and
// forms built afterwards, so every form has the final width.
class PrimitiveSpace {
 public:
  // Registers a Gaussian block; returns its id. The factor is a lower
  // triangular square root, so leading coordinates of the block depend only
  // on leading columns.
  int AddBlock(const GaussianLaw& law);
  Eigen::Index width() const { return width_; }
  // The block as a form of full width.
  Form BlockForm(int id) const;
  Eigen::Index BlockColumn(int id) const { return blocks_[id].column; }
  Eigen::Index BlockWidth(int id) const { return blocks_[id].factor.cols(); }
  // Draws the block from its standard-normal coordinates.
  Vec Sample(int id, const Vec& eps) const {
    return blocks_[id].mean + blocks_[id].factor * eps;
  }
  const Mat& Factor(int id) const { return blocks_[id].factor; }

 private:
  struct Block {
    Vec mean;
    Mat factor;
    Eigen::Index column;
  };
  std::vector<Block> blocks_;
  Eigen::Index width_ = 0;
};

}  // namespace sebeu

#endif  // SEBEU_GAUSSIAN_FORMS_HPP_
