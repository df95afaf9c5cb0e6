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

#include "sebeu/gaussian_forms.hpp"

#include "sebeu/error.hpp"

namespace sebeu {

Form Stack(const std::vector<Form>& parts) {
  Eigen::Index dim = 0;
  Eigen::Index width = parts.empty() ? 0 : parts.front().width();
  for (const auto& f : parts) dim += f.dim();
  Form out = Form::Zero(dim, width);
  Eigen::Index off = 0;
  for (const auto& f : parts) {
    out.offset.segment(off, f.dim()) = f.offset;
    out.coeff.middleRows(off, f.dim()) = f.coeff;
    off += f.dim();
  }
  return out;
}

double ExpectQuad(const Form& a, const Mat& p, const Form& b) {
  const double mean_part = a.offset.dot(p * b.offset);
  // trace(P cov(b, a)) = sum((P Mb) .* Ma)
  const double cov_part = (p * b.coeff).cwiseProduct(a.coeff).sum();
  return mean_part + cov_part;
}

int PrimitiveSpace::AddBlock(const GaussianLaw& law) {
  if (law.cov.rows() != law.mean.size()) {
    throw Error(ErrorKind::kDimension, "Gaussian block has inconsistent size");
  }
  Block b;
  b.mean = law.mean;
  b.factor = linalg::PsdLowerFactor(law.cov);
  b.column = width_;
  width_ += b.factor.cols();
  blocks_.push_back(std::move(b));
  return static_cast<int>(blocks_.size()) - 1;
}

Form PrimitiveSpace::BlockForm(int id) const {
  const Block& b = blocks_[id];
  Form f = Form::Zero(b.mean.size(), width_);
  f.offset = b.mean;
  f.coeff.middleCols(b.column, b.factor.cols()) = b.factor;
  return f;
}

}  // namespace sebeu
