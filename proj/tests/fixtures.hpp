#pragma once

#include "mdm/params.hpp"

#include <initializer_list>

namespace fixtures {

inline mdm::MatrixXd col(std::initializer_list<double> values) {
  mdm::MatrixXd m(static_cast<Eigen::Index>(values.size()), 1);
  Eigen::Index i = 0;
  for (double v : values) m(i++, 0) = v;
  return m;
}

inline mdm::MatrixXd scalar(double v) { return mdm::MatrixXd::Constant(1, 1, v); }

// d = 1, M = 2, n = 2, k = 1, L = 1, hand-picked weights.
inline mdm::MdmParams<double> scalar_model(mdm::Components c = mdm::Components::kFull) {
  mdm::MdmHyper h;
  h.relations = 2;
  h.dim = 1;
  h.window = 2;
  h.depth_r = 1;
  h.depth_e = 1;
  h.components = c;
  auto p = mdm::MdmParams<double>::zeros(h);
  p.encoder.table = col({0.0, 0.5, -0.3});
  p.encoder.wx = col({0.2, -0.4, 0.7});
  p.encoder.wh = col({0.1, 0.3, -0.5});
  p.encoder.b = col({0.05, -0.1, 0.2});
  p.lstm.wx = col({0.3, -0.2, 0.4, 0.6});
  p.lstm.wh = col({-0.1, 0.2, 0.3, -0.4});
  p.lstm.b = col({0.1, 0.2, -0.1, 0.05});
  p.resnet_r.layers[0] = {scalar(0.5), scalar(0.1)};
  p.attention.layer = {scalar(0.8), scalar(-0.6), scalar(0.2), scalar(0.1)};
  p.attention.order = {scalar(-0.5), scalar(0.9), scalar(-0.1), scalar(0.3)};
  p.resnet_e.layers[0] = {scalar(-0.3), scalar(0.2)};
  p.relations.rows = col({0.7, -0.4});
  return p;
}

}  // namespace fixtures
