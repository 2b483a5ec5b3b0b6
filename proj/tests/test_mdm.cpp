#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "mdm/mdm.hpp"

using namespace mdm;

namespace {

const std::vector<int> kWorked = {5, 5, 5, 4, 4, 3, 5, 4, 4};

double fd_error(const std::vector<int>& items, MdmParams<double> p) {
  const ForwardPass<double> f = forward<double>(items, p);
  MdmParams<double> grad = MdmParams<double>::zeros(p.hyper);
  backward(f, p, 1.0, grad);
  const std::function<double(const VectorXd&)> phi = [&](const VectorXd& flat) {
    MdmParams<double> q = p;
    unflatten(flat, q);
    return score<double>(items, q);
  };
  return finite_diff_check(phi, flatten(p), flatten(grad));
}

}  // namespace

TEST_CASE("scalar model: every stage matches the hand recurrence") {
  const auto p = fixtures::scalar_model();
  const std::vector<int> items = {2, 1, 2};
  const auto f = forward<double>(items, p);
  CHECK(f.z(0, 0) == doctest::Approx(0.011681425582507671).epsilon(1e-13));
  CHECK(f.z(2, 0) == doctest::Approx(0.045850970547337541).epsilon(1e-13));
  CHECK(f.vs(0, 0) == doctest::Approx(0.048936298324787644).epsilon(1e-13));
  CHECK(f.vs(1, 0) == doctest::Approx(0.17340090872711217).epsilon(1e-13));
  CHECK(f.order.weights(0) == doctest::Approx(0.5139839973527589).epsilon(1e-13));
  CHECK(f.v(0) == doctest::Approx(0.10942809074357164).epsilon(1e-13));
  CHECK(f.g(0) == doctest::Approx(0.27659966352050014).epsilon(1e-13));
  CHECK(f.phi == doctest::Approx(0.11580832627922151).epsilon(1e-13));
}

TEST_CASE("scalar model: ablated variants and occurrence sums") {
  const std::vector<int> items = {2, 1, 2};
  CHECK(score<double>(items, fixtures::scalar_model(Components::kRepresentation)) ==
        doctest::Approx(0.027339821947695919).epsilon(1e-13));
  CHECK(score<double>(items, fixtures::scalar_model(Components::kLongTerm)) ==
        doctest::Approx(0.013755291164201261).epsilon(1e-13));
  CHECK(score<double>(items, fixtures::scalar_model(Components::kIndividual)) ==
        doctest::Approx(0.032828427223071492).epsilon(1e-13));
  auto bag = fixtures::scalar_model();
  bag.hyper.relation_sum = RelationSum::kOccurrence;
  CHECK(score<double>(items, bag) == doctest::Approx(-0.038602775426407214).epsilon(1e-13));
}

TEST_CASE("worked example shapes") {
  MdmHyper h;
  h.dim = 32;
  h.window = 3;
  const auto p = init_params<double>(h, 3);
  const auto f = forward<double>(kWorked, p);
  CHECK(f.e.rows() == 9);
  CHECK(f.e.cols() == 32);
  CHECK(f.window.rows.rows() == 3);
  CHECK(f.window.rows.cols() == 32);
  CHECK(f.window.source == std::vector<Eigen::Index>{8, 7, 6});
  CHECK(f.v.size() == 32);
  CHECK(f.g.size() == 32);
  CHECK(extract_features<double>(kWorked, p, FeatureMode::kConcatAll).size() == 288);
  CHECK(extract_features<double>(kWorked, p, FeatureMode::kSum).size() == 96);
  CHECK(feature_dim(h, FeatureMode::kConcatAll) == 288);
}

TEST_CASE("recent window layouts") {
  MatrixXd z(4, 2);
  z << 1, 1, 2, 2, 3, 3, 4, 4;
  const auto w = recent_window<double>(z, 3);
  CHECK(w.active == 3);
  CHECK(w.rows(0, 0) == 4);
  CHECK(w.rows(2, 0) == 2);

  const auto skip = recent_window<double>(z, 3, WindowMode::kSkipLatest);
  CHECK(skip.rows(0, 0) == 3);
  CHECK(skip.rows(2, 0) == 1);

  const auto pad = recent_window<double>(z, 6);
  CHECK(pad.active == 4);
  CHECK(pad.rows.rows() == 6);
  CHECK(pad.rows.bottomRows(2).isZero());

  CHECK_THROWS_AS(recent_window<double>(z, 0), std::invalid_argument);
}

TEST_CASE("short sequences are padded and masked") {
  MdmHyper h;
  h.dim = 4;
  h.window = 6;
  h.depth_r = 2;
  h.depth_e = 2;
  const auto p = init_params<double>(h, 5);
  const auto f = forward<double>(std::vector<int>{3, 1}, p);
  CHECK(f.window.active == 2);
  for (const auto& layer : f.layers) {
    CHECK(layer.weights.tail(4).isZero());
    CHECK(layer.weights.sum() == doctest::Approx(1.0));
  }

  auto eq5 = p;
  eq5.hyper.window_mode = WindowMode::kSkipLatest;
  CHECK_NOTHROW(forward<double>(std::vector<int>{3, 1}, eq5));
  CHECK_THROWS_AS(forward<double>(std::vector<int>{3}, eq5), std::invalid_argument);
}

TEST_CASE("early events reach z_T but not the window shape") {
  MdmHyper h;
  h.dim = 4;
  h.window = 2;
  const auto p = init_params<double>(h, 8, 0.5);
  const auto a = forward<double>(std::vector<int>{1, 2, 3, 4, 5}, p);
  const auto b = forward<double>(std::vector<int>{7, 2, 3, 4, 5}, p);
  CHECK((a.z.row(4) - b.z.row(4)).norm() > 0);
  CHECK(a.window.active == b.window.active);
  CHECK(a.window.rows.rows() == b.window.rows.rows());
}

TEST_CASE("residual stack keeps every layer") {
  ResNetParams<double> p = ResNetParams<double>::zeros(3, 2);
  for (auto& layer : p.layers) layer.w.setIdentity();
  MatrixXd x(2, 2);
  x << 1, -1, 0.5, 2;
  const auto stack = resnet_forward<double>(x, p);
  REQUIRE(stack.size() == 4);
  // Identity weights: each layer is ReLU(X + X).
  CHECK(stack[1](0, 0) == 2.0);
  CHECK(stack[1](0, 1) == 0.0);
  CHECK(stack[3](1, 1) == 16.0);
  CHECK(resnet_forward<double>(x, p, 1).size() == 2);
  CHECK_THROWS_AS(resnet_forward<double>(x, p, 4), std::invalid_argument);
  CHECK(resnet_e_forward<double>(VectorXd::Constant(2, 1.0), p)(0) == 8.0);
}

TEST_CASE("attention is shift invariant in its scores") {
  AttentionNet<double> net{MatrixXd::Random(3, 1), MatrixXd::Random(3, 2), MatrixXd::Random(3, 1),
                           MatrixXd::Zero(1, 1)};
  const MatrixXd rows = MatrixXd::Random(4, 2);
  const auto a = attend<double>(rows, 4, net);
  net.b_out(0, 0) = 17.0;
  const auto b = attend<double>(rows, 4, net);
  CHECK((a.weights - b.weights).norm() < 1e-12);
  CHECK(a.weights.sum() == doctest::Approx(1.0));
  CHECK_THROWS_AS(attend<double>(rows, 0, net), std::invalid_argument);
  CHECK_THROWS_AS(attend<double>(rows, 5, net), std::invalid_argument);
}

TEST_CASE("fuse is exact addition") {
  const VectorXd v = VectorXd::Random(5), g = VectorXd::Random(5);
  CHECK((fuse(v, g) - (v + g)).norm() == 0.0);
  CHECK_THROWS_AS(fuse<double>(v, VectorXd::Random(4)), std::invalid_argument);
}

TEST_CASE("zero parameters score zero") {
  MdmHyper h;
  h.dim = 4;
  CHECK(score<double>(kWorked, MdmParams<double>::zeros(h)) == 0.0);
}

TEST_CASE("single relation sequences use only that embedding") {
  MdmHyper h;
  h.dim = 4;
  auto p = init_params<double>(h, 2);
  const std::vector<int> items = {4, 4, 4};
  const auto f = forward<double>(items, p);
  CHECK(f.phi == doctest::Approx(f.fused.dot(p.relations.of(4))));
}

TEST_CASE("score gradients match finite differences for every variant") {
  for (auto c : {Components::kRepresentation, Components::kLongTerm, Components::kIndividual,
                 Components::kFull}) {
    MdmHyper h;
    h.dim = 3;
    h.window = 3;
    h.depth_r = 2;
    h.depth_e = 2;
    h.components = c;
    auto p = init_params<double>(h, 21, 0.6);
    // Nonzero biases so ReLU kinks sit away from zero.
    for_each_tensor(p, [](const std::string& name, TensorGroup, MatrixXd& m) {
      if (name.ends_with(".b")) m.setConstant(0.05);
    });
    CHECK(fd_error({1, 3, 3, 7, 2}, p) < 1e-6);
    CHECK(fd_error({6, 6}, p) < 1e-6);
    p.hyper.relation_sum = RelationSum::kOccurrence;
    CHECK(fd_error({2, 5, 2, 2}, p) < 1e-6);
    p.hyper.window_mode = WindowMode::kSkipLatest;
    CHECK(fd_error({2, 5, 2, 2, 1}, p) < 1e-6);
  }
}

TEST_CASE("features are deterministic and laid out in blocks") {
  MdmHyper h;
  h.dim = 8;
  const auto p = init_params<double>(h, 4);
  const VectorXd a = extract_features<double>(kWorked, p);
  CHECK(a == extract_features<double>(kWorked, p));
  CHECK(a.size() == 24);
  const auto f = forward<double>(kWorked, p);
  CHECK(a.head(8) == f.v);
  CHECK(a.segment(8, 8) == f.g);
  CHECK(a.tail(8) == f.relation_sum);

  const VectorXd all = extract_features<double>(kWorked, p, FeatureMode::kConcatAll);
  CHECK(all.segment(16 + 8 * 6, 8) == p.relations.of(7));

  auto ablated = p;
  ablated.hyper.components = Components::kLongTerm;
  CHECK(extract_features<double>(kWorked, ablated).size() == 16);
  CHECK(feature_dim(ablated.hyper, FeatureMode::kSum) == 16);
}
