#include <cmath>

#include "doctest.h"
#include "scnet/errors.hpp"
#include "scnet/ops.hpp"
#include "scnet/tensor.hpp"

using namespace scnet;

TEST_CASE("factory helpers produce the right shapes and fills") {
  auto z = Tensor::zeros({2, 3});
  CHECK(z->numel() == 6);
  for (double v : z->data) CHECK(v == 0.0);

  auto f = Tensor::full({4}, 2.5);
  for (double v : f->data) CHECK(v == 2.5);

  auto s = Tensor::scalar(-1.25);
  CHECK(s->rank() == 0);
  CHECK(s->numel() == 1);
  CHECK(s->value() == -1.25);

  auto d = Tensor::from_data({2, 2}, {1, 2, 3, 4});
  CHECK(d->data[3] == 4.0);
  CHECK_THROWS_AS(Tensor::from_data({2, 2}, {1, 2, 3}), ShapeError);
}

TEST_CASE("dim accepts negative axes") {
  auto t = Tensor::zeros({2, 5, 7});
  CHECK(t->dim(0) == 2);
  CHECK(t->dim(-1) == 7);
  CHECK(t->dim(-3) == 2);
  CHECK_THROWS_AS(t->dim(3), ShapeError);
  CHECK_THROWS_AS(t->dim(-4), ShapeError);
}

TEST_CASE("backward accumulates through a diamond") {
  // y = (x + x) * x  =>  dy/dx = 4x
  auto x = Tensor::scalar(3.0);
  x->requires_grad = true;
  auto y = mul(add(x, x), x);
  y->backward();
  CHECK(y->value() == doctest::Approx(18.0));
  CHECK(x->grad[0] == doctest::Approx(12.0));
}

TEST_CASE("backward visits shared subgraphs once") {
  // s = u + u where u = 2x; a second backward call after zero_grad gives the
  // same gradient, so closures did not double-fire.
  auto x = Tensor::scalar(1.5);
  x->requires_grad = true;
  auto u = scale(x, 2.0);
  auto s = add(u, u);
  s->backward();
  const double g1 = x->grad[0];
  CHECK(g1 == doctest::Approx(4.0));
  x->zero_grad();
  auto s2 = add(scale(x, 2.0), scale(x, 2.0));
  s2->backward();
  CHECK(x->grad[0] == doctest::Approx(g1));
}

TEST_CASE("backward requires a scalar root") {
  auto x = Tensor::zeros({2, 2});
  x->requires_grad = true;
  auto y = add(x, x);
  CHECK_THROWS_AS(y->backward(), ShapeError);
}

TEST_CASE("graphs are skipped entirely when nothing needs gradients") {
  auto x = Tensor::full({3}, 1.0);
  auto y = add(x, x);
  CHECK(!y->requires_grad);
  CHECK(y->parents.empty());
  CHECK(!y->backward_fn);
}

TEST_CASE("detach_ cuts a tensor out of the graph") {
  auto x = Tensor::scalar(2.0);
  x->requires_grad = true;
  auto y = scale(x, 3.0);
  y->detach_();
  CHECK(!y->requires_grad);
  CHECK(y->parents.empty());
}

TEST_CASE("non-finite values are rejected") {
  auto x = Tensor::full({2}, 1.0);
  x->data[1] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(check_finite(x->data, "test"), NumericError);
  auto y = Tensor::full({2}, std::numeric_limits<double>::quiet_NaN());
  CHECK_THROWS_AS(check_finite(y->data, "test"), NumericError);
}

TEST_CASE("deep chains do not overflow the stack") {
  auto x = Tensor::scalar(1.0);
  x->requires_grad = true;
  TensorPtr y = x;
  for (int i = 0; i < 60000; ++i) y = scale(y, 1.0);
  y->backward();
  CHECK(x->grad[0] == doctest::Approx(1.0));
}
