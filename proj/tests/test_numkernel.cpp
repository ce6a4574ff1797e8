#include <cmath>

#include <doctest.h>

#include "absatag/rng.hpp"
#include "absatag/tape.hpp"
#include "absatag/tensor.hpp"

using namespace absatag;

TEST_SUITE("tensor") {
  TEST_CASE("shape bookkeeping") {
    Tensor t({2, 3});
    CHECK(t.size() == 6);
    CHECK(t.rows() == 2);
    CHECK(t.cols() == 3);
    t.at(1, 2) = 4.0;
    CHECK(t.data[5] == 4.0);
    CHECK_THROWS_AS(Tensor({2, 2}, {1.0}), std::invalid_argument);
  }

  TEST_CASE("one_hot") {
    const Tensor t = Tensor::one_hot(4, 2);
    CHECK(t.data == std::vector<double>{0, 0, 1, 0});
  }
}

TEST_SUITE("tape") {
  TEST_CASE("matmul identity") {
    Tape tape;
    Tensor eye({3, 3});
    for (int i = 0; i < 3; ++i) eye.at(i, i) = 1.0;
    Tensor b({3, 2}, {1, 2, 3, 4, 5, 6});
    const Tensor out = tape.value(tape.matmul(tape.input(eye), tape.input(b)));
    CHECK(out.data == b.data);
  }

  TEST_CASE("matmul 1x1") {
    Tape tape;
    const Tensor out = tape.value(tape.matmul(tape.input(Tensor({1, 1}, {2.0})),
                                              tape.input(Tensor({1, 1}, {3.0}))));
    CHECK(out.data[0] == 6.0);
  }

  TEST_CASE("matmul against the triple loop") {
    Rng rng(17);
    Tensor a({3, 3}), b({3, 3});
    for (double& v : a.data) v = rng.uniform(-2, 2);
    for (double& v : b.data) v = rng.uniform(-2, 2);
    Tape tape;
    const Tensor out = tape.value(tape.matmul(tape.input(a), tape.input(b)));
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        double want = 0.0;
        for (std::size_t k = 0; k < 3; ++k) want += a.at(i, k) * b.at(k, j);
        CHECK(std::fabs(out.at(i, j) - want) < 1e-12);
      }
  }

  TEST_CASE("matmul shape error names both shapes") {
    Tape tape;
    const Tape::Var a = tape.input(Tensor({2, 3}));
    const Tape::Var b = tape.input(Tensor({2, 2}));
    CHECK_THROWS_WITH_AS(tape.matmul(a, b),
                         doctest::Contains("[2x3]"), std::invalid_argument);
  }

  TEST_CASE("sigmoid and tanh fixed points") {
    Tape tape;
    const Tape::Var x = tape.input(Tensor({3}, {0.0, 1.0, -1.0}));
    const Tensor s = tape.value(tape.sigmoid(x));
    CHECK(s.data[0] == 0.5);
    CHECK(s.data[1] == doctest::Approx(0.73105857863).epsilon(1e-11));
    const Tensor t = tape.value(tape.tanh(x));
    CHECK(t.data[0] == 0.0);
    for (double v : s.data) CHECK((v > 0.0 && v < 1.0));
    for (double v : t.data) CHECK((v > -1.0 && v < 1.0));
  }

  TEST_CASE("softmax known values") {
    Tape tape;
    const Tensor out =
        tape.value(tape.softmax(tape.input(Tensor({3}, {1.0, 2.0, 3.0}))));
    // independent route: direct exp / sum evaluation
    double denom = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
    CHECK(out.data[0] == doctest::Approx(std::exp(1.0) / denom).epsilon(1e-12));
    CHECK(out.data[1] == doctest::Approx(std::exp(2.0) / denom).epsilon(1e-12));
    CHECK(out.data[2] == doctest::Approx(std::exp(3.0) / denom).epsilon(1e-12));
    CHECK(out.data[0] == doctest::Approx(0.09003057317).epsilon(1e-9));
    CHECK(out.data[1] == doctest::Approx(0.24472847105).epsilon(1e-9));
    CHECK(out.data[2] == doctest::Approx(0.66524095577).epsilon(1e-9));
  }

  TEST_CASE("softmax symmetry and shift invariance") {
    Tape tape;
    const Tensor half = tape.value(tape.softmax(tape.input(Tensor({2}, {0, 0}))));
    CHECK(half.data[0] == 0.5);
    CHECK(half.data[1] == 0.5);
    for (double c : {-1234.5, 0.0, 3.25, 999.0}) {
      const Tensor out = tape.value(
          tape.softmax(tape.input(Tensor({4}, {c, c, c, c}))));
      for (double v : out.data) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
    }
  }

  TEST_CASE("softmax sums to one for large magnitudes") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 1 + rng.index(8);
      Tensor x({n});
      for (double& v : x.data) v = rng.uniform(-1e3, 1e3);
      Tape tape;
      const Tensor out = tape.value(tape.softmax(tape.input(x)));
      double sum = 0.0;
      for (double v : out.data) {
        CHECK(v >= 0.0);
        sum += v;
      }
      CHECK(std::fabs(sum - 1.0) < 1e-9);
    }
  }

  TEST_CASE("cross entropy values") {
    Tape tape;
    const Tape::Var exact = tape.input(Tensor({2}, {1.0, 0.0}));
    CHECK(tape.value(tape.cross_entropy(exact, 0)).data[0] == 0.0);
    const Tape::Var uniform = tape.input(Tensor({2}, {0.5, 0.5}));
    CHECK(tape.value(tape.cross_entropy(uniform, 1)).data[0] ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
    const Tape::Var skewed = tape.input(Tensor({2}, {0.7, 0.3}));
    CHECK(tape.value(tape.cross_entropy(skewed, 1)).data[0] ==
          doctest::Approx(-std::log(0.3)).epsilon(1e-12));
    CHECK(tape.value(tape.cross_entropy(skewed, 1)).data[0] ==
          doctest::Approx(1.203973).epsilon(1e-6));
  }

  TEST_CASE("cross entropy clamps a zero prediction") {
    Tape tape;
    const Tape::Var p = tape.input(Tensor({2}, {1.0, 0.0}));
    const double loss = tape.value(tape.cross_entropy(p, 1)).data[0];
    CHECK(loss == doctest::Approx(-std::log(1e-12)));
    CHECK(std::isfinite(loss));
  }

  TEST_CASE("cross entropy one-hot wrapper rejects non-one-hot gold") {
    Tape tape;
    const Tape::Var p = tape.input(Tensor({2}, {0.5, 0.5}));
    CHECK_THROWS_AS(tape.cross_entropy(p, Tensor({2}, {0.5, 0.5})),
                    std::invalid_argument);
    CHECK(tape.value(tape.cross_entropy(p, Tensor::one_hot(2, 0))).data[0] ==
          doctest::Approx(std::log(2.0)));
  }

  TEST_CASE("dropout identity paths") {
    Rng rng(3);
    Tape tape;
    Tensor x({100});
    for (double& v : x.data) v = 1.0;
    const Tape::Var in = tape.input(x);
    CHECK(tape.dropout(in, 1.0, true, rng).id == in.id);
    CHECK(tape.dropout(in, 0.5, false, rng).id == in.id);
    CHECK_THROWS_AS(tape.dropout(in, 0.0, true, rng), std::invalid_argument);
    CHECK_THROWS_AS(tape.dropout(in, -0.3, true, rng), std::invalid_argument);
  }

  TEST_CASE("inverted dropout keeps the mean") {
    Rng rng(42);
    Tape tape;
    Tensor x({100000});
    for (double& v : x.data) v = 1.0;
    const Tensor out = tape.value(tape.dropout(tape.input(x), 0.8, true, rng));
    double mean = 0.0;
    for (double v : out.data) mean += v;
    mean /= static_cast<double>(out.size());
    CHECK(mean > 0.99);
    CHECK(mean < 1.01);
  }

  TEST_CASE("backward on x squared") {
    Tape tape;
    const Tape::Var x = tape.input(Tensor({1}, {3.0}));
    const Tape::Var y = tape.mul(x, x);
    tape.backward(y);
    CHECK(tape.grad(x).data[0] == 6.0);
  }

  TEST_CASE("softmax + cross entropy gradient is pred minus gold") {
    Tape tape;
    const Tape::Var logits = tape.input(Tensor({3}, {0.3, -1.2, 2.0}));
    const Tape::Var pred = tape.softmax(logits);
    tape.backward(tape.cross_entropy(pred, 1));
    const Tensor& p = tape.value(pred);
    const Tensor& g = tape.grad(logits);
    CHECK(g.data[0] == doctest::Approx(p.data[0]).epsilon(1e-12));
    CHECK(g.data[1] == doctest::Approx(p.data[1] - 1.0).epsilon(1e-12));
    CHECK(g.data[2] == doctest::Approx(p.data[2]).epsilon(1e-12));
  }

  TEST_CASE("backward requires a scalar from this tape") {
    Tape tape;
    const Tape::Var vec = tape.input(Tensor({3}));
    CHECK_THROWS_AS(tape.backward(vec), std::invalid_argument);
    CHECK_THROWS_AS(tape.backward(Tape::Var{}), std::invalid_argument);
    Tape other;
    const Tape::Var foreign = other.input(Tensor::scalar(1.0));
    CHECK(foreign.id == 0);
    CHECK_THROWS_AS(tape.backward(foreign), std::invalid_argument);
  }

  TEST_CASE("parameters accumulate gradients") {
    Parameter w("w", Tensor({2, 2}, {1, 2, 3, 4}));
    Tape tape;
    const Tape::Var wv = tape.param(w);
    CHECK(tape.param(w).id == wv.id);  // cached
    const Tape::Var x = tape.input(Tensor({2}, {1.0, 1.0}));
    const Tape::Var y = tape.matmul(wv, x);
    tape.backward(tape.dot(y, y));
    // d/dW (Wx . Wx) = 2 (Wx) x^T
    const Tensor& out = tape.value(y);
    CHECK(w.grad.at(0, 0) == doctest::Approx(2 * out.data[0]));
    CHECK(w.grad.at(1, 1) == doctest::Approx(2 * out.data[1]));
  }

  TEST_CASE("param_row applies the scale in both directions") {
    Parameter table("emb", Tensor({3, 2}, {1, -2, 5, 6, 7, 8}));
    Tape tape;
    const Tape::Var row = tape.param_row(table, 0, 0.2);
    const Tensor& v = tape.value(row);
    CHECK(v.data[0] == doctest::Approx(0.2));
    CHECK(v.data[1] == doctest::Approx(-0.4));
    tape.backward(tape.dot(row, row));
    // d/dr (0.2 r . 0.2 r) = 2 * 0.2^2 * r
    CHECK(table.grad.at(0, 0) == doctest::Approx(2 * 0.04 * 1.0));
    CHECK(table.grad.at(0, 1) == doctest::Approx(2 * 0.04 * -2.0));
    CHECK(table.grad.at(1, 0) == 0.0);
  }

  TEST_CASE("weighted_sum matches the loop oracle") {
    Rng rng(9);
    Tape tape;
    Tensor w({4});
    for (double& v : w.data) v = rng.uniform(0, 1);
    std::vector<Tape::Var> vs;
    std::vector<Tensor> raw;
    for (int j = 0; j < 4; ++j) {
      Tensor t({3});
      for (double& v : t.data) v = rng.uniform(-1, 1);
      raw.push_back(t);
      vs.push_back(tape.input(t));
    }
    const Tensor out = tape.value(tape.weighted_sum(tape.input(w), vs));
    for (std::size_t i = 0; i < 3; ++i) {
      double want = 0.0;
      for (std::size_t j = 0; j < 4; ++j) want += w.data[j] * raw[j].data[i];
      CHECK(std::fabs(out.data[i] - want) < 1e-12);
    }
  }

  TEST_CASE("pair_scores equals the compositional route, gradients too") {
    Rng rng(23);
    const std::size_t d = 4, a = 3, n = 5;
    Tensor v_t({a}), w_t({a, 2 * d}), q_t({d});
    for (double& x : v_t.data) x = rng.uniform(-1, 1);
    for (double& x : w_t.data) x = rng.uniform(-1, 1);
    for (double& x : q_t.data) x = rng.uniform(-1, 1);
    std::vector<Tensor> keys;
    for (std::size_t j = 0; j < n; ++j) {
      Tensor k({d});
      for (double& x : k.data) x = rng.uniform(-1, 1);
      keys.push_back(k);
    }

    // fused route
    Parameter v_p("v", v_t), w_p("w", w_t), q_p("q", q_t);
    Tape fused;
    std::vector<Tape::Var> key_vars;
    std::vector<Parameter> key_params;
    key_params.reserve(n);
    for (std::size_t j = 0; j < n; ++j)
      key_params.emplace_back("k" + std::to_string(j), keys[j]);
    for (std::size_t j = 0; j < n; ++j)
      key_vars.push_back(fused.param(key_params[j]));
    const Tape::Var u = fused.pair_scores(fused.param(v_p), fused.param(w_p),
                                          fused.param(q_p), key_vars);
    Tensor weights({n});
    for (std::size_t j = 0; j < n; ++j) weights.data[j] = 0.1 * (j + 1);
    fused.backward(fused.dot(u, fused.input(weights)));

    // compositional oracle: concat + matmul + tanh + dot per key
    Parameter v2("v", v_t), w2("w", w_t), q2("q", q_t);
    std::vector<Parameter> key2;
    key2.reserve(n);
    for (std::size_t j = 0; j < n; ++j)
      key2.emplace_back("k" + std::to_string(j), keys[j]);
    Tape comp;
    std::vector<Tape::Var> scores;
    for (std::size_t j = 0; j < n; ++j) {
      const Tape::Var cat = comp.concat(
          std::vector<Tape::Var>{comp.param(q2), comp.param(key2[j])});
      scores.push_back(
          comp.dot(comp.param(v2), comp.tanh(comp.matmul(comp.param(w2), cat))));
    }
    const Tape::Var u2 = comp.concat(scores);
    comp.backward(comp.dot(u2, comp.input(weights)));

    for (std::size_t j = 0; j < n; ++j)
      CHECK(fused.value(u).data[j] ==
            doctest::Approx(comp.value(u2).data[j]).epsilon(1e-12));
    for (std::size_t i = 0; i < v_t.size(); ++i)
      CHECK(v_p.grad.data[i] == doctest::Approx(v2.grad.data[i]).epsilon(1e-10));
    for (std::size_t i = 0; i < w_t.size(); ++i)
      CHECK(w_p.grad.data[i] == doctest::Approx(w2.grad.data[i]).epsilon(1e-10));
    for (std::size_t i = 0; i < q_t.size(); ++i)
      CHECK(q_p.grad.data[i] == doctest::Approx(q2.grad.data[i]).epsilon(1e-10));
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < d; ++i)
        CHECK(key_params[j].grad.data[i] ==
              doctest::Approx(key2[j].grad.data[i]).epsilon(1e-10));
  }

  TEST_CASE("fixed seed gives bit-identical streams") {
    Rng a(1234), b(1234);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng c(1234);
    Rng d(1235);
    bool differs = false;
    for (int i = 0; i < 10; ++i) differs |= (c.next_u64() != d.next_u64());
    CHECK(differs);
  }
}
