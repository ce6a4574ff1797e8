#include "absatag/tape.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace absatag {

bool Tensor::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i)
    os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

std::size_t Tensor::count(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return shape.empty() ? 0 : n;
}

namespace {

[[noreturn]] void dim_error(const char* op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                              a.shape_str() + " vs " + b.shape_str());
}

void check_finite(const char* op, const Tensor& t) {
  if (!t.all_finite())
    throw std::runtime_error(std::string(op) + ": non-finite value produced");
}

}  // namespace

void Tape::check(Var v, const char* op) const {
  if (!v.valid() || v.id >= nodes_.size())
    throw std::invalid_argument(std::string(op) + ": var not on this tape");
}

const Tape::Node& Tape::cnode(Var v) const { return nodes_[v.id]; }

Tape::Var Tape::push(Node n) {
  n.grad = Tensor::zeros(n.val().shape);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const Tensor& Tape::value(Var v) const {
  check(v, "value");
  return cnode(v).val();
}

const Tensor& Tape::grad(Var v) const {
  check(v, "grad");
  return cnode(v).grad;
}

Tape::Var Tape::input(Tensor value) {
  check_finite("input", value);
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Tape::Var Tape::param(Parameter& p) {
  for (const auto& [ptr, id] : param_cache_)
    if (ptr == &p) return Var{id};
  Node n;
  n.extern_value = &p.value;
  n.param = &p;
  n.back = [](Tape&, Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      self.param->grad.data[i] += self.grad.data[i];
  };
  Var v = push(std::move(n));
  param_cache_.emplace_back(&p, v.id);
  return v;
}

Tape::Var Tape::param_row(Parameter& table, std::size_t row, double scale) {
  if (table.value.rank() != 2 || row >= table.value.rows())
    throw std::invalid_argument("param_row: row " + std::to_string(row) +
                                " out of range for " + table.value.shape_str());
  const std::size_t dim = table.value.cols();
  Node n;
  n.value = Tensor({dim});
  for (std::size_t j = 0; j < dim; ++j)
    n.value.data[j] = scale * table.value.at(row, j);
  n.param = &table;
  n.back = [row, scale, dim](Tape&, Node& self) {
    for (std::size_t j = 0; j < dim; ++j)
      self.param->grad.at(row, j) += scale * self.grad.data[j];
  };
  return push(std::move(n));
}

Tape::Var Tape::matmul(Var a, Var b) {
  check(a, "matmul");
  check(b, "matmul");
  const Tensor& A = cnode(a).val();
  const Tensor& B = cnode(b).val();
  if (A.rank() != 2 || B.rank() < 1 || B.rank() > 2 || A.cols() != B.rows())
    dim_error("matmul", A, B);
  const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  Node out;
  out.value = Tensor(B.rank() == 1 ? std::vector<std::size_t>{m}
                                   : std::vector<std::size_t>{m, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < k; ++t) acc += A.at(i, t) * B.at(t, j);
      out.value.data[i * n + j] = acc;
    }
  check_finite("matmul", out.value);
  out.back = [a, b, m, k, n](Tape& tape, Node& self) {
    const Tensor& A = tape.node(a).val();
    const Tensor& B = tape.node(b).val();
    Tensor& dA = tape.node(a).grad;
    Tensor& dB = tape.node(b).grad;
    // dA = dC B^T, dB = A^T dC
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t t = 0; t < k; ++t) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j)
          acc += self.grad.data[i * n + j] * B.at(t, j);
        dA.at(i, t) += acc;
      }
    for (std::size_t t = 0; t < k; ++t)
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i)
          acc += A.at(i, t) * self.grad.data[i * n + j];
        dB.data[t * n + j] += acc;
      }
  };
  return push(std::move(out));
}

Tape::Var Tape::add(Var a, Var b) {
  check(a, "add");
  check(b, "add");
  const Tensor& A = cnode(a).val();
  const Tensor& B = cnode(b).val();
  if (!A.same_shape(B)) dim_error("add", A, B);
  Node out;
  out.value = A;
  for (std::size_t i = 0; i < B.size(); ++i) out.value.data[i] += B.data[i];
  check_finite("add", out.value);
  out.back = [a, b](Tape& tape, Node& self) {
    Tensor& dA = tape.node(a).grad;
    Tensor& dB = tape.node(b).grad;
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      dA.data[i] += self.grad.data[i];
      dB.data[i] += self.grad.data[i];
    }
  };
  return push(std::move(out));
}

Tape::Var Tape::mul(Var a, Var b) {
  check(a, "mul");
  check(b, "mul");
  const Tensor& A = cnode(a).val();
  const Tensor& B = cnode(b).val();
  if (!A.same_shape(B)) dim_error("mul", A, B);
  Node out;
  out.value = A;
  for (std::size_t i = 0; i < B.size(); ++i) out.value.data[i] *= B.data[i];
  check_finite("mul", out.value);
  out.back = [a, b](Tape& tape, Node& self) {
    const Tensor& A = tape.node(a).val();
    const Tensor& B = tape.node(b).val();
    Tensor& dA = tape.node(a).grad;
    Tensor& dB = tape.node(b).grad;
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      dA.data[i] += self.grad.data[i] * B.data[i];
      dB.data[i] += self.grad.data[i] * A.data[i];
    }
  };
  return push(std::move(out));
}

Tape::Var Tape::sigmoid(Var x) {
  check(x, "sigmoid");
  Node out;
  out.value = cnode(x).val();
  for (double& v : out.value.data) v = 1.0 / (1.0 + std::exp(-v));
  out.back = [x](Tape& tape, Node& self) {
    Tensor& dx = tape.node(x).grad;
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const double y = self.value.data[i];
      dx.data[i] += self.grad.data[i] * y * (1.0 - y);
    }
  };
  return push(std::move(out));
}

Tape::Var Tape::tanh(Var x) {
  check(x, "tanh");
  Node out;
  out.value = cnode(x).val();
  for (double& v : out.value.data) v = std::tanh(v);
  out.back = [x](Tape& tape, Node& self) {
    Tensor& dx = tape.node(x).grad;
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const double y = self.value.data[i];
      dx.data[i] += self.grad.data[i] * (1.0 - y * y);
    }
  };
  return push(std::move(out));
}

Tape::Var Tape::softmax(Var x) {
  check(x, "softmax");
  const Tensor& X = cnode(x).val();
  if (X.rank() != 1 || X.size() == 0)
    throw std::invalid_argument("softmax: expected non-empty rank-1 tensor, got " +
                                X.shape_str());
  Node out;
  out.value = X;
  double mx = out.value.data[0];
  for (double v : out.value.data) mx = std::max(mx, v);
  double sum = 0.0;
  for (double& v : out.value.data) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : out.value.data) v /= sum;
  out.back = [x](Tape& tape, Node& self) {
    Tensor& dx = tape.node(x).grad;
    double inner = 0.0;
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      inner += self.grad.data[i] * self.value.data[i];
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      dx.data[i] += self.value.data[i] * (self.grad.data[i] - inner);
  };
  return push(std::move(out));
}

Tape::Var Tape::concat(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat: no parts");
  std::size_t total = 0;
  for (Var p : parts) {
    check(p, "concat");
    if (cnode(p).val().rank() != 1)
      throw std::invalid_argument("concat: rank-1 parts required, got " +
                                  cnode(p).val().shape_str());
    total += cnode(p).val().size();
  }
  Node out;
  out.value = Tensor({total});
  std::size_t off = 0;
  for (Var p : parts) {
    const Tensor& t = cnode(p).val();
    std::copy(t.data.begin(), t.data.end(), out.value.data.begin() + off);
    off += t.size();
  }
  std::vector<Var> kept(parts.begin(), parts.end());
  out.back = [kept](Tape& tape, Node& self) {
    std::size_t off = 0;
    for (Var p : kept) {
      Tensor& dp = tape.node(p).grad;
      for (std::size_t i = 0; i < dp.size(); ++i)
        dp.data[i] += self.grad.data[off + i];
      off += dp.size();
    }
  };
  return push(std::move(out));
}

Tape::Var Tape::dot(Var a, Var b) {
  check(a, "dot");
  check(b, "dot");
  const Tensor& A = cnode(a).val();
  const Tensor& B = cnode(b).val();
  if (A.rank() != 1 || !A.same_shape(B)) dim_error("dot", A, B);
  double acc = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i) acc += A.data[i] * B.data[i];
  Node out;
  out.value = Tensor::scalar(acc);
  check_finite("dot", out.value);
  out.back = [a, b](Tape& tape, Node& self) {
    const Tensor& A = tape.node(a).val();
    const Tensor& B = tape.node(b).val();
    Tensor& dA = tape.node(a).grad;
    Tensor& dB = tape.node(b).grad;
    const double g = self.grad.data[0];
    for (std::size_t i = 0; i < A.size(); ++i) {
      dA.data[i] += g * B.data[i];
      dB.data[i] += g * A.data[i];
    }
  };
  return push(std::move(out));
}

Tape::Var Tape::scale(Var x, double c) {
  check(x, "scale");
  Node out;
  out.value = cnode(x).val();
  for (double& v : out.value.data) v *= c;
  check_finite("scale", out.value);
  out.back = [x, c](Tape& tape, Node& self) {
    Tensor& dx = tape.node(x).grad;
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      dx.data[i] += c * self.grad.data[i];
  };
  return push(std::move(out));
}

Tape::Var Tape::weighted_sum(Var weights, std::span<const Var> vectors) {
  check(weights, "weighted_sum");
  const Tensor& W = cnode(weights).val();
  if (W.rank() != 1 || W.size() != vectors.size())
    throw std::invalid_argument("weighted_sum: " + std::to_string(vectors.size()) +
                                " vectors vs weights " + W.shape_str());
  for (Var v : vectors) check(v, "weighted_sum");
  const Tensor& first = cnode(vectors.front()).val();
  Node out;
  out.value = Tensor(first.shape);
  for (std::size_t j = 0; j < vectors.size(); ++j) {
    const Tensor& vj = cnode(vectors[j]).val();
    if (!vj.same_shape(first)) dim_error("weighted_sum", first, vj);
    for (std::size_t i = 0; i < vj.size(); ++i)
      out.value.data[i] += W.data[j] * vj.data[i];
  }
  check_finite("weighted_sum", out.value);
  std::vector<Var> kept(vectors.begin(), vectors.end());
  out.back = [weights, kept](Tape& tape, Node& self) {
    const Tensor& W = tape.node(weights).val();
    Tensor& dW = tape.node(weights).grad;
    for (std::size_t j = 0; j < kept.size(); ++j) {
      const Tensor& vj = tape.node(kept[j]).val();
      Tensor& dvj = tape.node(kept[j]).grad;
      double acc = 0.0;
      for (std::size_t i = 0; i < vj.size(); ++i) {
        acc += self.grad.data[i] * vj.data[i];
        dvj.data[i] += W.data[j] * self.grad.data[i];
      }
      dW.data[j] += acc;
    }
  };
  return push(std::move(out));
}

Tape::Var Tape::pair_scores(Var v, Var w_pair, Var query,
                            std::span<const Var> keys) {
  check(v, "pair_scores");
  check(w_pair, "pair_scores");
  check(query, "pair_scores");
  const Tensor& V = cnode(v).val();
  const Tensor& W = cnode(w_pair).val();
  const Tensor& Q = cnode(query).val();
  if (keys.empty()) throw std::invalid_argument("pair_scores: no keys");
  for (Var k : keys) check(k, "pair_scores");
  const std::size_t d = Q.size();
  const std::size_t a = W.rows();
  if (W.rank() != 2 || W.cols() != 2 * d || V.size() != a)
    dim_error("pair_scores", W, Q);
  const std::size_t n = keys.size();

  // Per key, z_j = W [q; k_j]; stash tanh(z_j) for the backward pass.
  auto tanhz = std::make_shared<std::vector<double>>(n * a);
  Node out;
  out.value = Tensor({n});
  for (std::size_t j = 0; j < n; ++j) {
    const Tensor& K = cnode(keys[j]).val();
    if (K.size() != d) dim_error("pair_scores", Q, K);
    double score = 0.0;
    for (std::size_t r = 0; r < a; ++r) {
      double z = 0.0;
      for (std::size_t c = 0; c < d; ++c)
        z += W.at(r, c) * Q.data[c] + W.at(r, d + c) * K.data[c];
      const double t = std::tanh(z);
      (*tanhz)[j * a + r] = t;
      score += V.data[r] * t;
    }
    out.value.data[j] = score;
  }
  check_finite("pair_scores", out.value);

  std::vector<Var> kept(keys.begin(), keys.end());
  out.back = [v, w_pair, query, kept, tanhz, d, a](Tape& tape, Node& self) {
    const Tensor& V = tape.node(v).val();
    const Tensor& W = tape.node(w_pair).val();
    const Tensor& Q = tape.node(query).val();
    Tensor& dV = tape.node(v).grad;
    Tensor& dW = tape.node(w_pair).grad;
    Tensor& dQ = tape.node(query).grad;
    for (std::size_t j = 0; j < kept.size(); ++j) {
      const double gu = self.grad.data[j];
      if (gu == 0.0) continue;
      const Tensor& K = tape.node(kept[j]).val();
      Tensor& dK = tape.node(kept[j]).grad;
      for (std::size_t r = 0; r < a; ++r) {
        const double t = (*tanhz)[j * a + r];
        dV.data[r] += gu * t;
        const double dz = gu * V.data[r] * (1.0 - t * t);
        if (dz == 0.0) continue;
        for (std::size_t c = 0; c < d; ++c) {
          dW.at(r, c) += dz * Q.data[c];
          dW.at(r, d + c) += dz * K.data[c];
          dQ.data[c] += dz * W.at(r, c);
          dK.data[c] += dz * W.at(r, d + c);
        }
      }
    }
  };
  return push(std::move(out));
}

Tape::Var Tape::dropout(Var x, double keep, bool training, Rng& rng) {
  check(x, "dropout");
  if (keep <= 0.0 || keep > 1.0)
    throw std::invalid_argument("dropout: keep probability must be in (0, 1], got " +
                                std::to_string(keep));
  if (!training || keep == 1.0) return x;
  const Tensor& X = cnode(x).val();
  auto mask = std::make_shared<std::vector<double>>(X.size());
  Node out;
  out.value = X;
  for (std::size_t i = 0; i < X.size(); ++i) {
    const double m = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
    (*mask)[i] = m;
    out.value.data[i] *= m;
  }
  out.back = [x, mask](Tape& tape, Node& self) {
    Tensor& dx = tape.node(x).grad;
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      dx.data[i] += self.grad.data[i] * (*mask)[i];
  };
  return push(std::move(out));
}

Tape::Var Tape::cross_entropy(Var pred, std::size_t gold_index) {
  check(pred, "cross_entropy");
  const Tensor& P = cnode(pred).val();
  if (P.rank() != 1 || gold_index >= P.size())
    throw std::invalid_argument("cross_entropy: gold index " +
                                std::to_string(gold_index) + " vs " +
                                P.shape_str());
  const double p = std::max(P.data[gold_index], kLogEps);
  Node out;
  out.value = Tensor::scalar(-std::log(p));
  out.back = [pred, gold_index](Tape& tape, Node& self) {
    const Tensor& P = tape.node(pred).val();
    Tensor& dP = tape.node(pred).grad;
    if (P.data[gold_index] > kLogEps)
      dP.data[gold_index] -= self.grad.data[0] / P.data[gold_index];
  };
  return push(std::move(out));
}

Tape::Var Tape::cross_entropy(Var pred, const Tensor& gold_one_hot) {
  check(pred, "cross_entropy");
  if (!gold_one_hot.same_shape(cnode(pred).val()))
    dim_error("cross_entropy", cnode(pred).val(), gold_one_hot);
  std::size_t idx = gold_one_hot.size();
  for (std::size_t i = 0; i < gold_one_hot.size(); ++i)
    if (gold_one_hot.data[i] == 1.0) {
      idx = i;
      break;
    }
  if (idx == gold_one_hot.size())
    throw std::invalid_argument("cross_entropy: gold vector is not one-hot");
  return cross_entropy(pred, idx);
}

Tape::Var Tape::mean(std::span<const Var> scalars) {
  if (scalars.empty()) throw std::invalid_argument("mean: no inputs");
  double acc = 0.0;
  for (Var s : scalars) {
    check(s, "mean");
    if (!cnode(s).val().is_scalar())
      throw std::invalid_argument("mean: scalar inputs required");
    acc += cnode(s).val().data[0];
  }
  Node out;
  out.value = Tensor::scalar(acc / static_cast<double>(scalars.size()));
  std::vector<Var> kept(scalars.begin(), scalars.end());
  out.back = [kept](Tape& tape, Node& self) {
    const double g = self.grad.data[0] / static_cast<double>(kept.size());
    for (Var s : kept) tape.node(s).grad.data[0] += g;
  };
  return push(std::move(out));
}

void Tape::backward(Var loss) {
  check(loss, "backward");
  if (!cnode(loss).val().is_scalar())
    throw std::invalid_argument("backward: loss must be a scalar, got " +
                                cnode(loss).val().shape_str());
  node(loss).grad.data[0] = 1.0;
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    Node& n = nodes_[i];
    if (n.back) n.back(*this, n);
  }
}

}  // namespace absatag
