#ifndef ABSATAG_TAPE_HPP
#define ABSATAG_TAPE_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "absatag/rng.hpp"
#include "absatag/tensor.hpp"

namespace absatag {

// Reverse-mode differentiation record. Operations append nodes in forward
// order; backward() walks them once in reverse and accumulates gradients
// into every Parameter that was used on this tape.
//
// A tape is single-writer: one training step owns it exclusively. Parameter
// values referenced by param()/param_row() must stay alive and unmodified
// until the tape is dropped.
class Tape {
 public:
  struct Var {
    std::uint32_t id = UINT32_MAX;
    bool valid() const { return id != UINT32_MAX; }
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaves.
  Var input(Tensor value);
  Var param(Parameter& p);  // cached: repeated calls return the same node
  Var param_row(Parameter& table, std::size_t row, double scale = 1.0);

  // Primitive operations.
  Var matmul(Var a, Var b);  // {m,k}x{k,n}->{m,n} or {m,k}x{k}->{m}
  Var add(Var a, Var b);     // elementwise, same shape
  Var mul(Var a, Var b);     // elementwise (Hadamard), same shape
  Var sigmoid(Var x);
  Var tanh(Var x);
  Var softmax(Var x);  // rank-1, max-subtracted for stability
  Var concat(std::span<const Var> parts);  // rank-1 parts
  Var dot(Var a, Var b);                   // rank-1 . rank-1 -> scalar
  Var scale(Var x, double c);
  // sum_j weights[j] * vectors[j]
  Var weighted_sum(Var weights, std::span<const Var> vectors);
  // Fused pairwise attention energies: out[j] = v . tanh(w_pair [query; keys[j]]).
  Var pair_scores(Var v, Var w_pair, Var query, std::span<const Var> keys);
  // Inverted dropout; identity when !training or keep == 1. keep <= 0 throws.
  Var dropout(Var x, double keep, bool training, Rng& rng);
  // -log(pred[gold]) with the log clamped at 1e-12.
  Var cross_entropy(Var pred, std::size_t gold_index);
  Var cross_entropy(Var pred, const Tensor& gold_one_hot);
  Var mean(std::span<const Var> scalars);

  const Tensor& value(Var v) const;
  const Tensor& grad(Var v) const;

  // Accumulates d loss / d p into p.grad for every parameter used here.
  // The loss must be a scalar produced on this tape.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

  static constexpr double kLogEps = 1e-12;

 private:
  struct Node {
    Tensor value;                           // owned result
    const Tensor* extern_value = nullptr;   // set instead for param nodes
    Tensor grad;
    Parameter* param = nullptr;
    std::function<void(Tape&, Node&)> back;  // empty for leaves

    const Tensor& val() const { return extern_value ? *extern_value : value; }
  };

  Var push(Node node);
  Node& node(Var v) { return nodes_[v.id]; }
  const Node& cnode(Var v) const;
  void check(Var v, const char* op) const;

  std::vector<Node> nodes_;
  std::vector<std::pair<Parameter*, std::uint32_t>> param_cache_;
};

}  // namespace absatag

#endif
