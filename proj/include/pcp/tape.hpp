#pragma once

#include <cstdint>
#include <vector>

#include "pcp/tensor.hpp"

namespace pcp {

enum class Activation { tanh_act, silu };

/// Reverse-mode autodiff over rank<=2 tensors. The tape records parameter-
/// space graphs only; inputs enter as constants and never receive gradients.
/// Tensor storage is recycled through a thread-local pool because training
/// rebuilds the graph every iteration.
class Tape {
 public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;
    ~Tape();

    /// Constant leaf (no gradient tracking).
    int input(const Tensor& t);

    /// Tracked leaf; grad(id) is valid after backward().
    int param(const Tensor& t);

    /// a (n x k) times b (m x k) transposed -> n x m.
    int matmul_nt(int a, int b);

    /// Adds a 1 x m bias row to every row of a (n x m).
    int add_bias(int a, int bias);

    /// Fused x (n x k) times w (m x k) transposed plus bias row (1 x m).
    int linear(int x, int w, int bias);

    int activation(int a, Activation act);

    /// a (n x 1) minus a constant vector of length n.
    int sub_vec(int a, const std::vector<double>& c);

    /// Sum of squared entries -> 1 x 1 scalar.
    int square_sum(int a);

    int scale(int a, double s);

    /// Elementwise sum of two same-shape nodes.
    int add(int a, int b);

    const Tensor& value(int id) const { return nodes_[id].val; }
    const Tensor& grad(int id) const;

    /// Reverse sweep from `root`, seeding with the given cotangent (same
    /// shape as the root value). Gradients accumulate into every tracked
    /// node reachable from the root.
    void backward(int root, const std::vector<double>& seed);

    /// Seeds a 1 x 1 root with 1.0. Throws on a non-scalar root.
    void backward_scalar(int root);

    /// Drops all nodes, returning their storage to the pool.
    void reset();
    int size() const { return static_cast<int>(nodes_.size()); }

 private:
    enum class Op : uint8_t {
        leaf_const,
        leaf_param,
        matmul_nt,
        add_bias,
        linear,
        act_tanh,
        act_silu,
        sub_vec,
        square_sum,
        scale,
        add,
    };

    struct Node {
        Op op;
        int a = -1;
        int b = -1;
        int c = -1;
        bool needs_grad = false;
        double aux = 0.0;
        Tensor val;
        Tensor grad;
        std::vector<double> constant;
    };

    int push(Node n);
    Tensor& grad_buf(int id);
    Tensor acquire(int rows, int cols);

    std::vector<Node> nodes_;
};

}  // namespace pcp
