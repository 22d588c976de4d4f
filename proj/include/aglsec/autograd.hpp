#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "aglsec/tensor.hpp"

namespace aglsec {

// Handle to a node on a Graph's tape.
using Var = std::size_t;

inline constexpr double kLayerNormEpsilon = 1e-5;

// Reverse-mode automatic differentiation over a flat operation tape.
//
// Every op appends one node holding its inputs and the eagerly computed
// value, so tape order is already a topological order. backward() sweeps the
// tape in reverse from the loss node, accumulates gradients node by node, and
// flushes gradients of `param` leaves into the ParameterStore the graph was
// constructed over. A graph is single-shot: build, run backward once, discard.
class Graph {
public:
    Graph() = default;
    explicit Graph(ParameterStore& store) : reader_(&store), writer_(&store) {}

    // Forward-only graph: parameters can be read, but backward() refuses to
    // run because there is nowhere to flush gradients.
    explicit Graph(const ParameterStore& store) : reader_(&store) {}

    // Leaf holding a fixed value; receives a gradient but flushes nowhere.
    Var constant(Tensor value);

    // Leaf bound to a named parameter. The current value is copied from the
    // store; backward() adds the node's gradient into the store's gradient.
    Var param(const std::string& name);

    Var matmul(Var a, Var b);            // [m,k] x [k,n] -> [m,n]
    Var matmul_nt(Var a, Var b);         // [m,k] x [n,k]-transposed -> [m,n]
    Var add(Var a, Var b);               // same shape, elementwise
    Var add_row_bias(Var a, Var bias);   // bias rank-1 [n], broadcast over rows
    Var concat_cols(Var a, Var b);       // [m,p] ++ [m,q] -> [m,p+q]
    Var slice_cols(Var a, std::size_t begin, std::size_t end);
    Var gather_rows(Var table, const std::vector<std::size_t>& rows);
    Var scale(Var a, double factor);
    Var gelu(Var a);
    Var layer_norm(Var x, Var gamma, Var beta);
    Var softmax_rows(Var x);

    // Mean cross entropy over the rows picked out by `include`; rows left out
    // contribute nothing and their logits get exactly zero gradient.
    Var masked_cross_entropy(Var logits, const std::vector<int>& targets,
                             const std::vector<unsigned char>& include);

    const Tensor& value(Var v) const;
    const Tensor& grad(Var v) const;

    // Backpropagates from a scalar node. The seed gradient is seed_scale, so
    // gradients of seed_scale * loss land in the parameter store.
    void backward(Var loss, double seed_scale = 1.0);

    std::size_t size() const { return nodes_.size(); }
    bool backward_done() const { return backward_done_; }

private:
    enum class Op {
        kConstant,
        kParam,
        kMatmul,
        kMatmulNt,
        kAdd,
        kAddRowBias,
        kConcatCols,
        kSliceCols,
        kGatherRows,
        kScale,
        kGelu,
        kLayerNorm,
        kSoftmaxRows,
        kMaskedCrossEntropy,
    };

    struct Node {
        Op op;
        Var a = 0;
        Var b = 0;
        Var c = 0;
        Tensor value;
        Tensor grad;
        std::string param_name;
        std::size_t begin = 0;
        std::size_t end = 0;
        std::vector<std::size_t> rows;
        double factor = 1.0;
        std::vector<int> targets;
        std::vector<unsigned char> include;
        Tensor aux1;  // layer_norm: normalized rows; ce: row softmax
        Tensor aux2;  // layer_norm: per-row 1/stddev
    };

    const Node& node(Var v) const;
    Var push(Node node);
    void propagate(Var v);

    // Deque so value()/grad() references stay valid while later ops append.
    std::deque<Node> nodes_;
    const ParameterStore* reader_ = nullptr;
    ParameterStore* writer_ = nullptr;
    bool backward_done_ = false;
};

}  // namespace aglsec
