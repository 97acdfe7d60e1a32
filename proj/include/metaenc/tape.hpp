#pragma once

#include <array>
#include <functional>
#include <vector>

#include "metaenc/tensor.hpp"

namespace metaenc {

enum class OpKind {
    leaf,
    matmul,
    add,
    sub,
    scale,
    hadamard,
    tanh_op,
    transpose,
    sum,
    mse,
    sym_solve,
    reshape,
    concat,
};

/// Reverse-mode autodiff tape. Nodes are appended in topological order; each
/// node caches its forward value, so a second forward replay is never needed.
/// One tape is single-threaded; independent tapes may run concurrently.
class Tape {
  public:
    using NodeId = int;

    NodeId leaf(Tensor value);

    NodeId matmul(NodeId a, NodeId b);
    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId scale(NodeId a, double alpha);
    NodeId hadamard(NodeId a, NodeId b);
    NodeId tanh(NodeId a);
    NodeId transpose(NodeId a);
    NodeId sum(NodeId a);
    NodeId mse(NodeId a, NodeId b);
    /// Differentiable SPD solve y = A^{-1} b via conjugate gradients. The
    /// adjoint is implicit: bbar = A^{-1} ybar, Abar = -sym(bbar y^T).
    NodeId sym_solve(NodeId a, NodeId b);
    NodeId reshape(NodeId a, std::vector<std::size_t> new_shape);
    NodeId concat(NodeId a, NodeId b);  // rank-1 concatenation

    const Tensor& value(NodeId id) const;
    std::size_t size() const { return nodes_.size(); }

    /// Gradients of the scalar root with respect to each id in wrt.
    /// Adjoints accumulate in reverse node order, left input before right.
    std::vector<Tensor> backward(NodeId root, const std::vector<NodeId>& wrt) const;

    double cg_tol = 1e-10;

  private:
    struct Node {
        OpKind op;
        std::array<NodeId, 2> in{-1, -1};
        double alpha = 0.0;  // scale factor
        Tensor value;
    };

    NodeId push(Node n);
    void check_id(NodeId id) const;

    std::vector<Node> nodes_;
};

/// Worst scaled relative error between backward() gradients and central finite
/// differences of a scalar expression: |ad - fd| / max(1, |ad|, |fd|).
/// build receives the tape and the leaf ids for the given tensors and must
/// return a scalar root.
double grad_check(
    const std::function<Tape::NodeId(Tape&, const std::vector<Tape::NodeId>&)>& build,
    const std::vector<Tensor>& leaves, double perturbation);

}  // namespace metaenc
