#include "metaenc/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "metaenc/errors.hpp"

namespace metaenc {

namespace {

const char* op_name(OpKind k) {
    switch (k) {
        case OpKind::leaf: return "leaf";
        case OpKind::matmul: return "matmul";
        case OpKind::add: return "add";
        case OpKind::sub: return "sub";
        case OpKind::scale: return "scale";
        case OpKind::hadamard: return "hadamard";
        case OpKind::tanh_op: return "tanh";
        case OpKind::transpose: return "transpose";
        case OpKind::sum: return "sum";
        case OpKind::mse: return "mse";
        case OpKind::sym_solve: return "sym_solve";
        case OpKind::reshape: return "reshape";
        case OpKind::concat: return "concat";
    }
    return "?";
}

void accumulate(Tensor& into, const Tensor& delta, bool& present) {
    if (!present) {
        into = delta;
        present = true;
        return;
    }
    for (std::size_t i = 0; i < into.data.size(); ++i) into.data[i] += delta.data[i];
}

}  // namespace

Tape::NodeId Tape::push(Node n) {
    if (!n.value.all_finite())
        throw NonFiniteError(std::string("tape: non-finite value produced by ") +
                             op_name(n.op));
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

void Tape::check_id(NodeId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
        throw ShapeError("tape: node id " + std::to_string(id) + " not on tape");
}

Tape::NodeId Tape::leaf(Tensor value) {
    return push({OpKind::leaf, {-1, -1}, 0.0, std::move(value)});
}

Tape::NodeId Tape::matmul(NodeId a, NodeId b) {
    check_id(a);
    check_id(b);
    return push({OpKind::matmul, {a, b}, 0.0, kernels::matmul(value(a), value(b))});
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
    check_id(a);
    check_id(b);
    return push({OpKind::add, {a, b}, 0.0, kernels::add(value(a), value(b))});
}

Tape::NodeId Tape::sub(NodeId a, NodeId b) {
    check_id(a);
    check_id(b);
    return push({OpKind::sub, {a, b}, 0.0, kernels::sub(value(a), value(b))});
}

Tape::NodeId Tape::scale(NodeId a, double alpha) {
    check_id(a);
    return push({OpKind::scale, {a, -1}, alpha, kernels::scale(value(a), alpha)});
}

Tape::NodeId Tape::hadamard(NodeId a, NodeId b) {
    check_id(a);
    check_id(b);
    return push({OpKind::hadamard, {a, b}, 0.0, kernels::hadamard(value(a), value(b))});
}

Tape::NodeId Tape::tanh(NodeId a) {
    check_id(a);
    return push({OpKind::tanh_op, {a, -1}, 0.0, kernels::tanh_map(value(a))});
}

Tape::NodeId Tape::transpose(NodeId a) {
    check_id(a);
    return push({OpKind::transpose, {a, -1}, 0.0, kernels::transpose(value(a))});
}

Tape::NodeId Tape::sum(NodeId a) {
    check_id(a);
    return push({OpKind::sum, {a, -1}, 0.0, kernels::sum(value(a))});
}

Tape::NodeId Tape::mse(NodeId a, NodeId b) {
    check_id(a);
    check_id(b);
    return push({OpKind::mse, {a, b}, 0.0, kernels::mse(value(a), value(b))});
}

Tape::NodeId Tape::sym_solve(NodeId a, NodeId b) {
    check_id(a);
    check_id(b);
    return push({OpKind::sym_solve, {a, b}, 0.0,
                 kernels::cg_solve(value(a), value(b), cg_tol)});
}

Tape::NodeId Tape::reshape(NodeId a, std::vector<std::size_t> new_shape) {
    check_id(a);
    Tensor v(std::move(new_shape), value(a).data);
    return push({OpKind::reshape, {a, -1}, 0.0, std::move(v)});
}

Tape::NodeId Tape::concat(NodeId a, NodeId b) {
    check_id(a);
    check_id(b);
    const Tensor& va = value(a);
    const Tensor& vb = value(b);
    if (va.rank() != 1 || vb.rank() != 1)
        throw ShapeError("concat: rank-1 operands expected, got " + va.shape_str() +
                         " and " + vb.shape_str());
    std::vector<double> d = va.data;
    d.insert(d.end(), vb.data.begin(), vb.data.end());
    return push({OpKind::concat, {a, b}, 0.0, Tensor::vector(std::move(d))});
}

const Tensor& Tape::value(NodeId id) const {
    check_id(id);
    return nodes_[static_cast<std::size_t>(id)].value;
}

std::vector<Tensor> Tape::backward(NodeId root, const std::vector<NodeId>& wrt) const {
    check_id(root);
    for (NodeId id : wrt) check_id(id);
    if (value(root).numel() != 1)
        throw ShapeError("backward: root must be scalar, got shape " +
                         value(root).shape_str());

    std::vector<Tensor> adj(nodes_.size());
    std::vector<bool> has(nodes_.size(), false);
    adj[static_cast<std::size_t>(root)] = Tensor(value(root).shape, {1.0});
    has[static_cast<std::size_t>(root)] = true;

    auto acc = [&](NodeId target, const Tensor& delta) {
        const std::size_t t = static_cast<std::size_t>(target);
        bool present = has[t];
        accumulate(adj[t], delta, present);
        has[t] = present;
    };

    for (NodeId id = root; id >= 0; --id) {
        const std::size_t i = static_cast<std::size_t>(id);
        if (!has[i]) continue;
        const Node& n = nodes_[i];
        const Tensor& ybar = adj[i];
        switch (n.op) {
            case OpKind::leaf:
                break;
            case OpKind::matmul: {
                const Tensor& a = nodes_[n.in[0]].value;
                const Tensor& b = nodes_[n.in[1]].value;
                const std::size_t m = a.rows(), k = a.cols();
                if (b.rank() == 1) {
                    Tensor abar = Tensor::zeros(a.shape);
                    Tensor bbar = Tensor::zeros(b.shape);
                    for (std::size_t r = 0; r < m; ++r)
                        for (std::size_t p = 0; p < k; ++p)
                            abar(r, p) = ybar(r) * b(p);
                    for (std::size_t p = 0; p < k; ++p) {
                        double s = 0.0;
                        for (std::size_t r = 0; r < m; ++r) s += a(r, p) * ybar(r);
                        bbar(p) = s;
                    }
                    acc(n.in[0], abar);
                    acc(n.in[1], bbar);
                } else {
                    acc(n.in[0], kernels::matmul(ybar, kernels::transpose(b)));
                    acc(n.in[1], kernels::matmul(kernels::transpose(a), ybar));
                }
                break;
            }
            case OpKind::add:
                acc(n.in[0], ybar);
                acc(n.in[1], ybar);
                break;
            case OpKind::sub:
                acc(n.in[0], ybar);
                acc(n.in[1], kernels::scale(ybar, -1.0));
                break;
            case OpKind::scale:
                acc(n.in[0], kernels::scale(ybar, n.alpha));
                break;
            case OpKind::hadamard:
                acc(n.in[0], kernels::hadamard(ybar, nodes_[n.in[1]].value));
                acc(n.in[1], kernels::hadamard(ybar, nodes_[n.in[0]].value));
                break;
            case OpKind::tanh_op: {
                Tensor d = n.value;  // 1 - tanh^2, reusing the cached output
                for (double& v : d.data) v = 1.0 - v * v;
                acc(n.in[0], kernels::hadamard(ybar, d));
                break;
            }
            case OpKind::transpose:
                acc(n.in[0], kernels::transpose(ybar));
                break;
            case OpKind::sum: {
                Tensor d = Tensor::ones(nodes_[n.in[0]].value.shape);
                acc(n.in[0], kernels::scale(d, ybar.data[0]));
                break;
            }
            case OpKind::mse: {
                const Tensor& a = nodes_[n.in[0]].value;
                const Tensor& b = nodes_[n.in[1]].value;
                const double c = 2.0 * ybar.data[0] / static_cast<double>(a.numel());
                Tensor d = kernels::scale(kernels::sub(a, b), c);
                acc(n.in[0], d);
                acc(n.in[1], kernels::scale(d, -1.0));
                break;
            }
            case OpKind::sym_solve: {
                // Implicit adjoint: bbar = A^{-1} ybar, Abar = -sym(bbar y^T).
                const Tensor& a = nodes_[n.in[0]].value;
                const Tensor& y = n.value;
                Tensor bbar = kernels::cg_solve(a, ybar, cg_tol);
                const std::size_t m = y.numel();
                Tensor abar = Tensor::zeros({m, m});
                for (std::size_t r = 0; r < m; ++r)
                    for (std::size_t c2 = 0; c2 < m; ++c2)
                        abar(r, c2) = -0.5 * (bbar(r) * y(c2) + y(r) * bbar(c2));
                acc(n.in[0], abar);
                acc(n.in[1], bbar);
                break;
            }
            case OpKind::reshape: {
                Tensor d(nodes_[n.in[0]].value.shape, ybar.data);
                acc(n.in[0], d);
                break;
            }
            case OpKind::concat: {
                const std::size_t la = nodes_[n.in[0]].value.numel();
                const std::size_t lb = nodes_[n.in[1]].value.numel();
                Tensor da = Tensor::vector(
                    std::vector<double>(ybar.data.begin(), ybar.data.begin() + la));
                Tensor db = Tensor::vector(
                    std::vector<double>(ybar.data.begin() + la,
                                        ybar.data.begin() + la + lb));
                acc(n.in[0], da);
                acc(n.in[1], db);
                break;
            }
        }
    }

    std::vector<Tensor> out;
    out.reserve(wrt.size());
    for (NodeId id : wrt) {
        const std::size_t i = static_cast<std::size_t>(id);
        out.push_back(has[i] ? adj[i] : Tensor::zeros(nodes_[i].value.shape));
    }
    return out;
}

double grad_check(
    const std::function<Tape::NodeId(Tape&, const std::vector<Tape::NodeId>&)>& build,
    const std::vector<Tensor>& leaves, double perturbation) {
    if (perturbation < 1e-8 || perturbation > 1e-4)
        throw ConfigError("grad_check: perturbation must lie in [1e-8, 1e-4]");

    Tape tape;
    std::vector<Tape::NodeId> ids;
    ids.reserve(leaves.size());
    for (const Tensor& l : leaves) ids.push_back(tape.leaf(l));
    const Tape::NodeId root = build(tape, ids);
    std::vector<Tensor> grads = tape.backward(root, ids);

    auto eval_at = [&](const std::vector<Tensor>& pts) {
        Tape t;
        std::vector<Tape::NodeId> lid;
        for (const Tensor& l : pts) lid.push_back(t.leaf(l));
        return t.value(build(t, lid)).data[0];
    };

    double worst = 0.0;
    for (std::size_t li = 0; li < leaves.size(); ++li) {
        for (std::size_t e = 0; e < leaves[li].numel(); ++e) {
            std::vector<Tensor> pts = leaves;
            pts[li].data[e] += perturbation;
            const double fp = eval_at(pts);
            pts[li].data[e] -= 2.0 * perturbation;
            const double fm = eval_at(pts);
            const double fd = (fp - fm) / (2.0 * perturbation);
            const double ad = grads[li].data[e];
            const double err =
                std::abs(ad - fd) / std::max({1.0, std::abs(ad), std::abs(fd)});
            worst = std::max(worst, err);
        }
    }
    return worst;
}

}  // namespace metaenc
