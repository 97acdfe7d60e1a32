#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>

#include "metaenc/errors.hpp"
#include "metaenc/tape.hpp"
#include "test_util.hpp"

using namespace metaenc;
using testutil::random_spd;
using testutil::random_tensor;

TEST_CASE("matmul forward") {
    Tape t;
    auto a = t.leaf(Tensor({2, 2}, {1, 2, 3, 4}));
    auto x = t.leaf(Tensor::vector({1, 1}));
    auto y = t.matmul(a, x);
    CHECK(t.value(y).data == std::vector<double>{3, 7});
}

TEST_CASE("tanh of zeros is zeros") {
    Tape t;
    auto y = t.tanh(t.leaf(Tensor::zeros({3})));
    CHECK(t.value(y).data == std::vector<double>{0, 0, 0});
}

TEST_CASE("mse forward") {
    Tape t;
    auto y = t.mse(t.leaf(Tensor::vector({1, 2})), t.leaf(Tensor::vector({0, 0})));
    CHECK(t.value(y).data[0] == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("backward of mse against zero returns the input") {
    Tape t;
    auto x = t.leaf(Tensor::vector({1, 2}));
    auto root = t.mse(x, t.leaf(Tensor::zeros({2})));
    auto g = t.backward(root, {x});
    CHECK(g[0].data == std::vector<double>{1, 2});
}

TEST_CASE("backward of sum(tanh) at zero is ones") {
    Tape t;
    auto x = t.leaf(Tensor::zeros({4}));
    auto g = t.backward(t.sum(t.tanh(x)), {x});
    CHECK(g[0].data == std::vector<double>{1, 1, 1, 1});
}

TEST_CASE("sym_solve forward examples") {
    Tape t;
    auto y1 = t.sym_solve(t.leaf(Tensor({2, 2}, {2, 0, 0, 2})),
                          t.leaf(Tensor::vector({2, 4})));
    CHECK(t.value(y1)(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(t.value(y1)(1) == doctest::Approx(2.0).epsilon(1e-12));

    auto b = Tensor::vector({0.3, -1.2, 2.5});
    auto y2 = t.sym_solve(t.leaf(Tensor::identity(3)), t.leaf(b));
    CHECK(testutil::max_abs_diff(t.value(y2), b) < 1e-12);

    // 2x2 inverse oracle: A=[[2,1],[1,2]], b=[1,0] -> (1/3)[2,-1]
    auto y3 = t.sym_solve(t.leaf(Tensor({2, 2}, {2, 1, 1, 2})),
                          t.leaf(Tensor::vector({1, 0})));
    CHECK(t.value(y3)(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(t.value(y3)(1) == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("sym_solve gradient wrt rhs matches the finite-difference oracle") {
    // root = sum(solve(A,b)) at A=2I, b=[2,4]
    const Tensor a({2, 2}, {2, 0, 0, 2});
    const Tensor b = Tensor::vector({2, 4});
    auto build = [&](Tape& t, const std::vector<Tape::NodeId>& leaves) {
        return t.sum(t.sym_solve(t.leaf(a), leaves[0]));
    };
    Tape t;
    auto bl = t.leaf(b);
    auto root = t.sum(t.sym_solve(t.leaf(a), bl));
    auto g = t.backward(root, {bl});
    CHECK(g[0](0) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(g[0](1) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(grad_check(build, {b}, 1e-6) < 1e-8);
}

TEST_CASE("every primitive VJP agrees with central finite differences") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        // expression touching every differentiable primitive kind
        Tensor a = random_tensor(rng, {3, 4});
        Tensor b = random_tensor(rng, {4, 2});
        Tensor c = random_tensor(rng, {3, 2});
        Tensor d = random_tensor(rng, {6});
        Tensor spd = random_spd(rng, 3);
        Tensor rhs = random_tensor(rng, {3});
        auto expr = [](Tape& t, const std::vector<Tape::NodeId>& l) {
            auto prod = t.matmul(l[0], l[1]);
            auto mix = t.hadamard(t.tanh(prod), l[2]);
            auto tr = t.transpose(mix);
            auto flat = t.reshape(tr, {6});
            auto both = t.concat(flat, l[3]);
            auto scaled = t.add(t.scale(both, 0.7), both);
            auto diff = t.sub(scaled, both);
            auto sol = t.sym_solve(l[4], l[5]);
            auto joined = t.concat(diff, sol);
            return t.add(t.sum(joined), t.mse(flat, l[3]));
        };
        CHECK(grad_check(expr, {a, b, c, d, spd, rhs}, 1e-6) < 1e-6);
    }
}

TEST_CASE("grad_check on an affine expression is near-exact") {
    std::mt19937_64 rng(5);
    Tensor a = random_tensor(rng, {3, 3});
    Tensor x = random_tensor(rng, {3});
    Tensor b = random_tensor(rng, {3});
    auto expr = [](Tape& t, const std::vector<Tape::NodeId>& l) {
        return t.sum(t.add(t.matmul(l[0], l[1]), l[2]));
    };
    CHECK(grad_check(expr, {a, x, b}, 1e-6) < 1e-8);
}

TEST_CASE("sym_solve residual contract on random SPD systems") {
    std::mt19937_64 rng(23);
    for (std::size_t m : {2, 5, 16, 33, 64}) {
        for (int trial = 0; trial < 10; ++trial) {
            Tensor a = random_spd(rng, m);
            Tensor b = random_tensor(rng, {m});
            Tensor y = kernels::cg_solve(a, b);
            Tensor resid = kernels::sub(kernels::matmul(a, y), b);
            CHECK(kernels::norm2(resid) <=
                  1e-10 * std::max(1.0, kernels::norm2(b)) * 1.0000001);
        }
    }
}

TEST_CASE("adjoint linearity: sum of independent subgraphs") {
    std::mt19937_64 rng(31);
    Tensor x = random_tensor(rng, {5});
    Tensor y = random_tensor(rng, {5});

    Tape t;
    auto xl = t.leaf(x);
    auto yl = t.leaf(y);
    auto joint = t.add(t.sum(t.tanh(xl)), t.mse(yl, t.leaf(Tensor::zeros({5}))));
    auto g_joint = t.backward(joint, {xl, yl});

    Tape t1;
    auto x1 = t1.leaf(x);
    auto g1 = t1.backward(t1.sum(t1.tanh(x1)), {x1});
    Tape t2;
    auto y2 = t2.leaf(y);
    auto g2 = t2.backward(t2.mse(y2, t2.leaf(Tensor::zeros({5}))), {y2});

    CHECK(g_joint[0].data == g1[0].data);
    CHECK(g_joint[1].data == g2[0].data);
}

TEST_CASE("tape replay determinism") {
    std::mt19937_64 rng(7);
    Tensor a = random_tensor(rng, {4, 4});
    Tensor x = random_tensor(rng, {4});
    auto run = [&]() {
        Tape t;
        auto root = t.mse(t.tanh(t.matmul(t.leaf(a), t.leaf(x))), t.leaf(Tensor::zeros({4})));
        return t.value(root).data[0];
    };
    CHECK(run() == run());
}

TEST_CASE("error paths") {
    Tape t;
    auto a = t.leaf(Tensor({2, 3}, {1, 2, 3, 4, 5, 6}));
    auto x = t.leaf(Tensor::vector({1, 1}));
    CHECK_THROWS_AS(t.matmul(a, x), ShapeError);
    CHECK_THROWS_WITH_AS(t.add(a, x), doctest::Contains("add"), ShapeError);

    auto vec = t.leaf(Tensor::vector({1, 2}));
    CHECK_THROWS_AS(t.backward(vec, {vec}), ShapeError);  // non-scalar root

    auto root = t.sum(vec);
    CHECK_THROWS_AS(t.backward(root, {999}), ShapeError);  // leaf not on tape

    auto indef = t.leaf(Tensor({2, 2}, {1, 0, 0, -1}));
    CHECK_THROWS_AS(t.sym_solve(indef, vec), NonSpdError);
    auto asym = t.leaf(Tensor({2, 2}, {1, 2, 0, 1}));
    CHECK_THROWS_AS(t.sym_solve(asym, vec), NonSpdError);

    Tensor bad = Tensor::vector({1.0});
    bad.data[0] = std::numeric_limits<double>::infinity();
    Tape t2;
    CHECK_THROWS_AS(t2.leaf(bad), NonFiniteError);
}

TEST_CASE("grad_check rejects out-of-range perturbations") {
    auto expr = [](Tape& t, const std::vector<Tape::NodeId>& l) { return t.sum(l[0]); };
    CHECK_THROWS_AS(grad_check(expr, {Tensor::vector({1.0})}, 1e-9), ConfigError);
    CHECK_THROWS_AS(grad_check(expr, {Tensor::vector({1.0})}, 1e-3), ConfigError);
}
