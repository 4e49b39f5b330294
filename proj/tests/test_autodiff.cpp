#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "snn/autodiff.hpp"
#include "snn/coarse_lif.hpp"
#include "test_util.hpp"

using namespace snn;
using testutil::grad_check;
using testutil::random_tensor;

TEST_CASE("matmul identity and orthogonal cases") {
    Tape<double> tape;
    auto eye = tape.leaf(Tensor<double>({2, 2}, {1, 0, 0, 1}));
    auto m = tape.leaf(Tensor<double>({2, 2}, {1, 2, 3, 4}));
    auto prod = matmul(eye, m);
    CHECK(prod.value().data == std::vector<double>{1, 2, 3, 4});

    auto a = tape.leaf(Tensor<double>({1, 2}, {1, 0}));
    auto b = tape.leaf(Tensor<double>({2, 1}, {0, 5}));
    CHECK(matmul(a, b).value()[0] == 0.0);
}

TEST_CASE("matmul shape error names both shapes") {
    Tape<double> tape;
    auto a = tape.leaf(Tensor<double>::zeros({2, 3}));
    auto b = tape.leaf(Tensor<double>::zeros({2, 3}));
    CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("[2x3]"), ShapeError);
}

TEST_CASE("matmul gradients match central finite differences") {
    Rng rng(42);
    auto res = grad_check(
        [](Tape<double>& t, std::vector<Var<double>>& v) {
            // weight the entries so every Jacobian row is exercised
            auto prod = matmul(v[0], v[1]);
            return sum(mul(prod, t.leaf(Tensor<double>({3, 2}, {0.3, -1.1, 0.7, 2.0, -0.4, 1.3}))));
        },
        {random_tensor({3, 4}, rng), random_tensor({4, 2}, rng)});
    CHECK(res.max_abs_err < 1e-6);
}

TEST_CASE("linear matches matmul with transposed weights and checks gradients") {
    Rng rng(7);
    Tensor<double> x = random_tensor({5, 3}, rng);
    Tensor<double> w = random_tensor({4, 3}, rng);
    Tensor<double> b = random_tensor({4}, rng);
    Rng wrng(3);
    const Tensor<double> mix = random_tensor({5, 4}, wrng);
    auto res = grad_check(
        [&mix](Tape<double>& t, std::vector<Var<double>>& v) {
            auto y = linear(v[0], v[1], &v[2]);
            return sum(mul(y, t.leaf(mix)));
        },
        {x, w, b});
    CHECK(res.max_abs_err < 1e-6);
}

TEST_CASE("conv2d shapes from the architecture") {
    Tape<double> tape;
    auto x = tape.leaf(Tensor<double>::zeros({1, 28, 28}));
    auto k = tape.leaf(Tensor<double>::zeros({4, 1, 5, 5}));
    auto y = conv2d(x, k, 2, 2);
    CHECK(y.value().shape == Shape{4, 14, 14});  // 784 spiking neurons
    CHECK(shape_size(y.value().shape) == 784);

    // all-zero input stays zero
    for (double v : y.value().data) CHECK(v == 0.0);

    auto ones = tape.leaf(Tensor<double>::full({1, 3, 3}, 1.0));
    auto kones = tape.leaf(Tensor<double>::full({1, 1, 3, 3}, 1.0));
    CHECK(conv2d(ones, kones, 1, 0).value()[0] == 9.0);
}

TEST_CASE("conv2d rejects bad geometry") {
    Tape<double> tape;
    auto x = tape.leaf(Tensor<double>::zeros({1, 4, 4}));
    auto k = tape.leaf(Tensor<double>::zeros({1, 1, 3, 3}));
    CHECK_THROWS_AS(conv2d(x, k, 0, 0), AutodiffError);
    auto kbig = tape.leaf(Tensor<double>::zeros({1, 1, 7, 7}));
    CHECK_THROWS_AS(conv2d(x, kbig, 1, 1), AutodiffError);
}

TEST_CASE("conv2d gradients match finite differences (stride 2, padding 2)") {
    Rng rng(11);
    auto res = grad_check(
        [](Tape<double>& t, std::vector<Var<double>>& v) {
            auto y = conv2d<double>(v[0], v[1], &v[2], 2, 2);
            Rng wrng(5);
            return sum(mul(y, t.leaf(testutil::random_tensor(y.value().shape, wrng))));
        },
        {random_tensor({2, 6, 6}, rng), random_tensor({3, 2, 5, 5}, rng),
         random_tensor({3}, rng)});
    CHECK(res.max_abs_err < 1e-6);
}

TEST_CASE("maxpool2d forward examples") {
    Tape<double> tape;
    auto x = tape.leaf(Tensor<double>({1, 2, 2}, {1, 2, 3, 4}));
    auto y = maxpool2d(x, 2, 2);
    CHECK(y.value().data == std::vector<double>{4});

    // binary plane stays binary
    auto bits = tape.leaf(Tensor<double>({1, 4, 4}, {0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 1, 1,
                                                     0, 0, 0, 0}));
    auto pooled = maxpool2d(bits, 2, 2);
    for (double v : pooled.value().data) CHECK((v == 0.0 || v == 1.0));

    auto xsmall = tape.leaf(Tensor<double>::zeros({1, 2, 2}));
    CHECK_THROWS_AS(maxpool2d(xsmall, 3, 1), AutodiffError);
}

TEST_CASE("maxpool2d gradients match finite differences") {
    Rng rng(13);
    auto res = grad_check(
        [](Tape<double>& t, std::vector<Var<double>>& v) {
            auto y = maxpool2d(v[0], 2, 2);
            Rng wrng(9);
            return sum(mul(y, t.leaf(testutil::random_tensor(y.value().shape, wrng))));
        },
        {random_tensor({1, 4, 4}, rng)});
    CHECK(res.max_abs_err < 1e-6);
}

TEST_CASE("hard_soft forward is the binary step, backward the logistic bump") {
    Tape<double> tape;
    auto x = tape.leaf(Tensor<double>({3}, {0.3, 0.0, -10.0}));
    auto s = hard_soft(x, SurrogateParams{3.0});
    CHECK(s.value()[0] == 1.0);
    CHECK(s.value()[1] == 1.0);  // spike exactly at threshold
    CHECK(s.value()[2] == 0.0);

    tape.backward(sum(s));
    CHECK(x.grad()[1] == doctest::Approx(0.75));  // beta/4 at x = 0
    CHECK(x.grad()[2] == doctest::Approx(3.0 * 9.357622969e-14).epsilon(1e-3));

    // backward factor is strictly positive and maximal at 0
    CHECK(x.grad()[0] > 0.0);
    CHECK(x.grad()[0] < x.grad()[1]);
    CHECK(x.grad()[2] < x.grad()[0]);
}

TEST_CASE("hard_soft output is exactly binary") {
    Rng rng(3);
    Tape<double> tape;
    auto x = tape.leaf(random_tensor({100}, rng, 2.0));
    auto s = hard_soft(x, SurrogateParams{2.0});
    for (double v : s.value().data) CHECK((v == 0.0 || v == 1.0));
}

TEST_CASE("logistic op gradients (the relaxation used by the oracles)") {
    Rng rng(17);
    auto res = grad_check(
        [](Tape<double>&, std::vector<Var<double>>& v) {
            return sum(logistic(v[0], 3.0));
        },
        {random_tensor({10}, rng)});
    CHECK(res.max_abs_err < 1e-6);
}

TEST_CASE("backward of sum gives all-ones; mse at the minimum gives zeros") {
    Tape<double> tape;
    Rng rng(23);
    auto x = tape.leaf(random_tensor({3, 4}, rng));
    tape.backward(sum(x));
    for (double g : x.grad().data) CHECK(g == 1.0);

    Tape<double> tape2;
    Tensor<double> v = random_tensor({5}, rng);
    auto y = tape2.leaf(v);
    tape2.backward(mse_against(y, v));
    for (double g : y.grad().data) CHECK(g == 0.0);
}

TEST_CASE("backward rejects non-scalar roots") {
    Tape<double> tape;
    auto x = tape.leaf(Tensor<double>::zeros({2, 2}));
    CHECK_THROWS_AS(tape.backward(x), AutodiffError);
}

TEST_CASE("two backward calls accumulate exactly twice; zero_grad resets") {
    Rng rng(31);
    Tape<double> tape;
    auto x = tape.leaf(random_tensor({4, 4}, rng));
    auto w = tape.leaf(random_tensor({4, 4}, rng));
    auto loss = sum(mul(matmul(x, w), matmul(x, w)));
    tape.backward(loss);
    const Tensor<double> once = x.grad();
    tape.backward(loss);
    for (std::size_t i = 0; i < once.size(); ++i)
        CHECK(x.grad()[i] == doctest::Approx(2.0 * once[i]).epsilon(1e-12));
    tape.zero_grad();
    for (double g : x.grad().data) CHECK(g == 0.0);
    for (double g : w.grad().data) CHECK(g == 0.0);
}

TEST_CASE("loss ops match finite differences") {
    Rng rng(37);
    SUBCASE("mse") {
        Tensor<double> target = random_tensor({4, 3}, rng);
        auto res = grad_check(
            [target](Tape<double>&, std::vector<Var<double>>& v) {
                return mse_against(v[0], target);
            },
            {random_tensor({4, 3}, rng)});
        CHECK(res.max_abs_err < 1e-6);
    }
    SUBCASE("softmax cross-entropy") {
        auto res = grad_check(
            [](Tape<double>&, std::vector<Var<double>>& v) {
                return softmax_cross_entropy(v[0], {2, 0, 1});
            },
            {random_tensor({3, 4}, rng)});
        CHECK(res.max_abs_err < 1e-6);
    }
    SUBCASE("two-action nll") {
        auto res = grad_check(
            [](Tape<double>&, std::vector<Var<double>>& v) {
                return two_action_nll(v[0], {0, 1, 1, 0}, 1.0, 4.0);
            },
            {random_tensor({4, 2}, rng, 2.0)});
        CHECK(res.max_abs_err < 1e-6);
    }
}

// The end-to-end oracle: a 2-layer, 4-step spiking network with every
// Heaviside replaced by its logistic relaxation is smooth, so tape gradients
// must match finite differences through the whole unrolled recurrence.
TEST_CASE("relaxed 2-layer 4-step network matches finite differences") {
    Rng rng(41);
    const std::size_t in = 6, hid = 5, out = 3, steps = 4;
    CoarseCellParams cell;
    cell.ratio = 2.0;
    cell.surrogate.beta = 3.0;

    std::vector<Tensor<double>> input_steps;
    for (std::size_t t = 0; t < steps; ++t) {
        Tensor<double> x = Tensor<double>::zeros({2, in});
        for (auto& v : x.data) v = rng.bernoulli(0.4) ? 1.0 : 0.0;
        input_steps.push_back(x);
    }
    Tensor<double> target = Tensor<double>::zeros({2, out});
    target.at2(0, 1) = 4.0;
    target.at2(1, 2) = 4.0;

    auto build = [&](Tape<double>& tape, std::vector<Var<double>>& v) {
        CellVars<double> h = cell_init_tape(tape, Shape{2, hid});
        CellVars<double> o = cell_init_tape(tape, Shape{2, out});
        Var<double> activity{};
        bool first = true;
        for (std::size_t t = 0; t < steps; ++t) {
            auto x = tape.leaf(input_steps[t]);
            auto z1 = affine(linear(x, v[0]), cell.ratio, 0.0);
            h = step_cell_tape(cell, h, z1, /*relaxed=*/true);
            auto z2 = affine(linear(h.s, v[1]), cell.ratio, 0.0);
            o = step_cell_tape(cell, o, z2, /*relaxed=*/true);
            activity = first ? o.s : add(activity, o.s);
            first = false;
        }
        return mse_against(activity, target);
    };
    auto res = grad_check(build, {random_tensor({hid, in}, rng, 0.5),
                                  random_tensor({out, hid}, rng, 0.5)});
    CHECK(res.max_rel_err < 1e-4);
}
