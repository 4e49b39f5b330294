#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "snn/training.hpp"
#include "test_util.hpp"

using namespace snn;
using testutil::make_synthetic_digits;

TEST_CASE("mse spike-count loss") {
    // a = 0, N_out = 4, 10 classes: 16/10
    CHECK(loss_mse_count(std::vector<double>(10, 0.0), 3, 4.0) == doctest::Approx(1.6));
    // exact match
    std::vector<double> a(10, 0.0);
    a[3] = 4.0;
    CHECK(loss_mse_count(a, 3, 4.0) == 0.0);
    // permuting non-label activities leaves the loss unchanged
    std::vector<double> b = {0.5, 1.0, 4.0, 2.0, 0.0, 0.0, 1.5, 0.0, 3.0, 0.25};
    const double base = loss_mse_count(b, 2, 4.0);
    std::swap(b[0], b[9]);
    std::swap(b[3], b[6]);
    CHECK(loss_mse_count(b, 2, 4.0) == doctest::Approx(base));
    CHECK_THROWS_AS(loss_mse_count(b, 10, 4.0), TrainingError);
}

TEST_CASE("cross-entropy activity loss") {
    CHECK(loss_ce_activity(std::vector<double>(10, 1.0), 7) ==
          doctest::Approx(std::log(10.0)).epsilon(1e-9));
    // -ln(e^4 / (e^4 + 9))
    std::vector<double> a(10, 0.0);
    a[0] = 4.0;
    CHECK(loss_ce_activity(a, 0) == doctest::Approx(0.1525866).epsilon(1e-5));
    // loss decreases monotonically as the label activity grows
    double prev = 1e9;
    for (double v = 0.0; v <= 8.0; v += 1.0) {
        std::vector<double> act(10, 1.0);
        act[4] = v;
        const double l = loss_ce_activity(act, 4);
        CHECK(l < prev);
        prev = l;
    }
}

TEST_CASE("encode_batch resamples per tag but reproduces per (seed, tag)") {
    auto ds = make_synthetic_digits(8, 1);
    auto spec = build_preset("shallow");
    std::vector<std::size_t> idx = {0, 1, 2, 3};
    auto a = encode_batch(ds, idx, spec, EncodingKind::Bernoulli, 5, 1, 8);
    auto b = encode_batch(ds, idx, spec, EncodingKind::Bernoulli, 5, 1, 8);
    auto c = encode_batch(ds, idx, spec, EncodingKind::Bernoulli, 5, 2, 8);
    REQUIRE(a.steps.size() == 8);
    bool same_ab = true, same_ac = true;
    for (std::size_t t = 0; t < 8; ++t) {
        same_ab = same_ab && a.steps[t].data == b.steps[t].data;
        same_ac = same_ac && a.steps[t].data == c.steps[t].data;
    }
    CHECK(same_ab);
    CHECK_FALSE(same_ac);

    // analog encoding is shared across tags and stays in [0,1]
    auto d = encode_batch(ds, idx, spec, EncodingKind::ConstantAnalog, 5, 1, 8);
    CHECK(d.is_analog());
    for (float v : d.analog.data) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
    }
}

TEST_CASE("one-batch overfit drives the loss below 10% of its start") {
    auto ds = make_synthetic_digits(32, 3);
    auto spec = build_preset("shallow");
    TrainConfig cfg;
    cfg.epochs = 200;  // one batch per epoch -> 200 iterations
    cfg.batch_size = 32;
    cfg.train_limit = 32;
    cfg.seed = 3;
    cfg.eval_each_epoch = false;
    auto result = train(spec, ds, ds, cfg);
    const double initial = result.metrics.front().train_loss;
    const double final_loss = result.metrics.back().train_loss;
    CHECK(final_loss < 0.1 * initial);
}

TEST_CASE("random-weight network scores chance accuracy on balanced labels") {
    auto ds = make_synthetic_digits(500, 5);
    auto spec = build_preset("shallow");
    auto params = init_params(spec, 1234);
    auto ev = evaluate(spec, params, ds, 8, EncodingKind::Bernoulli, 9, 2);
    CHECK(ev.accuracy > 0.02);
    CHECK(ev.accuracy < 0.25);
}

TEST_CASE("training is reproducible and sensitive to the seed") {
    auto train_ds = make_synthetic_digits(64, 7);
    auto test_ds = make_synthetic_digits(32, 8);
    auto spec = build_preset("shallow");
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 16;
    cfg.seed = 11;
    cfg.eval_each_epoch = false;
    auto a = train(spec, train_ds, test_ds, cfg);
    auto b = train(spec, train_ds, test_ds, cfg);
    for (std::size_t p = 0; p < a.params.tensors.size(); ++p)
        CHECK(a.params.tensors[p].data == b.params.tensors[p].data);  // bit-identical

    cfg.seed = 12;
    auto c = train(spec, train_ds, test_ds, cfg);
    bool any_diff = false;
    for (std::size_t p = 0; p < a.params.tensors.size(); ++p)
        any_diff = any_diff || a.params.tensors[p].data != c.params.tensors[p].data;
    CHECK(any_diff);
}

TEST_CASE("gradients are nonzero after one batch (surrogate keeps them alive)") {
    auto ds = make_synthetic_digits(16, 9);
    auto spec = build_preset("lin-sp-lin-sp");
    auto params = init_params(spec, 21);

    Tape<float> tape;
    std::vector<Var<float>> vars;
    for (const auto& t : params.tensors) vars.push_back(tape.leaf(t));
    std::vector<std::size_t> idx = {0, 1, 2, 3, 4, 5, 6, 7};
    auto input = encode_batch(ds, idx, spec, EncodingKind::Bernoulli, 21, 1, spec.n_steps);
    auto activity = forward_tape(tape, spec, vars, input);
    Tensor<float> targets = Tensor<float>::zeros({8, 10});
    for (std::size_t b = 0; b < 8; ++b) targets.at2(b, ds.label(idx[b])) = 4.0f;
    tape.backward(mse_against(activity, targets));

    // The surrogate keeps gradients alive through the silent hidden layer:
    // the first-layer weights always receive signal. The second-layer weight
    // gradient is s_hidden-weighted and is legitimately zero until the hidden
    // layer starts spiking.
    std::vector<double> norms;
    for (const auto& v : vars) {
        double norm = 0;
        for (float g : v.grad().data) norm += std::abs(g);
        norms.push_back(norm);
    }
    CHECK(norms[0] > 0.0);
    CHECK(*std::max_element(norms.begin(), norms.end()) > 0.0);
}

TEST_CASE("divergence guard") {
    auto params = init_params(build_preset("shallow"), 1);
    CHECK_THROWS_AS(ensure_finite(std::nan(""), params), TrainingError);
    CHECK_THROWS_AS(ensure_finite(INFINITY, params), TrainingError);
    ensure_finite(0.5, params);  // healthy state passes
    params.tensors[0][77] = INFINITY;
    CHECK_THROWS_AS(ensure_finite(0.5, params), TrainingError);
}

TEST_CASE("shallow net learns the synthetic classes and evaluation is deterministic") {
    auto train_ds = make_synthetic_digits(600, 13);
    auto test_ds = make_synthetic_digits(200, 14);
    auto spec = build_preset("shallow");
    TrainConfig cfg;
    cfg.epochs = 4;
    cfg.batch_size = 32;
    cfg.seed = 31;
    cfg.threads = 2;
    cfg.eval_each_epoch = false;
    auto result = train(spec, train_ds, test_ds, cfg);

    auto e1 = evaluate(spec, result.params, test_ds, 8, EncodingKind::Bernoulli, 42, 2);
    auto e2 = evaluate(spec, result.params, test_ds, 8, EncodingKind::Bernoulli, 42, 2);
    CHECK(e1.accuracy == e2.accuracy);
    CHECK(e1.accuracy > 0.85);  // separable synthetic classes

    // evaluating at a different spike-train length than training still works
    auto e16 = evaluate(spec, result.params, test_ds, 16, EncodingKind::Bernoulli, 42, 2);
    CHECK(e16.accuracy > 0.5);

    // repeats report a spread for stochastic encodings
    auto er = evaluate(spec, result.params, test_ds, 8, EncodingKind::Bernoulli, 42, 2, 3);
    CHECK(er.per_repeat.size() == 3);
}

TEST_CASE("zero-target degenerate N_out keeps accuracy near chance") {
    auto train_ds = make_synthetic_digits(300, 15);
    auto test_ds = make_synthetic_digits(200, 16);
    auto spec = build_preset("shallow");
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 32;
    cfg.seed = 33;
    cfg.loss.n_out = 0.0;  // nothing rewards correct-class spikes
    cfg.eval_each_epoch = false;
    auto result = train(spec, train_ds, test_ds, cfg);
    auto ev = evaluate(spec, result.params, test_ds, 8, EncodingKind::Bernoulli, 1, 2);
    CHECK(ev.accuracy < 0.3);
}

TEST_CASE("parallel batches reduce gradients in a fixed order") {
    auto train_ds = make_synthetic_digits(128, 17);
    auto test_ds = make_synthetic_digits(32, 18);
    auto spec = build_preset("shallow");
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 64;
    cfg.seed = 23;
    cfg.threads = 2;
    cfg.eval_each_epoch = false;
    auto a = train(spec, train_ds, test_ds, cfg);
    auto b = train(spec, train_ds, test_ds, cfg);
    for (std::size_t p = 0; p < a.params.tensors.size(); ++p)
        CHECK(a.params.tensors[p].data == b.params.tensors[p].data);
}
