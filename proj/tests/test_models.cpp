#include <cmath>
#include <cstdio>
#include <fstream>

#include "common.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "rtlab/models.hpp"

using namespace rtlab;
using namespace rtlab::testing;

namespace {

FeatureVector random_features(Rng& rng) {
    FeatureVector f{};
    for (double& v : f) v = rng.uniform() * 10.0 - 5.0;
    return f;
}

TrainBatch random_batch(Rng& rng, std::size_t n) {
    TrainBatch batch;
    for (std::size_t i = 0; i < n; ++i) {
        batch.inputs.push_back(random_features(rng));
        Scores t{};
        t[rng.uniform_index(9)] = 1.0;
        batch.targets.push_back(t);
    }
    return batch;
}

}  // namespace

TEST_CASE("mlp_init: bounds, zero biases, seed determinism") {
    Rng r1(5), r2(5), r3(6);
    const Mlp a = mlp_init(r1), b = mlp_init(r2), c = mlp_init(r3);
    CHECK(a == b);
    CHECK(a != c);
    const double bound1 = 1.0 / std::sqrt(15.0), bound2 = 1.0 / std::sqrt(64.0);
    for (double w : a.w1) {
        CHECK(w >= -bound1);
        CHECK(w <= bound1);
    }
    for (double w : a.w2) {
        CHECK(w >= -bound2);
        CHECK(w <= bound2);
    }
    for (double w : a.w3) {
        CHECK(w >= -bound2);
        CHECK(w <= bound2);
    }
    for (double v : a.b1) CHECK(v == 0.0);
    for (double v : a.b2) CHECK(v == 0.0);
    for (double v : a.b3) CHECK(v == 0.0);
    CHECK(a.w1.size() == 64 * 15);
    CHECK(a.w2.size() == 64 * 64);
    CHECK(a.w3.size() == 9 * 64);
}

TEST_CASE("mlp_forward basics") {
    Rng rng(1);
    const Mlp mlp = mlp_init(rng);
    const FeatureVector f = random_features(rng);
    const Scores s = mlp_forward(mlp, f);
    for (double v : s) CHECK(std::isfinite(v));
    CHECK(mlp_forward(mlp, f) == s);

    Mlp zero = mlp;
    std::fill(zero.w1.begin(), zero.w1.end(), 0.0);
    std::fill(zero.w2.begin(), zero.w2.end(), 0.0);
    std::fill(zero.w3.begin(), zero.w3.end(), 0.0);
    for (double v : mlp_forward(zero, f)) CHECK(v == 0.0);

    // Linear output layer: doubling w3 and b3 doubles the scores.
    Mlp twice = mlp;
    for (double& w : twice.w3) w *= 2.0;
    for (double& w : twice.b3) w *= 2.0;
    const Scores d = mlp_forward(twice, f);
    for (int i = 0; i < 9; ++i) CHECK(d[i] == doctest::Approx(2.0 * s[i]));

    FeatureVector bad = f;
    bad[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS(mlp_forward(mlp, bad));
}

TEST_CASE("mlp_loss is the batch mean of summed squared errors") {
    Rng rng(2);
    Mlp mlp = mlp_init(rng);
    TrainBatch batch;
    batch.inputs.push_back(random_features(rng));
    batch.targets.push_back(mlp_forward(mlp, batch.inputs[0]));
    CHECK(mlp_loss(mlp, batch) == doctest::Approx(0.0));

    Scores off = batch.targets[0];
    for (double& v : off) v += 1.0;  // each of 9 outputs off by 1
    batch.targets[0] = off;
    CHECK(mlp_loss(mlp, batch) == doctest::Approx(9.0));

    batch.inputs.push_back(batch.inputs[0]);
    batch.targets.push_back(mlp_forward(mlp, batch.inputs[0]));
    CHECK(mlp_loss(mlp, batch) == doctest::Approx(4.5));
}

TEST_CASE("analytic gradients match central finite differences") {
    Rng rng(3);
    Mlp mlp = mlp_init(rng);
    const TrainBatch batch = random_batch(rng, 4);
    const MlpGradient g = mlp_gradient(mlp, batch);
    const auto loss = [&] { return mlp_loss(mlp, batch); };

    const auto check_block = [&](std::vector<double>& params, const std::vector<double>& grad,
                                 std::size_t stride) {
        REQUIRE(params.size() == grad.size());
        for (std::size_t i = 0; i < params.size(); i += stride) {
            const double fd = finite_difference(loss, &params[i]);
            CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-4).scale(1.0));
        }
    };
    check_block(mlp.w1, g.w1, 37);
    check_block(mlp.b1, g.b1, 7);
    check_block(mlp.w2, g.w2, 211);
    check_block(mlp.b2, g.b2, 9);
    check_block(mlp.w3, g.w3, 29);
    check_block(mlp.b3, g.b3, 1);
}

TEST_CASE("mlp_train_batch reduces loss and is a plain SGD step") {
    Rng rng(4);
    Mlp mlp = mlp_init(rng);
    const TrainBatch batch = random_batch(rng, 8);
    const double before = mlp_loss(mlp, batch);
    double reported = 0.0;
    for (int i = 0; i < 200; ++i) reported = mlp_train_batch(mlp, batch, 1e-2);
    const double after = mlp_loss(mlp, batch);
    CHECK(after < before);
    CHECK(reported >= after);  // the returned value is the pre-update loss

    // Perfect targets: gradient is zero, parameters stay put.
    TrainBatch fixed;
    fixed.inputs.push_back(random_features(rng));
    fixed.targets.push_back(mlp_forward(mlp, fixed.inputs[0]));
    const Mlp saved = mlp;
    CHECK(mlp_train_batch(mlp, fixed, 1e-2) == doctest::Approx(0.0));
    CHECK(mlp == saved);
}

TEST_CASE("greedy_action takes the argmax with canonical tie-breaking") {
    Scores s{};
    s[4] = 2.0;
    CHECK(greedy_action(s) == Action{0, 0});
    Scores tie{};
    CHECK(greedy_action(tie) == Action{-1, -1});
    Scores two{};
    two[3] = 1.0;
    two[7] = 1.0;
    CHECK(greedy_action(two) == Action{0, -1});  // index 3 precedes index 7
    Scores neg;
    neg.fill(-5.0);
    neg[8] = -1.0;
    CHECK(greedy_action(neg) == Action{1, 1});
}

TEST_CASE("linear_fit separates a synthetic two-class problem") {
    Rng rng(6);
    std::vector<std::pair<FeatureVector, int>> data;
    for (int i = 0; i < 200; ++i) {
        FeatureVector f{};
        const int label = i % 2 == 0 ? 2 : 7;
        f[0] = (label == 2 ? 1.0 : -1.0) + (rng.uniform() - 0.5) * 0.2;
        f[5] = (label == 2 ? -0.5 : 0.5) + (rng.uniform() - 0.5) * 0.2;
        for (int k = 1; k < 15; ++k)
            if (k != 5) f[k] = (rng.uniform() - 0.5) * 0.1;
        data.push_back({f, label});
    }
    for (const LinearKind kind : {LinearKind::Lda, LinearKind::LogisticRegression}) {
        const LinearModel model = linear_fit(kind, data);
        int correct = 0;
        for (const auto& [f, label] : data)
            if (action_index(linear_predict(model, f)) == label) ++correct;
        CAPTURE(static_cast<int>(kind));
        CHECK(correct >= 198);
        // Unseen classes never win the argmax.
        for (const auto& [f, label] : data) {
            const int pred = action_index(linear_predict(model, f));
            CHECK((pred == 2 || pred == 7));
        }
    }
}

TEST_CASE("linear_fit handles degenerate inputs") {
    std::vector<std::pair<FeatureVector, int>> one;
    FeatureVector f{};
    f[0] = 1.0;
    one.push_back({f, 3});
    one.push_back({f, 3});
    CHECK_THROWS_AS(linear_fit(LinearKind::Lda, one), InsufficientClasses);
    CHECK_THROWS_AS(linear_fit(LinearKind::LogisticRegression, one), InsufficientClasses);
    CHECK_THROWS_AS(linear_fit(LinearKind::Lda, {}), InsufficientClasses);

    // Identical features with conflicting labels must not blow up (shrinkage
    // keeps the pooled covariance invertible).
    std::vector<std::pair<FeatureVector, int>> conflict;
    conflict.push_back({f, 3});
    conflict.push_back({f, 5});
    const LinearModel m = linear_fit(LinearKind::Lda, conflict);
    const int pred = action_index(linear_predict(m, f));
    CHECK((pred == 3 || pred == 5));
}

TEST_CASE("model files round-trip bit-exactly") {
    Rng rng(8);
    const Mlp mlp = mlp_init(rng);
    const std::string path = "/tmp/rtlab-test-model.json";
    save_model(mlp, path);
    const Model back = load_model(path);
    REQUIRE(std::holds_alternative<Mlp>(back));
    CHECK(std::get<Mlp>(back) == mlp);

    std::vector<std::pair<FeatureVector, int>> data;
    for (int i = 0; i < 40; ++i) {
        FeatureVector f = random_features(rng);
        data.push_back({f, i % 3});
    }
    for (const LinearKind kind : {LinearKind::Lda, LinearKind::LogisticRegression}) {
        const LinearModel lm = linear_fit(kind, data);
        save_model(lm, path);
        const Model lback = load_model(path);
        REQUIRE(std::holds_alternative<LinearModel>(lback));
        CHECK(std::get<LinearModel>(lback) == lm);
    }
    std::remove(path.c_str());
}

TEST_CASE("load_model rejects malformed files") {
    const std::string path = "/tmp/rtlab-test-bad-model.json";
    {
        std::ofstream out(path);
        out << "{\"format\":1,\"kind\":\"mlp\",\"arch\":[15,32,9],\"params\":{}}";
    }
    CHECK_THROWS_AS(load_model(path), ModelFormatError);
    {
        std::ofstream out(path);
        out << "not json";
    }
    CHECK_THROWS_AS(load_model(path), ModelFormatError);
    CHECK_THROWS(load_model("/tmp/rtlab-no-such-model.json"));
    std::remove(path.c_str());
}
