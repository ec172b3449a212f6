#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ssbnn/trainer.hpp"

using namespace ssbnn;

namespace {

NetworkConfig reg_config(PriorKind kind = PriorKind::SS_GL) {
    NetworkConfig cfg;
    cfg.widths = {1, 8, 1};
    cfg.prior.kind = kind;
    cfg.prior.lambda = {0.5};
    return cfg;
}

SyntheticPair sin_data(std::size_t n_train = 64, std::size_t n_test = 32) {
    TeacherSpec t;
    t.kind = TeacherKind::Sin;
    t.input_dim = 1;
    return gen_synthetic(t, n_train, n_test, 0.1, 7);
}

}  // namespace

TEST_CASE("sgd with momentum applies the textbook update") {
    auto p = ad::leaf(Tensor::vec({1.0, 2.0}));
    Optimizer opt(OptimizerKind::SgdMomentum, 0.1);
    p->grad.data = {0.5, -1.0};
    opt.step({p});
    CHECK(p->value[0] == doctest::Approx(1.0 - 0.1 * 0.5).epsilon(1e-15));
    CHECK(p->value[1] == doctest::Approx(2.0 + 0.1 * 1.0).epsilon(1e-15));
    // second step with the same gradient picks up the velocity
    opt.step({p});
    CHECK(p->value[0] == doctest::Approx(0.95 - 0.1 * (0.9 * 0.5 + 0.5)).epsilon(1e-15));
}

TEST_CASE("adam leaves parameters alone at zero gradient and solves a bowl") {
    auto p = ad::leaf(Tensor::scalar(3.0));
    Optimizer opt(OptimizerKind::Adam, 0.1);
    p->grad.zero();
    opt.step({p});
    CHECK(p->value[0] == doctest::Approx(3.0).epsilon(1e-12));

    // minimize p^2
    for (int i = 0; i < 500; ++i) {
        p->grad.data = {2.0 * p->value[0]};
        opt.step({p});
    }
    CHECK(std::abs(p->value[0]) < 1e-3);
}

TEST_CASE("early stop wants three consecutive small changes") {
    CHECK(!early_stop({1.0, 1.0, 1.0}, 0.1));           // too short
    CHECK(early_stop({1.0, 1.0, 1.0, 1.0}, 0.1));
    CHECK(!early_stop({4.0, 3.0, 2.0, 1.0}, 0.1));      // still improving
    CHECK(!early_stop({4.0, 1.01, 1.0, 1.02}, 0.1));    // first diff too big
    CHECK(early_stop({4.0, 1.01, 1.0, 1.02, 1.01}, 0.1));
    CHECK(!early_stop({1.0, 1.0, 1.0, 1.0}, -1.0));     // disabled
}

TEST_CASE("zero learning rate leaves every parameter bitwise unchanged") {
    auto net = init_network(reg_config(), 5);
    std::vector<Tensor> before;
    for (const auto& p : net.params()) before.push_back(p->value);

    TrainConfig tc;
    tc.epochs = 2;
    tc.batch_size = 16;
    tc.lr = 0.0;
    tc.seed = 5;
    auto data = sin_data();
    train(net, data.train, &data.test, tc);

    auto params = net.params();
    for (std::size_t i = 0; i < params.size(); ++i)
        for (std::size_t j = 0; j < before[i].size(); ++j)
            CHECK(params[i]->value[j] == before[i][j]);
}

TEST_CASE("training is deterministic in the seed") {
    auto data = sin_data();
    TrainConfig tc;
    tc.epochs = 3;
    tc.batch_size = 16;
    tc.seed = 9;

    std::ostringstream a, b;
    for (auto* out : {&a, &b}) {
        auto net = init_network(reg_config(), 9);
        auto trace = train(net, data.train, &data.test, tc);
        write_metrics_csv(*out, trace);
    }
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("epoch,elbo,nll,kl,score,sparsity_l0,sparsity_l1,"
                        "compression,flops_ratio\n", 0) == 0);

    // a different seed diverges
    std::ostringstream c;
    auto net = init_network(reg_config(), 10);
    tc.seed = 10;
    auto trace = train(net, data.train, &data.test, tc);
    write_metrics_csv(c, trace);
    CHECK(a.str() != c.str());
}

TEST_CASE("loss decreases on an easy regression problem") {
    auto data = sin_data(128, 64);
    for (auto kind : {PriorKind::SS_IG, PriorKind::SS_GL, PriorKind::SS_GHS}) {
        auto net = init_network(reg_config(kind), 13);
        TrainConfig tc;
        tc.epochs = 15;
        tc.batch_size = 32;
        tc.lr = 5e-3;
        tc.seed = 13;
        auto trace = train(net, data.train, &data.test, tc);
        REQUIRE(trace.size() == 15);
        CHECK(trace.back().elbo < trace.front().elbo);
        for (const auto& m : trace) {
            CHECK(std::isfinite(m.elbo));
            CHECK(m.compression >= 0.0);
            CHECK(m.compression <= 1.0);
        }
    }
}

TEST_CASE("a large tolerance triggers early stopping at the window edge") {
    auto data = sin_data();
    auto net = init_network(reg_config(), 21);
    TrainConfig tc;
    tc.epochs = 30;
    tc.batch_size = 64;
    tc.lr = 1e-4;
    tc.seed = 21;
    tc.elbo_tolerance = 1e12;
    auto trace = train(net, data.train, &data.test, tc);
    CHECK(trace.size() == 4);
}

TEST_CASE("train validates its inputs") {
    auto net = init_network(reg_config(), 3);
    TrainConfig tc;
    tc.seed = 3;
    Dataset empty;
    empty.inputs = Tensor({0, 1});
    empty.targets = Tensor({0, 1});
    CHECK_THROWS_AS(train(net, empty, nullptr, tc), ValueError);

    auto data = sin_data();
    Dataset wide = data.train;
    wide.inputs = Tensor({data.train.size(), 2});
    CHECK_THROWS_AS(train(net, wide, nullptr, tc), ValueError);

    TrainConfig bad;
    bad.epochs = 0;
    CHECK_THROWS_AS(train(net, data.train, nullptr, bad), ValueError);
}

TEST_CASE("evaluate reports accuracy for classification and rmse for regression") {
    auto imgs = gen_synthetic_images(32, 16, 17);
    CHECK(imgs.train.is_classification());
    NetworkConfig cfg;
    cfg.widths = {784, 16, 10};
    cfg.likelihood = Likelihood::Categorical;
    cfg.prior.lambda = {0.5};
    auto net = init_network(cfg, 17);
    auto rng = NetRng::make(17, 2, 1000);
    double acc = evaluate(net, imgs.test, 2, rng);
    CHECK(acc >= 0.0);
    CHECK(acc <= 1.0);

    auto data = sin_data();
    auto rnet = init_network(reg_config(), 17);
    auto rng2 = NetRng::make(17, 2, 1000);
    double rmse = evaluate(rnet, data.test, 2, rng2);
    CHECK(rmse >= 0.0);
    CHECK(std::isfinite(rmse));
}

TEST_CASE("synthetic data generation is deterministic and honors the teacher") {
    TeacherSpec t;
    t.kind = TeacherKind::Constant;
    t.constant = 2.5;
    t.input_dim = 3;
    auto a = gen_synthetic(t, 20, 10, 0.0, 77);
    auto b = gen_synthetic(t, 20, 10, 0.0, 77);
    for (std::size_t i = 0; i < a.train.inputs.size(); ++i)
        CHECK(a.train.inputs[i] == b.train.inputs[i]);
    for (std::size_t i = 0; i < a.train.targets.size(); ++i)
        CHECK(a.train.targets[i] == doctest::Approx(2.5).epsilon(1e-15));
    for (double v : a.train.inputs.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    CHECK(a.train.size() == 20);
    CHECK(a.test.size() == 10);
    // train and test draws differ
    CHECK(a.train.inputs[0] != a.test.inputs[0]);

    TeacherSpec s;
    s.kind = TeacherKind::Sin;
    s.input_dim = 1;
    double x = 0.3;
    CHECK(teacher_eval(s, &x, 1) == doctest::Approx(std::sin(2.0 * M_PI * 0.3)).epsilon(1e-12));

    auto imgs = gen_synthetic_images(200, 12, 5);
    auto imgs2 = gen_synthetic_images(200, 12, 5);
    for (std::size_t i = 0; i < imgs.train.inputs.size(); ++i) {
        CHECK(imgs.train.inputs[i] == imgs2.train.inputs[i]);
        CHECK(imgs.train.inputs[i] >= 0.0);
        CHECK(imgs.train.inputs[i] <= 255.0);
        CHECK(imgs.train.inputs[i] == std::floor(imgs.train.inputs[i]));
    }
    bool all_classes = true;
    std::vector<int> seen(10, 0);
    for (int l : imgs.train.labels) seen[l] = 1;
    for (int s10 : seen) all_classes = all_classes && s10;
    CHECK(all_classes);
}
