#include <doctest.h>

#include <cmath>

#include "ssbnn/layer.hpp"

using namespace ssbnn;

namespace {

double sp(double rho) { return rho > 30 ? rho : std::log1p(std::exp(rho)); }

PriorSpec make_prior(PriorKind k) {
    PriorSpec p;
    p.kind = k;
    p.lambda = {0.3, 0.3, 0.3, 0.3};
    return p;
}

// fill a leaf with moderate random values so KL oracles are non-trivial
void randomize(const ad::NodePtr& n, SeededRng& rng, double lo, double hi) {
    for (double& v : n->value.data) v = lo + (hi - lo) * rng.uniform();
}

Tensor row_of(const Tensor& m, std::size_t j) {
    Tensor out({m.cols()});
    for (std::size_t i = 0; i < m.cols(); ++i) out[i] = m.at(j, i);
    return out;
}

}  // namespace

TEST_CASE("layer initialization follows the documented scheme") {
    SeededRng rng(1, 600);
    auto prior = make_prior(PriorKind::SS_GHS);
    auto st = init_layer(5, 3, prior, false, rng);
    CHECK(st.fan_in == 5);
    CHECK(st.fan_out == 3);
    CHECK(st.mu->value.shape == std::vector<std::size_t>{3, 6});
    double bound = std::sqrt(6.0 / 5.0);
    for (double v : st.mu->value.data) {
        CHECK(v >= -bound);
        CHECK(v <= bound);
    }
    for (double v : st.rho->value.data) CHECK(v == -6.0);
    double logit99 = std::log(0.99 / 0.01);
    for (double v : st.gamma_logit->value.data) CHECK(v == doctest::Approx(logit99));
    for (double v : st.mu_local->value.data) {
        CHECK(v >= -0.6);
        CHECK(v <= 0.6);
    }
    CHECK(st.mu_local2 != nullptr);
    for (double v : st.rho_local2->value.data) CHECK(v == -6.0);

    auto out_layer = init_layer(3, 2, prior, true, rng);
    CHECK(out_layer.gamma_logit == nullptr);
    CHECK(out_layer.gamma() == std::vector<double>{1.0, 1.0});

    auto ig = init_layer(4, 2, make_prior(PriorKind::SS_IG), false, rng);
    CHECK(ig.mu_local == nullptr);
    CHECK(ig.mu_local2 == nullptr);

    auto g = init_global_scales(prior);
    CHECK(g.mu_1->value[0] == 1.0);
    CHECK(g.rho_2->value[0] == -6.0);
    auto g_ig = init_global_scales(make_prior(PriorKind::SS_IG));
    CHECK(g_ig.mu_1 == nullptr);
}

TEST_CASE("pruned nodes produce exactly zero weights and outputs") {
    SeededRng init_rng(2, 600);
    auto prior = make_prior(PriorKind::SS_GL);
    auto st = init_layer(4, 3, prior, false, init_rng);
    st.gamma_logit->value[0] = -30.0;  // node 0 certainly off
    st.gamma_logit->value[1] = 30.0;
    st.gamma_logit->value[2] = 30.0;
    auto global = init_global_scales(prior);

    RelaxationConfig cfg;
    SeededRng wr(2, 100), zr(2, 200), sr(2, 300);
    auto sampled = sample_layer(st, prior, global, cfg, Parameterization::Centered, wr, zr, sr);
    CHECK(sampled.z_hard[0] == 0.0);
    CHECK(sampled.z_hard[1] == 1.0);
    for (std::size_t i = 0; i < 5; ++i) CHECK(sampled.W->value.at(0, i) == 0.0);
    for (std::size_t i = 0; i < 5; ++i) CHECK(sampled.W->value.at(1, i) != 0.0);

    SeededRng xr(3, 0);
    Tensor xv({2, 4});
    for (double& v : xv.data) v = 2.0 * xr.uniform() - 1.0;
    auto y = layer_forward(ad::leaf(xv), sampled);
    CHECK(y->value.at(0, 0) == 0.0);
    CHECK(y->value.at(1, 0) == 0.0);

    // weights of a pruned node cannot influence anything downstream
    auto st2 = init_layer(4, 3, prior, false, init_rng);
    st2.gamma_logit->value = st.gamma_logit->value;
    st2.mu->value = st.mu->value;
    for (std::size_t i = 0; i < 5; ++i) st2.mu->value.at(0, i) += 17.0;
    SeededRng wr2(2, 100), zr2(2, 200), sr2(2, 300);
    auto sampled2 =
        sample_layer(st2, prior, global, cfg, Parameterization::Centered, wr2, zr2, sr2);
    auto y2 = layer_forward(ad::leaf(xv), sampled2);
    for (std::size_t i = 0; i < y->value.size(); ++i) CHECK(y->value[i] == y2->value[i]);
}

TEST_CASE("layer_forward matches naive affine map") {
    Tensor Wv({3, 5});
    SeededRng rng(4, 0);
    for (double& v : Wv.data) v = 2.0 * rng.uniform() - 1.0;
    SampledLayer sl;
    sl.W = ad::leaf(Wv);
    sl.z_hard.assign(3, 1.0);

    Tensor xv({2, 4});
    for (double& v : xv.data) v = 2.0 * rng.uniform() - 1.0;
    auto y = layer_forward(ad::leaf(xv), sl);
    for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t j = 0; j < 3; ++j) {
            double s = Wv.at(j, 0);  // bias sits in column 0
            for (std::size_t i = 0; i < 4; ++i) s += xv.at(b, i) * Wv.at(j, 1 + i);
            CHECK(y->value.at(b, j) == doctest::Approx(s).epsilon(1e-12));
        }
    Tensor bad({2, 3});
    CHECK_THROWS_AS(layer_forward(ad::leaf(bad), sl), ShapeError);
}

TEST_CASE("non-centered sampling degenerates to centered when the scale is one") {
    auto prior = make_prior(PriorKind::SS_GL);
    SeededRng init_rng(5, 600);
    auto st = init_layer(4, 3, prior, false, init_rng);
    st.mu_local->value.zero();
    for (double& v : st.rho_local->value.data) v = -40.0;  // tau^2 == 1 up to 1e-17
    auto global = init_global_scales(prior);
    RelaxationConfig cfg;

    SeededRng wr1(5, 100), zr1(5, 200), sr1(5, 300);
    auto c = sample_layer(st, prior, global, cfg, Parameterization::Centered, wr1, zr1, sr1);
    SeededRng wr2(5, 100), zr2(5, 200), sr2(5, 300);
    auto nc = sample_layer(st, prior, global, cfg, Parameterization::NonCentered, wr2, zr2, sr2);
    CHECK(c.z_hard == nc.z_hard);
    for (std::size_t i = 0; i < c.W->value.size(); ++i)
        CHECK(c.W->value[i] == doctest::Approx(nc.W->value[i]).epsilon(1e-12));
}

TEST_CASE("horseshoe soft-truncation caps the non-centered scale at c_reg") {
    auto prior = make_prior(PriorKind::SS_GHS);
    prior.c_reg_sq = 0.7;
    SeededRng init_rng(6, 600);
    auto st = init_layer(4, 3, prior, false, init_rng);
    for (double& v : st.mu_local->value.data) v = 25.0;  // T astronomically large
    for (double& v : st.rho_local->value.data) v = -40.0;
    for (double& v : st.mu_local2->value.data) v = 25.0;
    for (double& v : st.rho_local2->value.data) v = -40.0;
    auto global = init_global_scales(prior);
    for (auto& p : {global.rho_1, global.rho_2}) p->value[0] = -40.0;
    global.mu_1->value[0] = 0.0;
    global.mu_2->value[0] = 0.0;
    RelaxationConfig cfg;

    SeededRng wr1(6, 100), zr1(6, 200), sr1(6, 300);
    auto c = sample_layer(st, prior, global, cfg, Parameterization::Centered, wr1, zr1, sr1);
    SeededRng wr2(6, 100), zr2(6, 200), sr2(6, 300);
    auto nc = sample_layer(st, prior, global, cfg, Parameterization::NonCentered, wr2, zr2, sr2);
    double cap = std::sqrt(prior.c_reg_sq);
    for (std::size_t i = 0; i < c.W->value.size(); ++i)
        CHECK(nc.W->value[i] == doctest::Approx(cap * c.W->value[i]).epsilon(1e-9));
}

TEST_CASE("layer KL composes from the scalar closed forms") {
    for (auto kind : {PriorKind::SS_IG, PriorKind::SS_GL, PriorKind::SS_GHS}) {
        for (auto param : {Parameterization::Centered, Parameterization::NonCentered}) {
            for (bool is_output : {false, true}) {
                auto prior = make_prior(kind);
                prior.sigma0_sq = 1.3;
                prior.c_reg_sq = 0.9;
                SeededRng init_rng(7, 600);
                auto st = init_layer(4, 3, prior, is_output, init_rng);
                SeededRng pr(8, 0);
                randomize(st.mu, pr, -0.8, 0.8);
                randomize(st.rho, pr, -3.0, 0.5);
                if (st.gamma_logit) randomize(st.gamma_logit, pr, -2.0, 2.0);
                if (st.mu_local) {
                    randomize(st.mu_local, pr, -0.5, 0.5);
                    randomize(st.rho_local, pr, -3.0, 0.0);
                }
                if (st.mu_local2) {
                    randomize(st.mu_local2, pr, -0.5, 0.5);
                    randomize(st.rho_local2, pr, -3.0, 0.0);
                }
                auto global = init_global_scales(prior);
                if (global.mu_1) {
                    global.mu_1->value[0] = 0.4;
                    global.rho_1->value[0] = -1.5;
                }
                if (global.mu_2) {
                    global.mu_2->value[0] = -0.3;
                    global.rho_2->value[0] = -2.0;
                }
                double lambda_l = is_output ? 1.0 : 0.3;

                double expect = 0.0;
                auto gamma = st.gamma();
                for (std::size_t j = 0; j < st.fan_out; ++j) {
                    Tensor mu_j = row_of(st.mu->value, j);
                    Tensor sig_j = row_of(st.rho->value, j);
                    for (double& v : sig_j.data) v = sp(v);
                    double slab;
                    bool fixed = kind == PriorKind::SS_IG ||
                                 param == Parameterization::NonCentered;
                    if (fixed) {
                        slab = kl::gaussian_slab_fixed(mu_j, sig_j, prior.sigma0_sq);
                    } else if (kind == PriorKind::SS_GL) {
                        slab = kl::expected_gaussian_slab_gl(
                            mu_j, sig_j, prior.sigma0_sq,
                            {st.mu_local->value[j], sp(st.rho_local->value[j])});
                    } else {
                        slab = kl::expected_gaussian_slab_ghs(
                            mu_j, sig_j, prior.sigma0_sq, prior.c_reg_sq,
                            {st.mu_local->value[j], sp(st.rho_local->value[j])},
                            {st.mu_local2->value[j], sp(st.rho_local2->value[j])},
                            {global.mu_1->value[0], sp(global.rho_1->value[0])},
                            {global.mu_2->value[0], sp(global.rho_2->value[0])});
                    }
                    expect += gamma[j] * slab;
                    if (!is_output) expect += kl::bernoulli(gamma[j], lambda_l);
                    if (kind == PriorKind::SS_GL) {
                        expect += kl::expected_lognormal_gamma_random_rate(
                            {st.mu_local->value[j], sp(st.rho_local->value[j])},
                            static_cast<int>(st.fan_in),
                            {global.mu_1->value[0], sp(global.rho_1->value[0])});
                    } else if (kind == PriorKind::SS_GHS) {
                        expect += kl::lognormal_invgamma(
                            {st.mu_local->value[j], sp(st.rho_local->value[j])}, {0.5, 1.0});
                        expect += kl::lognormal_gamma(
                            {st.mu_local2->value[j], sp(st.rho_local2->value[j])}, {0.5, 1.0});
                    }
                }

                auto node = layer_kl(st, prior, global, param, lambda_l);
                CHECK(node->value[0] == doctest::Approx(expect).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("global scale KL matches the scalar forms") {
    auto gl = make_prior(PriorKind::SS_GL);
    gl.a0 = 4.0;
    gl.b0 = 2.0;
    auto g = init_global_scales(gl);
    g.mu_1->value[0] = 0.7;
    g.rho_1->value[0] = -1.0;
    CHECK(global_scale_kl(g, gl)->value[0] ==
          doctest::Approx(kl::lognormal_gamma({0.7, sp(-1.0)}, {4.0, 2.0})).epsilon(1e-12));

    auto ghs = make_prior(PriorKind::SS_GHS);
    ghs.d0_sq = 2.5;
    auto g2 = init_global_scales(ghs);
    g2.mu_1->value[0] = 0.2;
    g2.rho_1->value[0] = -1.2;
    g2.mu_2->value[0] = -0.4;
    g2.rho_2->value[0] = -0.8;
    double expect = kl::lognormal_invgamma({0.2, sp(-1.2)}, {0.5, 1.0}) +
                    kl::lognormal_gamma({-0.4, sp(-0.8)}, {0.5, 1.0 / 2.5});
    CHECK(global_scale_kl(g2, ghs)->value[0] == doctest::Approx(expect).epsilon(1e-12));

    auto ig = make_prior(PriorKind::SS_IG);
    CHECK(global_scale_kl(init_global_scales(ig), ig)->value[0] == 0.0);
}

TEST_CASE("active node thresholding") {
    auto prior = make_prior(PriorKind::SS_IG);
    SeededRng rng(9, 600);
    auto st = init_layer(3, 4, prior, false, rng);
    st.gamma_logit->value[0] = 3.0;
    st.gamma_logit->value[1] = -3.0;
    st.gamma_logit->value[2] = 0.1;
    st.gamma_logit->value[3] = -0.1;
    CHECK(active_nodes(st) == std::vector<int>{1, 0, 1, 0});
    CHECK(active_nodes(st, 0.4) == std::vector<int>{1, 0, 1, 1});

    auto out = init_layer(3, 2, prior, true, rng);
    CHECK(active_nodes(out) == std::vector<int>{1, 1});
}
