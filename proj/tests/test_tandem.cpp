#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "autoinv/nfp.hpp"
#include "autoinv/tandem.hpp"
#include "oracles.hpp"

using namespace autoinv;

namespace {

Mlp identity_net(std::size_t dims) {
    Mlp net = Mlp::make(dims, {}, dims, Activation::identity());
    for (std::size_t i = 0; i < dims; ++i) net.weights(0)[i * dims + i] = 1.0;
    return net;
}

Matrix random_targets(Rng& rng, std::size_t n, std::size_t dims, double lo = -0.8,
                      double hi = 0.8) {
    Matrix m(n, dims);
    for (double& v : m.data) v = rng.uniform(lo, hi);
    return m;
}

TandemTrainConfig small_config(std::uint64_t seed) {
    TandemTrainConfig cfg;
    cfg.base.learning_rate = 3e-3;
    cfg.base.epochs = 250;
    cfg.base.batch_size = 32;
    cfg.base.seed = seed;
    cfg.hidden = {16, 16};
    return cfg;
}

Matrix head_validation(const Dataset& data, std::size_t n = 20) {
    const Matrix perf = data.normalized_performances();
    Matrix out(std::min(n, perf.rows), perf.cols);
    std::copy_n(perf.data.begin(), out.rows * out.cols, out.data.begin());
    return out;
}

}  // namespace

TEST_CASE("train_tandem: identity forward map is inverted") {
    Rng rng(1);
    const auto forward = identity_net(1);
    const auto params_before = forward.params;
    const auto targets = random_targets(rng, 256, 1);

    const auto result = train_tandem(forward, targets, small_config(3));
    CHECK(forward.params == params_before);  // frozen

    // held-out targets compose to themselves
    MlpScratch scratch;
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const std::vector<double> y = {rng.uniform(-0.7, 0.7)};
        const auto x = query(result.inverse, y);
        const auto back = mlp_forward(forward, x);
        worst = std::max(worst, (back[0] - y[0]) * (back[0] - y[0]));
    }
    CHECK(worst < 1e-4);

    const auto x = query(result.inverse, std::vector<double>{0.3});
    CHECK(std::abs(x[0] - 0.3) < 1e-2);
}

TEST_CASE("train_tandem: zero epochs leaves an untrained inverse and a frozen forward") {
    Rng rng(2);
    const auto forward = identity_net(2);
    const auto params_before = forward.params;
    auto cfg = small_config(5);
    cfg.base.epochs = 0;
    const auto result = train_tandem(forward, random_targets(rng, 16, 2), cfg);
    CHECK(forward.params == params_before);
    CHECK(result.loss_history.empty());
    // untrained but well-formed: finite outputs of the right dimension
    const auto x = query(result.inverse, std::vector<double>{0.1, -0.1});
    CHECK(x.size() == 2);
    for (double v : x) CHECK(std::isfinite(v));
}

TEST_CASE("query is a single forward pass: batch order preserved") {
    Rng rng(3);
    const auto forward = identity_net(2);
    const auto result = train_tandem(forward, random_targets(rng, 64, 2), small_config(7));
    Matrix targets = random_targets(rng, 5, 2);
    const Matrix designs = query_batch(result.inverse, targets);
    CHECK(designs.rows == 5);
    for (std::size_t r = 0; r < 5; ++r) {
        const auto single = query(result.inverse, targets.row(r));
        for (std::size_t d = 0; d < 2; ++d) CHECK(single[d] == designs.at(r, d));
    }
}

TEST_CASE("ua-tandem with zero weights on a 2-clone matches tandem bitwise") {
    Rng rng(4);
    EnsembleMember member;
    member.mean_net = oracles::random_net(rng, 2, 2, Activation::tanh());
    member.var_net = oracles::random_net(rng, 2, 2, Activation::tanh(), 1, 4);
    const auto ens = clone_ensemble(member, 2);
    const auto targets = random_targets(rng, 64, 2);

    auto cfg = small_config(11);
    cfg.base.epochs = 40;
    const auto plain = train_tandem(member.mean_net, targets, cfg);
    auto ua_cfg = cfg;
    ua_cfg.weights = {0.0, 0.0};
    const auto ua = train_ua_tandem(ens, targets, ua_cfg);

    CHECK(plain.loss_history == ua.loss_history);
    CHECK(plain.inverse.net.params == ua.inverse.net.params);
}

TEST_CASE("frozen ensemble parameters are bit-identical after ua-tandem training") {
    Rng rng(5);
    EnsembleMember member;
    member.mean_net = oracles::random_net(rng, 1, 1, Activation::tanh());
    member.var_net = oracles::random_net(rng, 1, 1, Activation::tanh(), 1, 4);
    auto ens = clone_ensemble(member, 3);
    std::vector<std::vector<double>> before;
    for (const auto& m : ens.members) {
        before.push_back(m.mean_net.params);
        before.push_back(m.var_net.params);
    }
    auto cfg = small_config(13);
    cfg.base.epochs = 30;
    cfg.weights = {0.5, 2.0};
    train_ua_tandem(ens, random_targets(rng, 32, 1), cfg);
    std::size_t i = 0;
    for (const auto& m : ens.members) {
        CHECK(m.mean_net.params == before[i++]);
        CHECK(m.var_net.params == before[i++]);
    }
}

TEST_CASE("select_inverse_model picks the oracle inverse") {
    // sine NFP on [-1, 1]; inverse candidates: the analytic arcsine-based
    // inverse versus a garbage net
    const NfpSpec spec = NfpSpec::sine1d();
    const auto sampled = sample_dataset(spec, 512, 17);
    const auto& data = sampled.data;

    // train a good inverse through a trained forward surrogate
    Mlp forward = Mlp::make(1, {24, 24}, 1, Activation::tanh());
    Rng init(3);
    forward.init_glorot(init);
    TrainConfig tc;
    tc.learning_rate = 5e-3;
    tc.epochs = 300;
    tc.batch_size = 64;
    train_mse(forward, data, tc);

    auto cfg = small_config(19);
    const auto good = train_tandem(forward, data.normalized_performances(), cfg);

    InverseNet garbage;
    garbage.net = Mlp::make(1, {4}, 1, Activation::tanh());
    Rng grng(99);
    garbage.net.init_glorot(grng);

    const std::vector<InverseNet> candidates = {garbage, good.inverse};
    const Matrix validation = head_validation(data);
    const auto selection = select_inverse_model(candidates, spec, validation, data.design_norm,
                                                data.performance_norm);
    CHECK(selection.best_index == 1);
    CHECK(selection.validation_nfp_errors[1] <= selection.validation_nfp_errors[0]);

    // single candidate: trivially itself
    const std::vector<InverseNet> single = {good.inverse};
    CHECK(select_inverse_model(single, spec, validation, data.design_norm,
                               data.performance_norm)
              .best_index == 0);
}

TEST_CASE("selected model beats every candidate on validation error") {
    const NfpSpec spec = NfpSpec::sine1d();
    const auto sampled = sample_dataset(spec, 256, 29);
    const auto& data = sampled.data;
    Mlp forward = Mlp::make(1, {16, 16}, 1, Activation::tanh());
    Rng init(4);
    forward.init_glorot(init);
    TrainConfig tc;
    tc.learning_rate = 5e-3;
    tc.epochs = 200;
    tc.batch_size = 64;
    train_mse(forward, data, tc);

    std::vector<InverseNet> candidates;
    for (std::size_t c = 0; c < 5; ++c) {
        auto cfg = small_config(derive_seed(31, c));
        cfg.base.epochs = 120;
        candidates.push_back(train_tandem(forward, data.normalized_performances(), cfg).inverse);
    }
    const Matrix validation = head_validation(data);
    const auto selection = select_inverse_model(candidates, spec, validation, data.design_norm,
                                                data.performance_norm);
    for (double err : selection.validation_nfp_errors) {
        CHECK(selection.validation_nfp_errors[selection.best_index] <= err);
    }
}

TEST_CASE("empty candidate list is rejected") {
    const NfpSpec spec = NfpSpec::sine1d();
    const auto sampled = sample_dataset(spec, 32, 1);
    Matrix validation(1, 1, 0.1);
    CHECK_THROWS(select_inverse_model({}, spec, validation, sampled.data.design_norm,
                                      sampled.data.performance_norm));
}
