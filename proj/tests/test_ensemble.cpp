#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "autoinv/ensemble.hpp"
#include "autoinv/nfp.hpp"
#include "oracles.hpp"

using namespace autoinv;

namespace {

// member with explicit constant outputs: mean net returns mu, variance net
// raw output chosen so sigma^2 == s2
EnsembleMember constant_member(double mu, double s2, double floor = 1e-6) {
    EnsembleMember m;
    m.mean_net = Mlp::make(1, {}, 1, Activation::identity());
    m.mean_net.weights(0)[0] = 0.0;
    m.mean_net.biases(0)[0] = mu;
    m.var_net = Mlp::make(1, {}, 1, Activation::identity());
    m.var_net.weights(0)[0] = 0.0;
    m.var_net.biases(0)[0] = std::log(std::expm1(s2 - floor));
    return m;
}

DeepEnsemble random_ensemble(Rng& rng, std::size_t members, std::size_t in, std::size_t out) {
    DeepEnsemble ens;
    ens.variance_floor = 1e-6;
    const auto roster = default_roster(members);
    for (std::size_t m = 0; m < members; ++m) {
        EnsembleMember member;
        member.mean_net = oracles::random_net(rng, in, out, roster[m]);
        member.var_net = oracles::random_net(rng, in, out, roster[m], 1, 4);
        ens.members.push_back(std::move(member));
        ens.roster.push_back(roster[m]);
    }
    return ens;
}

Dataset sine_dataset(std::size_t n, double noise_above, double noise_std, std::uint64_t seed) {
    NfpSpec spec = NfpSpec::sine1d();
    CorruptionSpec corruption;
    if (noise_std > 0.0) {
        corruption.noise_regions.push_back({IntervalRegion::dim_above(1, 0, noise_above), noise_std});
    }
    return sample_dataset(spec, n, seed, corruption).data;
}

EnsembleTrainConfig small_ensemble_config(std::uint64_t seed, std::size_t members = 4) {
    EnsembleTrainConfig cfg;
    cfg.member_count = members;
    cfg.mean_hidden = {24, 24};
    cfg.var_hidden = {12, 12};
    cfg.stage1.learning_rate = 5e-3;
    cfg.stage1.epochs = 300;
    cfg.stage1.batch_size = 64;
    cfg.stage2_epochs = 200;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("nll_loss hand values") {
    const std::vector<double> one = {1.0};
    CHECK(nll_loss(one, std::vector<double>{1.0}, one) == 0.0);
    CHECK(nll_loss(one, std::vector<double>{std::exp(1.0)}, one)
          == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(nll_loss(std::vector<double>{0.0}, std::vector<double>{1.0}, one) == 0.5);
    CHECK_THROWS(nll_loss(one, std::vector<double>{0.0}, one));
}

TEST_CASE("predict: two constant members") {
    DeepEnsemble ens;
    ens.members.push_back(constant_member(0.0, 1.0));
    ens.members.push_back(constant_member(2.0, 1.0));
    ens.roster.assign(2, Activation::identity());
    const auto pred = predict(ens, std::vector<double>{0.0});
    CHECK(pred.mu[0] == 1.0);
    CHECK(pred.sigma_aleatoric[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pred.sigma_epistemic[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("predict: identical members have zero epistemic spread") {
    Rng rng(31);
    const auto member_net = oracles::random_net(rng, 2, 2, Activation::tanh());
    EnsembleMember member;
    member.mean_net = member_net;
    member.var_net = oracles::random_net(rng, 2, 2, Activation::tanh(), 1, 4);
    const std::vector<double> x = {0.3, -0.8};
    const auto direct = mlp_forward(member_net, x);

    // power-of-two clone count: the member mean is exact, so the collapse
    // is bitwise
    const auto ens4 = clone_ensemble(member, 4);
    const auto pred4 = predict(ens4, x);
    CHECK(pred4.sigma_epistemic[0] == 0.0);
    CHECK(pred4.sigma_epistemic[1] == 0.0);
    CHECK(pred4.mu[0] == direct[0]);
    CHECK(pred4.mu[1] == direct[1]);

    // other counts collapse to rounding noise
    const auto pred5 = predict(clone_ensemble(member, 5), x);
    for (std::size_t d = 0; d < 2; ++d) {
        CHECK(pred5.sigma_epistemic[d] < 1e-30);
        CHECK(pred5.mu[d] == doctest::Approx(direct[d]).epsilon(1e-15));
    }
}

TEST_CASE("predict matches Monte-Carlo mixture moments within 1%") {
    Rng rng(1234);
    for (int round = 0; round < 3; ++round) {
        auto ens = random_ensemble(rng, 5, 2, 1);
        std::vector<double> x = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
        // keep the mean away from zero so the relative comparison is stable
        auto pred = predict(ens, x);
        const double scale = 1.0 + 2.0 * std::sqrt(pred.sigma_aleatoric[0] + pred.sigma_epistemic[0]);
        for (auto& member : ens.members) {
            member.mean_net.biases(member.mean_net.layer_count() - 1)[0] += scale;
        }
        pred = predict(ens, x);
        const auto mc = oracles::mc_mixture_moments(ens, x, 1000000, 99 + round);
        CHECK(std::abs(pred.mu[0] - mc.mean[0]) / std::abs(mc.mean[0]) < 0.01);
        const double total = pred.sigma_aleatoric[0] + pred.sigma_epistemic[0];
        CHECK(std::abs(total - mc.variance[0]) / mc.variance[0] < 0.01);
    }
}

TEST_CASE("decomposition identity: aleatoric + epistemic equals the mixture variance") {
    Rng rng(555);
    const auto ens = random_ensemble(rng, 7, 3, 2);
    for (int round = 0; round < 200; ++round) {
        std::vector<double> x = {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const auto pred = predict(ens, x);
        for (std::size_t d = 0; d < 2; ++d) {
            // direct evaluation of the mixture variance:
            // (1/M) sum (sigma_m^2 + mu_m^2) - F_mu^2
            double acc = 0.0;
            double fmu = 0.0;
            for (const auto& member : ens.members) {
                const auto mu = mlp_forward(member.mean_net, x);
                const auto raw = mlp_forward(member.var_net, x);
                const double s2 = Activation::softplus_value(raw[d]) + ens.variance_floor;
                acc += s2 + mu[d] * mu[d];
                fmu += mu[d];
            }
            const double m = static_cast<double>(ens.member_count());
            const double mixture_var = acc / m - (fmu / m) * (fmu / m);
            CHECK(std::abs(pred.sigma_aleatoric[d] + pred.sigma_epistemic[d] - mixture_var)
                  < 1e-10);
            CHECK(pred.sigma_epistemic[d] >= 0.0);
            CHECK(pred.sigma_aleatoric[d] >= ens.variance_floor);
        }
    }
}

TEST_CASE("combined_uncertainty weighted sums") {
    Prediction pred;
    pred.mu = {0.0};
    pred.sigma_aleatoric = {1.0};
    pred.sigma_epistemic = {2.0};
    CHECK(combined_uncertainty(pred, {0.0, 0.0}) == 0.0);
    CHECK(combined_uncertainty(pred, {1.0, 10.0}) == 21.0);

    // alpha = beta = 1 gives the total mixture variance summed over dims
    Rng rng(8);
    const auto ens = random_ensemble(rng, 4, 2, 2);
    const std::vector<double> x = {0.2, -0.4};
    const auto p = predict(ens, x);
    const double total = combined_uncertainty(p, {1.0, 1.0});
    double want = 0.0;
    for (std::size_t d = 0; d < 2; ++d) want += p.sigma_aleatoric[d] + p.sigma_epistemic[d];
    CHECK(total == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("grad_uana_objective matches finite differences") {
    Rng rng(77);
    const auto ens = random_ensemble(rng, 4, 3, 2);
    const std::vector<double> y_target = {0.4, -0.2};
    const UncertaintyWeights w{0.7, 3.0};
    EnsembleScratch scratch;

    for (int round = 0; round < 5; ++round) {
        std::vector<double> x(3);
        bool clean = false;
        for (int attempt = 0; attempt < 100 && !clean; ++attempt) {
            for (double& v : x) v = rng.uniform(-1.2, 1.2);
            clean = true;
            for (const auto& member : ens.members) {
                clean = clean && oracles::away_from_kinks(member.mean_net, x, 1e-3) &&
                        oracles::away_from_kinks(member.var_net, x, 1e-3);
            }
        }
        REQUIRE(clean);
        std::vector<double> grad(3);
        const auto value = grad_uana_objective(ens, x, y_target, w, grad, scratch);

        const auto fd = oracles::fd_gradient(
            [&](std::span<const double> p) {
                const auto pred = predict(ens, p);
                double loss = 0.0;
                for (std::size_t d = 0; d < 2; ++d) {
                    const double r = pred.mu[d] - y_target[d];
                    loss += r * r + w.alpha * pred.sigma_aleatoric[d] +
                            w.beta * pred.sigma_epistemic[d];
                }
                return loss;
            },
            x);
        CHECK(oracles::relative_error(grad, fd) < 1e-5);
        CHECK(value.loss == doctest::Approx(value.mse + value.uncertainty).epsilon(1e-12));
    }
}

TEST_CASE("grad_uana_objective with zero weights reduces to the plain NA gradient") {
    Rng rng(99);
    const auto net = oracles::random_net(rng, 2, 1, Activation::tanh());
    EnsembleMember member;
    member.mean_net = net;
    member.var_net = oracles::random_net(rng, 2, 1, Activation::tanh(), 1, 4);
    const auto ens = clone_ensemble(member, 2);  // power-of-two clone count

    const std::vector<double> x = {0.37, -0.12};
    const std::vector<double> y = {0.5};
    EnsembleScratch scratch;
    std::vector<double> grad(2);
    const auto value = grad_uana_objective(ens, x, y, UncertaintyWeights{}, grad, scratch);

    MlpScratch s;
    mlp_forward_cached(net, x, s);
    const double resid = s.act.back()[0] - y[0];
    const auto na_grad = grad_wrt_input(net, x, std::vector<double>{2.0 * resid});
    CHECK(grad[0] == na_grad[0]);
    CHECK(grad[1] == na_grad[1]);
    CHECK(value.loss == resid * resid);
}

TEST_CASE("gradient at a joint minimizer is numerically zero") {
    // all members agree exactly and have flat variance: at x with
    // F_mu(x) == y the full objective is stationary
    DeepEnsemble ens;
    ens.members.push_back(constant_member(0.7, 1.0));
    ens.members.push_back(constant_member(0.7, 1.0));
    ens.roster.assign(2, Activation::identity());
    EnsembleScratch scratch;
    std::vector<double> grad(1);
    const auto value = grad_uana_objective(ens, std::vector<double>{0.1},
                                           std::vector<double>{0.7}, {1.0, 1.0}, grad, scratch);
    CHECK(std::abs(grad[0]) < 1e-8);
    CHECK(value.mse == 0.0);
}

TEST_CASE("default roster cycles the reference activations") {
    const auto roster10 = default_roster(10);
    auto count = [&](ActKind k) {
        std::size_t c = 0;
        for (const auto& a : roster10) c += a.kind == k ? 1 : 0;
        return c;
    };
    CHECK(count(ActKind::Tanh) == 2);
    CHECK(count(ActKind::ReLU) == 2);
    CHECK(count(ActKind::CELU) == 2);
    CHECK(count(ActKind::LeakyReLU) == 2);
    CHECK(count(ActKind::ELU) == 1);
    CHECK(count(ActKind::Hardswish) == 1);

    // prefix property keeps small rosters diverse and ablations shareable
    const auto roster4 = default_roster(4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(roster4[i] == roster10[i]);
}

TEST_CASE("train_ensemble: stage-2 NLL beats the unit-variance stage-1 NLL") {
    const auto data = sine_dataset(512, 0.0, 0.1, 42);
    EnsembleTrainReport report;
    const auto ens = train_ensemble(data, small_ensemble_config(7), &report);
    CHECK(ens.member_count() == 4);
    for (const auto& diag : report.members) {
        CHECK(diag.nll_stage2 <= diag.nll_unit_variance_stage1);
    }
}

TEST_CASE("train_ensemble: homoscedastic noise is calibrated") {
    // y = x + eps, eps ~ N(0, 0.1^2): the learned std should recover ~0.1
    Rng rng(4242);
    Matrix designs(600, 1);
    Matrix performances(600, 1);
    for (std::size_t r = 0; r < 600; ++r) {
        const double x = rng.uniform(-1.0, 1.0);
        designs.at(r, 0) = x;
        performances.at(r, 0) = x + 0.1 * rng.normal();
    }
    const auto data = Dataset::from_rows(std::move(designs), std::move(performances));
    const auto ens = train_ensemble(data, small_ensemble_config(3), nullptr);

    const double y_std = data.performance_norm.std[0];
    double acc = 0.0;
    const auto x_norm = data.normalized_designs();
    for (std::size_t r = 0; r < 200; ++r) {
        const auto pred = predict(ens, x_norm.row(r));
        acc += std::sqrt(pred.sigma_aleatoric[0]) * y_std;  // de-normalized std
    }
    const double mean_std = acc / 200.0;
    CHECK(mean_std >= 0.05);
    CHECK(mean_std <= 0.2);
}

TEST_CASE("train_ensemble: noiseless data collapses the aleatoric std") {
    const auto data = sine_dataset(512, 0.0, 0.0, 5);
    const auto ens = train_ensemble(data, small_ensemble_config(11), nullptr);
    const auto x_norm = data.normalized_designs();
    double acc = 0.0;
    for (std::size_t r = 0; r < 200; ++r) {
        acc += std::sqrt(predict(ens, x_norm.row(r)).sigma_aleatoric[0]);
    }
    CHECK(acc / 200.0 < 0.05);  // well under any real noise level
}

TEST_CASE("train_ensemble: region noise shows up only in-region") {
    // noise on x > 0 only (positive half of the sine support)
    const auto data = sine_dataset(800, 0.0, 0.1, 21);
    const auto ens = train_ensemble(data, small_ensemble_config(13, 6), nullptr);
    const auto x_norm = data.normalized_designs();
    double in_region = 0.0;
    double out_region = 0.0;
    std::size_t n_in = 0;
    std::size_t n_out = 0;
    for (std::size_t r = 0; r < data.size(); ++r) {
        const double raw = data.designs.at(r, 0);
        const double sa = predict(ens, x_norm.row(r)).sigma_aleatoric[0];
        if (raw > 0.0) {
            in_region += sa;
            ++n_in;
        } else {
            out_region += sa;
            ++n_out;
        }
    }
    in_region /= static_cast<double>(n_in);
    out_region /= static_cast<double>(n_out);
    CHECK(in_region >= 5.0 * out_region);
}

TEST_CASE("epistemic uncertainty grows far outside the training support") {
    const auto data = sine_dataset(512, 0.0, 0.0, 31);
    const auto ens = train_ensemble(data, small_ensemble_config(17, 6), nullptr);
    std::vector<double> lo;
    std::vector<double> hi;
    data.normalized_design_box(lo, hi);
    const double width = hi[0] - lo[0];

    std::vector<double> interior;
    std::vector<double> outside;
    for (int i = 0; i < 41; ++i) {
        const double t = static_cast<double>(i) / 40.0;
        interior.push_back(
            predict(ens, std::vector<double>{lo[0] + t * width}).sigma_epistemic[0]);
        outside.push_back(
            predict(ens, std::vector<double>{hi[0] + 2.0 * width * (0.5 + 0.5 * t)})
                .sigma_epistemic[0]);
    }
    std::sort(interior.begin(), interior.end());
    std::sort(outside.begin(), outside.end());
    CHECK(outside[20] >= 10.0 * interior[20]);
}

TEST_CASE("train_ensemble is deterministic per seed") {
    const auto data = sine_dataset(128, 0.0, 0.05, 3);
    auto cfg = small_ensemble_config(123);
    cfg.stage1.epochs = 20;
    cfg.stage2_epochs = 10;
    const auto a = train_ensemble(data, cfg, nullptr);
    const auto b = train_ensemble(data, cfg, nullptr);
    for (std::size_t m = 0; m < a.member_count(); ++m) {
        CHECK(a.members[m].mean_net.params == b.members[m].mean_net.params);
        CHECK(a.members[m].var_net.params == b.members[m].var_net.params);
    }
}

TEST_CASE("ensembles of fewer than two members are rejected") {
    DeepEnsemble ens;
    ens.members.push_back(constant_member(0.0, 1.0));
    ens.roster.assign(1, Activation::identity());
    CHECK_THROWS(ens.validate());
}
