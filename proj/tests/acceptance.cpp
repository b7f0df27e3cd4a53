// Acceptance suite: one pass/fail line per criterion. Run with no arguments
// for the full suite, or pass criterion numbers to run a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "autoinv/config.hpp"
#include "autoinv/harness.hpp"
#include "autoinv/pareto.hpp"
#include "autoinv/serialize.hpp"
#include "oracles.hpp"

using namespace autoinv;

namespace {

struct CriterionResult {
    int id = 0;
    bool passed = false;
    std::string details;
};

std::vector<CriterionResult> g_results;

void run_criterion(int id, const std::string& name, const std::set<int>& wanted,
                   const std::function<std::pair<bool, std::string>()>& body) {
    if (!wanted.empty() && !wanted.count(id)) return;
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult result;
    result.id = id;
    try {
        auto [ok, details] = body();
        result.passed = ok;
        result.details = details;
    } catch (const std::exception& e) {
        result.passed = false;
        result.details = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %2d: %s (%.1fs) %s\n", result.passed ? "PASS" : "FAIL", id,
                name.c_str(), secs, result.details.c_str());
    std::fflush(stdout);
    g_results.push_back(result);
}

std::string fmt2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
}

// ---------------------------------------------------------------------------
// shared desk-scale experiment configurations
// ---------------------------------------------------------------------------

ExperimentConfig robot_benchmark_config(std::uint64_t seed = 2024) {
    ExperimentConfig cfg;
    cfg.nfp = NfpSpec::robot_arm();
    cfg.sample_count = 2000;
    cfg.target_count = 100;
    cfg.repeat_count = 3;
    cfg.no_hyperparam_seeds = 5;
    cfg.seed = seed;

    cfg.surrogate.hidden = {48, 48};
    cfg.surrogate.hidden_act = Activation::relu();
    cfg.surrogate.train.learning_rate = 3e-3;
    cfg.surrogate.train.epochs = 300;
    cfg.surrogate.train.batch_size = 128;

    cfg.ensemble.member_count = 10;
    cfg.ensemble.mean_hidden = {32, 32};
    cfg.ensemble.var_hidden = {16, 16};
    cfg.ensemble.stage1.learning_rate = 3e-3;
    cfg.ensemble.stage1.epochs = 250;
    cfg.ensemble.stage1.batch_size = 128;
    cfg.ensemble.stage2_epochs = 150;

    cfg.inversion.step_size = 0.05;
    cfg.inversion.max_iters = 500;
    cfg.inversion.restarts = 10;
    cfg.inversion.weights = {1.0, 10.0};

    cfg.tandem.base.learning_rate = 3e-3;
    cfg.tandem.base.epochs = 300;
    cfg.tandem.base.batch_size = 128;
    cfg.tandem.candidate_count = 5;
    cfg.tandem.hidden = {48, 48};
    cfg.tandem.weights = {1.0, 10.0};
    return cfg;
}

CorruptionSpec robot_sparse_corruption() {
    CorruptionSpec c;
    c.sparse_regions.push_back(IntervalRegion::dim_above(4, 2, 0.0));
    return c;
}

CorruptionSpec robot_noisy_corruption() {
    CorruptionSpec c;
    c.noise_regions.push_back({IntervalRegion::dim_above(4, 2, 0.0), 0.5});
    return c;
}

EnsembleTrainConfig sine_ensemble_config(std::uint64_t seed) {
    EnsembleTrainConfig cfg;
    cfg.member_count = 6;
    cfg.mean_hidden = {32, 32};
    cfg.var_hidden = {24, 24};
    cfg.stage1.learning_rate = 5e-3;
    cfg.stage1.epochs = 400;
    cfg.stage1.batch_size = 64;
    cfg.stage2_epochs = 300;
    cfg.seed = seed;
    return cfg;
}

double median_nfp(const BenchmarkReport& report, const std::string& method) {
    for (const auto& agg : report.aggregates) {
        if (agg.method == method) {
            if (!agg.error.empty()) throw std::runtime_error(method + " failed: " + agg.error);
            return agg.nfp_median;
        }
    }
    throw std::runtime_error("method missing from report: " + method);
}

// ---------------------------------------------------------------------------
// criteria
// ---------------------------------------------------------------------------

std::pair<bool, std::string> criterion_gradients() {
    Rng rng(90210);
    int nets = 0;
    double worst_input = 0.0;
    double worst_param = 0.0;
    while (nets < 104) {
        for (const auto& act : oracles::all_activations()) {
            const std::size_t in = 1 + rng.index(4);
            const std::size_t out = 1 + rng.index(3);
            const auto net = oracles::random_net(rng, in, out, act);

            std::vector<double> probe;
            try {
                probe = oracles::kink_free_probe(net, rng);
            } catch (...) {
                continue;
            }
            std::vector<double> upstream(out);
            for (double& u : upstream) u = rng.uniform(-1, 1);
            const auto g = grad_wrt_input(net, probe, upstream);
            const auto fd = oracles::fd_input_gradient(net, probe, upstream);
            worst_input = std::max(worst_input, oracles::relative_error(g, fd));

            Matrix bx(2, in);
            Matrix by(2, out);
            bool ok = true;
            for (std::size_t r = 0; r < 2; ++r) {
                try {
                    const auto p = oracles::kink_free_probe(net, rng);
                    std::copy(p.begin(), p.end(), bx.row(r).begin());
                } catch (...) {
                    ok = false;
                    break;
                }
                for (double& t : by.row(r)) t = rng.uniform(-1, 1);
            }
            if (!ok) continue;
            const auto gp = grad_wrt_params(net, bx, by);
            const auto fdp = oracles::fd_param_gradient(net, bx, by);
            worst_param = std::max(worst_param, oracles::relative_error(gp.grad, fdp));
            ++nets;
        }
    }
    const bool ok = worst_input < 1e-5 && worst_param < 1e-5;
    return {ok, std::to_string(nets) + " nets, worst input rel " + fmt2(worst_input) +
                    ", worst param rel " + fmt2(worst_param)};
}

std::pair<bool, std::string> criterion_mixture_oracle() {
    Rng rng(777);
    double worst_mean = 0.0;
    double worst_var = 0.0;
    for (int round = 0; round < 20; ++round) {
        DeepEnsemble ens;
        ens.variance_floor = 1e-6;
        const std::size_t members = 3 + rng.index(5);
        const auto roster = default_roster(members);
        for (std::size_t m = 0; m < members; ++m) {
            EnsembleMember member;
            member.mean_net = oracles::random_net(rng, 2, 1, roster[m]);
            member.var_net = oracles::random_net(rng, 2, 1, roster[m], 1, 4);
            ens.members.push_back(std::move(member));
            ens.roster.push_back(roster[m]);
        }
        std::vector<double> x = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
        auto pred = predict(ens, x);
        const double spread =
            1.0 + 2.0 * std::sqrt(pred.sigma_aleatoric[0] + pred.sigma_epistemic[0]);
        for (auto& member : ens.members) {
            member.mean_net.biases(member.mean_net.layer_count() - 1)[0] += spread;
        }
        pred = predict(ens, x);
        const auto mc = oracles::mc_mixture_moments(ens, x, 1000000, derive_seed(901, round));
        worst_mean = std::max(worst_mean, std::abs(pred.mu[0] - mc.mean[0]) / std::abs(mc.mean[0]));
        const double total = pred.sigma_aleatoric[0] + pred.sigma_epistemic[0];
        worst_var = std::max(worst_var, std::abs(total - mc.variance[0]) / mc.variance[0]);
    }
    const bool ok = worst_mean < 0.01 && worst_var < 0.01;
    return {ok, "20 ensembles, worst mean rel " + fmt2(worst_mean) + ", worst var rel " +
                    fmt2(worst_var)};
}

std::pair<bool, std::string> criterion_decomposition() {
    Rng rng(4711);
    double worst = 0.0;
    for (int e = 0; e < 5; ++e) {
        DeepEnsemble ens;
        ens.variance_floor = 1e-6;
        const auto roster = default_roster(4 + e);
        for (std::size_t m = 0; m < roster.size(); ++m) {
            EnsembleMember member;
            member.mean_net = oracles::random_net(rng, 3, 2, roster[m]);
            member.var_net = oracles::random_net(rng, 3, 2, roster[m], 1, 4);
            ens.members.push_back(std::move(member));
            ens.roster.push_back(roster[m]);
        }
        for (int i = 0; i < 2000; ++i) {
            std::vector<double> x = {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
            const auto pred = predict(ens, x);
            for (std::size_t d = 0; d < 2; ++d) {
                double acc = 0.0;
                double fmu = 0.0;
                for (const auto& member : ens.members) {
                    const auto mu = mlp_forward(member.mean_net, x);
                    const auto raw = mlp_forward(member.var_net, x);
                    acc += Activation::softplus_value(raw[d]) + ens.variance_floor +
                           mu[d] * mu[d];
                    fmu += mu[d];
                }
                const double m = static_cast<double>(ens.member_count());
                const double mixture = acc / m - (fmu / m) * (fmu / m);
                worst = std::max(
                    worst,
                    std::abs(pred.sigma_aleatoric[d] + pred.sigma_epistemic[d] - mixture));
            }
        }
    }
    return {worst < 1e-10, "10000 inputs, worst |identity gap| " + fmt2(worst)};
}

std::pair<bool, std::string> criterion_aleatoric_calibration() {
    NfpSpec spec = NfpSpec::sine1d();
    CorruptionSpec corruption;
    corruption.noise_regions.push_back({IntervalRegion::dim_above(1, 0, 0.0), 0.1});
    const auto data = sample_dataset(spec, 2000, 808, corruption).data;
    const auto ens = train_ensemble(data, sine_ensemble_config(909), nullptr);

    const double y_std = data.performance_norm.std[0];
    const auto x_norm = data.normalized_designs();
    double in_sum = 0.0;
    double out_sum = 0.0;
    std::size_t n_in = 0;
    std::size_t n_out = 0;
    for (std::size_t r = 0; r < data.size(); ++r) {
        const double sa = std::sqrt(predict(ens, x_norm.row(r)).sigma_aleatoric[0]) * y_std;
        if (data.designs.at(r, 0) > 0.0) {
            in_sum += sa;
            ++n_in;
        } else {
            out_sum += sa;
            ++n_out;
        }
    }
    const double in_std = in_sum / static_cast<double>(n_in);
    const double out_std = out_sum / static_cast<double>(n_out);
    const bool ok = in_std >= 0.05 && in_std <= 0.2 && in_std >= 5.0 * out_std;
    return {ok, "in-region sqrt(F_sA) " + fmt2(in_std) + " (want [0.05,0.2]), out-region " +
                    fmt2(out_std) + ", ratio " + fmt2(in_std / out_std)};
}

std::pair<bool, std::string> criterion_epistemic_extrapolation() {
    const auto data = sample_dataset(NfpSpec::sine1d(), 800, 303).data;
    const auto ens = train_ensemble(data, sine_ensemble_config(404), nullptr);
    std::vector<double> lo;
    std::vector<double> hi;
    data.normalized_design_box(lo, hi);
    const double width = hi[0] - lo[0];

    std::vector<double> interior;
    std::vector<double> outside;
    for (int i = 0; i <= 50; ++i) {
        const double t = static_cast<double>(i) / 50.0;
        interior.push_back(predict(ens, std::vector<double>{lo[0] + t * width}).sigma_epistemic[0]);
        // 2x the box width beyond both edges
        outside.push_back(
            predict(ens, std::vector<double>{hi[0] + 2.0 * width * (0.5 + 0.5 * t)})
                .sigma_epistemic[0]);
        outside.push_back(
            predict(ens, std::vector<double>{lo[0] - 2.0 * width * (0.5 + 0.5 * t)})
                .sigma_epistemic[0]);
    }
    const double med_in = median_of(interior);
    const double med_out = median_of(outside);
    const bool ok = med_out >= 10.0 * med_in;
    return {ok, "median F_sE outside " + fmt2(med_out) + " vs interior " + fmt2(med_in) +
                    " (ratio " + fmt2(med_out / med_in) + ", want >= 10)"};
}

std::pair<bool, std::string> criterion_table1_ordering() {
    const auto cfg = robot_benchmark_config();
    const auto report = run_benchmark(cfg);
    const double na = median_nfp(report, "na");
    const double uana = median_nfp(report, "uana");
    const double naens = median_nfp(report, "na-ensemble");
    const double tandem = median_nfp(report, "tandem");
    const double uat = median_nfp(report, "ua-tandem");

    const bool ok = naens >= 2.0 * uana && na >= naens && tandem >= 2.0 * uat && uana <= 1e-2;
    return {ok, "median NFP: na " + fmt2(na) + ", na-ensemble " + fmt2(naens) + ", uana " +
                    fmt2(uana) + ", tandem " + fmt2(tandem) + ", ua-tandem " + fmt2(uat)};
}

std::pair<bool, std::string> criterion_avoidance() {
    const std::size_t flagged = 2;  // third design component (second joint)
    const double threshold = 0.4;

    auto sparse_cfg = robot_benchmark_config(606);
    sparse_cfg.corruption = robot_sparse_corruption();
    sparse_cfg.repeat_count = 1;
    const auto sparse = avoidance_study(sparse_cfg, flagged, threshold,
                                        {Method::UANA, Method::UATandem}, "sparse");

    auto noisy_cfg = robot_benchmark_config(707);
    noisy_cfg.corruption = robot_noisy_corruption();
    noisy_cfg.repeat_count = 1;
    const auto noisy =
        avoidance_study(noisy_cfg, flagged, threshold, {Method::NA, Method::UANA}, "noisy");

    std::size_t sparse_uana = 0;
    std::size_t sparse_uat = 0;
    for (const auto& rep : sparse) {
        if (rep.method == "uana") sparse_uana = rep.counts[flagged];
        if (rep.method == "ua-tandem") sparse_uat = rep.counts[flagged];
    }
    std::size_t noisy_na = 0;
    std::size_t noisy_uana = 0;
    for (const auto& rep : noisy) {
        if (rep.method == "na") noisy_na = rep.counts[flagged];
        if (rep.method == "uana") noisy_uana = rep.counts[flagged];
    }
    const double t = static_cast<double>(noisy_cfg.target_count);
    const bool ok = sparse_uana == 0 && sparse_uat == 0 &&
                    static_cast<double>(noisy_uana) <= 0.01 * t &&
                    static_cast<double>(noisy_na) >= 0.10 * t;
    return {ok, "sparse: uana " + std::to_string(sparse_uana) + ", ua-tandem " +
                    std::to_string(sparse_uat) + " | noisy: uana " + std::to_string(noisy_uana) +
                    ", na " + std::to_string(noisy_na) + " of " +
                    std::to_string(noisy_cfg.target_count)};
}

// normalized data box of the first repeat's dataset
struct RepeatContextProbe {
    std::vector<double> lo;
    std::vector<double> hi;
};

RepeatContextProbe repeat_box(const ExperimentConfig& cfg) {
    const auto sampled =
        sample_dataset(cfg.nfp, cfg.sample_count,
                       derive_seed(derive_seed(cfg.seed, 0x72657074ULL, 0), 0x64617461ULL),
                       cfg.corruption);
    RepeatContextProbe probe;
    sampled.data.normalized_design_box(probe.lo, probe.hi);
    return probe;
}

struct BoxStudy {
    double uana_violation_rate = 0.0;
    double na_violation_rate = 0.0;
};

BoxStudy run_box_study(const ExperimentConfig& cfg) {
    const auto report = run_benchmark(cfg, {Method::NA, Method::UANA});
    // recover the per-repeat data boxes (raw design space)
    std::vector<std::vector<double>> lo(cfg.repeat_count);
    std::vector<std::vector<double>> hi(cfg.repeat_count);
    for (std::size_t r = 0; r < cfg.repeat_count; ++r) {
        const auto sampled =
            sample_dataset(cfg.nfp, cfg.sample_count,
                           derive_seed(derive_seed(cfg.seed, 0x72657074ULL, r), 0x64617461ULL),
                           cfg.corruption);
        lo[r].assign(cfg.nfp.design_dim(), std::numeric_limits<double>::infinity());
        hi[r].assign(cfg.nfp.design_dim(), -std::numeric_limits<double>::infinity());
        for (std::size_t i = 0; i < sampled.data.size(); ++i) {
            for (std::size_t d = 0; d < cfg.nfp.design_dim(); ++d) {
                lo[r][d] = std::min(lo[r][d], sampled.data.designs.at(i, d));
                hi[r][d] = std::max(hi[r][d], sampled.data.designs.at(i, d));
            }
        }
    }
    std::size_t na_total = 0;
    std::size_t na_violations = 0;
    std::size_t uana_total = 0;
    std::size_t uana_violations = 0;
    for (const auto& row : report.rows) {
        bool outside = false;
        for (std::size_t d = 0; d < row.design.size(); ++d) {
            if (row.design[d] < lo[row.repeat][d] || row.design[d] > hi[row.repeat][d]) {
                outside = true;
            }
        }
        if (row.method == "na") {
            ++na_total;
            na_violations += outside ? 1 : 0;
        } else if (row.method == "uana") {
            ++uana_total;
            uana_violations += outside ? 1 : 0;
        }
    }
    BoxStudy study;
    study.na_violation_rate =
        static_cast<double>(na_violations) / static_cast<double>(std::max<std::size_t>(1, na_total));
    study.uana_violation_rate = static_cast<double>(uana_violations) /
                                static_cast<double>(std::max<std::size_t>(1, uana_total));
    return study;
}

std::pair<bool, std::string> criterion_feasibility() {
    auto cfg = robot_benchmark_config(1313);
    cfg.repeat_count = 1;
    cfg.no_hyperparam_seeds = 1;
    const auto study = run_box_study(cfg);
    const bool ok = study.uana_violation_rate == 0.0 && study.na_violation_rate >= 0.20;
    return {ok, "box violations: uana " + fmt2(100.0 * study.uana_violation_rate) + "%, na " +
                    fmt2(100.0 * study.na_violation_rate) + "% (want 0% and >= 20%)"};
}

std::pair<bool, std::string> criterion_init_robustness() {
    // single-trajectory solves isolate the initialization effect: both init
    // modes run with one restart and identical method settings. The NA
    // surrogate is in the interpolation regime here (params ~ samples), the
    // ensemble gets the matching budget.
    auto cfg = robot_benchmark_config(1414);
    cfg.repeat_count = 3;
    cfg.no_hyperparam_seeds = 1;
    cfg.target_count = 60;
    cfg.sample_count = 3000;
    cfg.surrogate.hidden = {128, 128};
    cfg.surrogate.train.epochs = 400;
    cfg.ensemble.mean_hidden = {48, 48};
    cfg.ensemble.stage1.epochs = 400;
    cfg.ensemble.stage2_epochs = 250;
    cfg.inversion.restarts = 1;
    cfg.inversion.max_iters = 2000;

    const auto in_box = run_benchmark(cfg, {Method::NA, Method::UANA});
    const double na_in = median_nfp(in_box, "na");
    const double uana_in = median_nfp(in_box, "uana");

    // fixed init 5 box-widths beyond the data box along the base dimension;
    // the long walk back needs a bigger iteration budget than the in-box runs
    auto far_cfg = cfg;
    {
        const RepeatContextProbe probe = repeat_box(cfg);
        std::vector<double> point(4, 0.0);
        point[0] = probe.hi[0] + 5.0 * (probe.hi[0] - probe.lo[0]);
        far_cfg.inversion.init = InitSpec::fixed(point);
    }
    far_cfg.inversion.max_iters = 8000;
    const auto far = run_benchmark(far_cfg, {Method::NA, Method::UANA});
    const double na_far = median_nfp(far, "na");
    const double uana_far = median_nfp(far, "uana");

    const bool ok = uana_far <= 2.0 * uana_in && na_far > 10.0 * na_in;
    return {ok, "uana " + fmt2(uana_in) + " -> " + fmt2(uana_far) + " (x" +
                    fmt2(uana_far / uana_in) + "), na " + fmt2(na_in) + " -> " + fmt2(na_far) +
                    " (x" + fmt2(na_far / na_in) + ")"};
}

std::pair<bool, std::string> criterion_regularizers() {
    // closed forms
    const std::vector<double> mu = {0.0};
    const std::vector<double> range = {2.0};
    bool ok = boundary_loss(std::vector<double>{0.7}, mu, range).first == 0.0;
    ok = ok && boundary_loss(std::vector<double>{2.0}, mu, range).first == 1.0;
    ok = ok && boundary_loss(std::vector<double>{2.0}, mu, range).second[0] == 1.0;
    ok = ok && boundary_loss(std::vector<double>{-3.0}, mu, range).first == 2.0;
    ok = ok && boundary_loss(std::vector<double>{-3.0}, mu, range).second[0] == -1.0;
    ok = ok && smoothness_reg(std::vector<double>{0.0, 1.0, 0.0}, {}).first == 1.0;
    ok = ok && smoothness_reg(std::vector<double>{0.0, 0.5, 1.0}, {}).first == 0.0;

    // finite-difference gradients
    Rng rng(31337);
    double worst = 0.0;
    for (int round = 0; round < 20; ++round) {
        std::vector<double> x(7);
        for (double& v : x) v = rng.uniform(-2, 2);
        const std::vector<std::size_t> skips = {3};
        const auto [sl, sg] = smoothness_reg(x, skips);
        (void)sl;
        const auto sfd = oracles::fd_gradient(
            [&](std::span<const double> p) { return smoothness_reg(p, skips).first; }, x, 1e-6);
        worst = std::max(worst, oracles::relative_error(sg, sfd));

        std::vector<double> bmu(7, 0.1);
        std::vector<double> brange(7, 1.3);
        bool near_hinge = false;
        for (std::size_t d = 0; d < 7; ++d) {
            if (std::abs(std::abs(x[d] - bmu[d]) - 0.5 * brange[d]) < 1e-3) near_hinge = true;
        }
        if (near_hinge) continue;
        const auto [bl, bg] = boundary_loss(x, bmu, brange);
        (void)bl;
        const auto bfd = oracles::fd_gradient(
            [&](std::span<const double> p) { return boundary_loss(p, bmu, brange).first; }, x,
            1e-6);
        for (std::size_t d = 0; d < 7; ++d) {
            worst = std::max(worst, std::abs(bg[d] - bfd[d]));
        }
    }
    ok = ok && worst < 1e-6;
    return {ok, "hand cases exact, worst FD gap " + fmt2(worst)};
}

std::pair<bool, std::string> criterion_nsga2() {
    // sort oracle on 100 random instances
    Rng rng(515);
    for (int round = 0; round < 100; ++round) {
        std::vector<Individual> pop;
        const std::size_t n = 10 + rng.index(190);
        for (std::size_t i = 0; i < n; ++i) {
            Individual ind;
            ind.mse = rng.uniform(0, 1);
            ind.uncertainty_score = rng.uniform(0, 1);
            pop.push_back(ind);
        }
        auto got = non_dominated_sort(pop);
        auto want = oracles::brute_force_fronts(pop);
        if (got.size() != want.size()) return {false, "front count mismatch vs oracle"};
        for (std::size_t f = 0; f < got.size(); ++f) {
            std::sort(got[f].begin(), got[f].end());
            std::sort(want[f].begin(), want[f].end());
            if (got[f] != want[f]) return {false, "front membership mismatch vs oracle"};
        }
    }

    // robot ensemble + three targets at pop 200 x 50 generations
    const auto sampled = sample_dataset(NfpSpec::robot_arm(), 1500, 616);
    EnsembleTrainConfig ec;
    ec.member_count = 5;
    ec.mean_hidden = {24, 24};
    ec.var_hidden = {12, 12};
    ec.stage1.learning_rate = 3e-3;
    ec.stage1.epochs = 200;
    ec.stage1.batch_size = 128;
    ec.stage2_epochs = 120;
    ec.seed = 717;
    const auto ens = train_ensemble(sampled.data, ec);

    std::vector<double> lo;
    std::vector<double> hi;
    sampled.data.normalized_design_box(lo, hi);
    Nsga2Config nc;
    nc.population = 200;
    nc.generations = 50;
    nc.seed = 818;
    nc.bounds_lo = lo;
    nc.bounds_hi = hi;
    for (std::size_t d = 0; d < lo.size(); ++d) {
        const double pad = 0.05 * (hi[d] - lo[d]);
        nc.bounds_lo[d] -= pad;
        nc.bounds_hi[d] += pad;
    }

    const auto targets = sample_performance_targets(NfpSpec::robot_arm(), 3, 919);
    int conflicts = 0;
    for (std::size_t t = 0; t < targets.rows; ++t) {
        const auto y_norm = sampled.data.performance_norm.normalize(targets.row(t));
        const auto front = nsga2_run(ens, y_norm, {1.0, 10.0}, nc);
        if (front.empty()) return {false, "empty front"};
        for (std::size_t i = 0; i < front.size(); ++i) {
            for (std::size_t j = 0; j < front.size(); ++j) {
                if (i != j && dominates(front[i], front[j])) {
                    return {false, "front not mutually non-dominated"};
                }
            }
        }
        std::size_t min_mse = 0;
        std::size_t min_unc = 0;
        for (std::size_t i = 1; i < front.size(); ++i) {
            if (front[i].mse < front[min_mse].mse) min_mse = i;
            if (front[i].uncertainty_score < front[min_unc].uncertainty_score) min_unc = i;
        }
        if (front[min_mse].uncertainty_score > front[min_unc].uncertainty_score &&
            front[min_mse].mse < front[min_unc].mse) {
            ++conflicts;
        }
    }
    const bool ok = conflicts == static_cast<int>(targets.rows);
    return {ok, "sort oracle 100/100, conflicting fronts " + std::to_string(conflicts) + "/3"};
}

std::pair<bool, std::string> criterion_reduction_identities() {
    Rng rng(626);
    EnsembleMember member;
    member.mean_net = oracles::random_net(rng, 3, 2, Activation::tanh());
    member.var_net = oracles::random_net(rng, 3, 2, Activation::tanh(), 1, 4);
    const auto ens = clone_ensemble(member, 2);
    const std::vector<double> target = {0.25, -0.4};

    InversionConfig cfg;
    cfg.step_size = 0.03;
    cfg.max_iters = 200;
    cfg.restarts = 4;
    cfg.seed = 828;
    cfg.box_lo.assign(3, -1.5);
    cfg.box_hi.assign(3, 1.5);
    cfg.record_trace = true;

    const auto na = na_invert(member.mean_net, target, cfg);
    const auto naens = na_ensemble_invert(ens, target, cfg);
    InversionConfig zero = cfg;
    zero.weights = {0.0, 0.0};
    const auto uana = uana_invert(ens, target, zero);

    bool ok = na.traces == naens.traces && na.traces == uana.traces &&
              na.best.design == naens.best.design && na.best.design == uana.best.design;

    // ua-tandem(0,0) on the clone matches tandem bitwise
    Matrix targets(48, 2);
    for (double& v : targets.data) v = rng.uniform(-0.8, 0.8);
    TandemTrainConfig tc;
    tc.base.learning_rate = 3e-3;
    tc.base.epochs = 60;
    tc.base.batch_size = 16;
    tc.base.seed = 929;
    tc.hidden = {12, 12};
    const auto plain = train_tandem(member.mean_net, targets, tc);
    TandemTrainConfig tz = tc;
    tz.weights = {0.0, 0.0};
    const auto ua = train_ua_tandem(ens, targets, tz);
    ok = ok && plain.loss_history == ua.loss_history &&
         plain.inverse.net.params == ua.inverse.net.params;
    return {ok, ok ? "all traces and parameters bitwise identical" : "bitwise mismatch"};
}

std::pair<bool, std::string> criterion_ensemble_size_trend() {
    auto cfg = robot_benchmark_config(3030);
    cfg.corruption = robot_noisy_corruption();
    cfg.repeat_count = 3;
    cfg.target_count = 40;
    cfg.inversion.restarts = 8;
    cfg.inversion.max_iters = 400;
    const auto rows = ensemble_size_ablation(cfg, {2, 10});
    double m2 = 0.0;
    double m10 = 0.0;
    for (const auto& row : rows) {
        if (row.members == 2) m2 = row.nfp_error_median;
        if (row.members == 10) m10 = row.nfp_error_median;
    }
    return {m10 <= m2, "median NFP error M=10 " + fmt2(m10) + " vs M=2 " + fmt2(m2)};
}

std::pair<bool, std::string> criterion_activation_diversity() {
    const std::size_t flagged = 2;
    const double threshold = 0.4;
    auto cfg = robot_benchmark_config(606);  // same setup as criterion 7
    cfg.corruption = robot_sparse_corruption();
    cfg.repeat_count = 1;

    const auto diverse = avoidance_study(cfg, flagged, threshold, {Method::UANA}, "sparse");

    auto relu_cfg = cfg;
    relu_cfg.ensemble.roster.assign(relu_cfg.ensemble.member_count, Activation::relu());
    const auto relu_only =
        avoidance_study(relu_cfg, flagged, threshold, {Method::UANA}, "sparse");

    const std::size_t diverse_count = diverse[0].counts[flagged];
    const std::size_t relu_count = relu_only[0].counts[flagged];
    return {relu_count > diverse_count, "sparse-region hits: relu-only " +
                                            std::to_string(relu_count) + " vs diverse roster " +
                                            std::to_string(diverse_count)};
}

std::pair<bool, std::string> criterion_bench_determinism() {
    const char* cli = std::getenv("AUTOINV_CLI");
    if (!cli) return {false, "AUTOINV_CLI not set"};

    const auto dir = std::filesystem::temp_directory_path() / "autoinv_determinism";
    std::filesystem::create_directories(dir);
    const auto config_path = (dir / "bench.json").string();
    {
        std::ofstream out(config_path);
        out << R"({
  "nfp": {"kind": "robot_arm"},
  "sample_count": 600,
  "target_count": 6,
  "repeat_count": 1,
  "no_hyperparam_seeds": 2,
  "seed": 4242,
  "surrogate": {"hidden": [24, 24], "train": {"learning_rate": 3e-3, "epochs": 80, "batch_size": 128}},
  "ensemble": {"members": 4, "mean_hidden": [16, 16], "var_hidden": [8],
               "stage1": {"learning_rate": 3e-3, "epochs": 80, "batch_size": 128},
               "stage2_epochs": 40},
  "inversion": {"step_size": 0.05, "max_iters": 120, "restarts": 3, "alpha": 1.0, "beta": 10.0},
  "tandem": {"train": {"learning_rate": 3e-3, "epochs": 80, "batch_size": 128},
             "candidates": 2, "hidden": [16, 16], "alpha": 1.0, "beta": 10.0}
})";
    }
    auto run_once = [&](const std::string& csv) {
        const std::string cmd = std::string(cli) + " bench --config " + config_path +
                                " --out-csv " + csv + " > /dev/null 2>&1";
        return std::system(cmd.c_str()) == 0;
    };
    const auto csv_a = (dir / "a.csv").string();
    const auto csv_b = (dir / "b.csv").string();
    if (!run_once(csv_a) || !run_once(csv_b)) return {false, "bench run failed"};

    std::ifstream fa(csv_a, std::ios::binary);
    std::ifstream fb(csv_b, std::ios::binary);
    std::stringstream sa;
    std::stringstream sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    const bool identical = sa.str() == sb.str() && !sa.str().empty();
    return {identical, identical ? "two bench runs emitted byte-identical CSV"
                                 : "CSV outputs differ"};
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

    run_criterion(1, "gradient correctness vs finite differences", wanted, criterion_gradients);
    run_criterion(2, "mixture-moment Monte-Carlo oracle", wanted, criterion_mixture_oracle);
    run_criterion(3, "aleatoric/epistemic decomposition identity", wanted, criterion_decomposition);
    run_criterion(4, "aleatoric calibration on region-noisy sine", wanted,
                  criterion_aleatoric_calibration);
    run_criterion(5, "epistemic extrapolation growth", wanted, criterion_epistemic_extrapolation);
    run_criterion(6, "benchmark ordering on the robot arm", wanted, criterion_table1_ordering);
    run_criterion(7, "sparse/noisy avoidance counts", wanted, criterion_avoidance);
    run_criterion(8, "feasibility without regularizers", wanted, criterion_feasibility);
    run_criterion(9, "initialization robustness", wanted, criterion_init_robustness);
    run_criterion(10, "regularizer closed forms and gradients", wanted, criterion_regularizers);
    run_criterion(11, "NSGA-II front validity and conflict", wanted, criterion_nsga2);
    run_criterion(12, "reduction identities (bitwise)", wanted, criterion_reduction_identities);
    run_criterion(13, "ensemble-size trend on noisy robot", wanted, criterion_ensemble_size_trend);
    run_criterion(14, "activation-diversity ablation", wanted, criterion_activation_diversity);
    run_criterion(15, "bench determinism (byte-identical CSV)", wanted,
                  criterion_bench_determinism);

    int failures = 0;
    for (const auto& r : g_results) failures += r.passed ? 0 : 1;
    std::printf("%zu criteria run, %d failed\n", g_results.size(), failures);
    return failures == 0 ? 0 : 1;
}
