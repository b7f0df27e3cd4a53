#include "autoinv/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "autoinv/errors.hpp"
#include "autoinv/serialize.hpp"

namespace autoinv {

using nlohmann::json;

std::string method_name(Method m) {
    switch (m) {
        case Method::NA: return "na";
        case Method::UANA: return "uana";
        case Method::NAEnsemble: return "na-ensemble";
        case Method::Tandem: return "tandem";
        case Method::UATandem: return "ua-tandem";
    }
    return "?";
}

Method method_from_name(const std::string& name) {
    for (Method m : all_methods()) {
        if (method_name(m) == name) return m;
    }
    throw std::invalid_argument("unknown method: " + name);
}

std::vector<Method> all_methods() {
    return {Method::NA, Method::UANA, Method::NAEnsemble, Method::Tandem, Method::UATandem};
}

void ExperimentConfig::validate() const {
    nfp.validate();
    corruption.validate(nfp.design_dim());
    if (sample_count < 1) throw std::invalid_argument("ExperimentConfig: sample_count must be >= 1");
    if (target_count < 1) throw std::invalid_argument("ExperimentConfig: target_count must be >= 1");
    if (repeat_count < 1) throw std::invalid_argument("ExperimentConfig: repeat_count must be >= 1");
    if (no_hyperparam_seeds < 1) {
        throw std::invalid_argument("ExperimentConfig: no_hyperparam_seeds must be >= 1");
    }
    surrogate.train.validate();
    ensemble.validate();
    tandem.validate();
}

std::size_t ExperimentConfig::validation_count() const {
    const auto v = static_cast<std::size_t>(validation_fraction * static_cast<double>(target_count));
    return std::max<std::size_t>(1, v);
}

namespace {

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double mean(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc / static_cast<double>(values.size());
}

double sample_std(const std::vector<double>& values, double mu) {
    if (values.size() < 2) return 0.0;
    double acc = 0.0;
    for (double v : values) acc += (v - mu) * (v - mu);
    return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

struct RepeatContext {
    std::uint64_t seed = 0;
    SampledDataset sampled;
    Matrix targets_raw;
    Matrix targets_norm;
    InversionConfig inversion;  // data box filled in
};

RepeatContext make_repeat(const ExperimentConfig& cfg, std::size_t repeat) {
    RepeatContext ctx;
    ctx.seed = derive_seed(cfg.seed, 0x72657074ULL, repeat);
    ctx.sampled = sample_dataset(cfg.nfp, cfg.sample_count, derive_seed(ctx.seed, 0x64617461ULL),
                                 cfg.corruption);
    ctx.targets_raw =
        sample_performance_targets(cfg.nfp, cfg.target_count, derive_seed(ctx.seed, 0x74617267ULL));
    ctx.targets_norm = ctx.sampled.data.performance_norm.normalize_rows(ctx.targets_raw);
    ctx.inversion = cfg.inversion;
    ctx.sampled.data.normalized_design_box(ctx.inversion.box_lo, ctx.inversion.box_hi);
    return ctx;
}

Matrix head_rows(const Matrix& m, std::size_t n) {
    Matrix out(std::min(n, m.rows), m.cols);
    std::copy_n(m.data.begin(), out.rows * out.cols, out.data.begin());
    return out;
}

Mlp train_forward_net(const ExperimentConfig& cfg, const Dataset& data, std::uint64_t seed) {
    Mlp net = Mlp::make(data.design_dim(), cfg.surrogate.hidden, data.performance_dim(),
                        cfg.surrogate.hidden_act);
    Rng rng(derive_seed(seed, 0x696e6974ULL));
    net.init_glorot(rng);
    TrainConfig tc = cfg.surrogate.train;
    tc.seed = derive_seed(seed, 0x7472616eULL);
    train_mse(net, data, tc);
    return net;
}

// Models trained once per repeat and shared between the methods that use
// them (the tandem forward net is the first NA candidate; UA-tandem and
// NA-ensemble reuse UANA's ensemble as their first candidate).
struct RepeatModels {
    std::vector<Mlp> forward_nets;
    std::optional<DeepEnsemble> main_ensemble;
    std::vector<DeepEnsemble> extra_ensembles;

    const Mlp& forward_net(const ExperimentConfig& cfg, const RepeatContext& ctx, std::size_t i) {
        while (forward_nets.size() <= i) {
            forward_nets.push_back(train_forward_net(
                cfg, ctx.sampled.data,
                derive_seed(ctx.seed, 0x666f7277ULL, forward_nets.size())));
        }
        return forward_nets[i];
    }

    const DeepEnsemble& ensemble(const ExperimentConfig& cfg, const RepeatContext& ctx) {
        if (!main_ensemble) {
            EnsembleTrainConfig ec = cfg.ensemble;
            ec.seed = derive_seed(ctx.seed, 0x656e7330ULL);
            ec.threads = cfg.threads;
            main_ensemble = train_ensemble(ctx.sampled.data, ec);
        }
        return *main_ensemble;
    }

    const DeepEnsemble& ensemble_candidate(const ExperimentConfig& cfg, const RepeatContext& ctx,
                                           std::size_t i) {
        if (i == 0) return ensemble(cfg, ctx);
        while (extra_ensembles.size() < i) {
            EnsembleTrainConfig ec = cfg.ensemble;
            ec.seed = derive_seed(ctx.seed, 0x656e7330ULL, extra_ensembles.size() + 1);
            ec.threads = cfg.threads;
            extra_ensembles.push_back(train_ensemble(ctx.sampled.data, ec));
        }
        return extra_ensembles[i - 1];
    }
};

double mean_nfp_error_for_designs(const ExperimentConfig& cfg, const RepeatContext& ctx,
                                  const Matrix& designs_norm, const Matrix& targets_raw) {
    double acc = 0.0;
    for (std::size_t t = 0; t < designs_norm.rows; ++t) {
        const auto raw = ctx.sampled.data.design_norm.denormalize(designs_norm.row(t));
        acc += nfp_error(cfg.nfp, raw, targets_raw.row(t), ctx.sampled.data.performance_norm);
    }
    return acc / static_cast<double>(designs_norm.rows);
}

Matrix designs_from_outcomes(const std::vector<InversionOutcome>& outcomes, std::size_t dims) {
    Matrix designs(outcomes.size(), dims);
    for (std::size_t t = 0; t < outcomes.size(); ++t) {
        std::copy(outcomes[t].best.design.begin(), outcomes[t].best.design.end(),
                  designs.row(t).begin());
    }
    return designs;
}

struct MethodRunOutput {
    std::vector<ReportRow> rows;
};

ReportRow make_row(const ExperimentConfig& cfg, const RepeatContext& ctx, Method method,
                   std::size_t repeat, std::size_t target, std::span<const double> design_norm,
                   double surr_err, const Prediction* pred, std::size_t restart_index) {
    ReportRow row;
    row.method = method_name(method);
    row.repeat = repeat;
    row.target_id = target;
    row.design = ctx.sampled.data.design_norm.denormalize(design_norm);
    row.surrogate_error = surr_err;
    row.nfp_error =
        nfp_error(cfg.nfp, row.design, ctx.targets_raw.row(target), ctx.sampled.data.performance_norm);
    if (pred) {
        for (double v : pred->sigma_aleatoric) row.sigma_aleatoric_sum += v;
        for (double v : pred->sigma_epistemic) row.sigma_epistemic_sum += v;
    }
    row.seed = ctx.seed;
    row.restart_index = restart_index;
    return row;
}

MethodRunOutput run_na(const ExperimentConfig& cfg, const RepeatContext& ctx, RepeatModels& models,
                       std::size_t repeat) {
    const std::size_t v = ctx.targets_norm.rows < 2 ? 1 : cfg.validation_count();
    const Matrix validation_norm = head_rows(ctx.targets_norm, v);
    const Matrix validation_raw = head_rows(ctx.targets_raw, v);

    std::size_t best = 0;
    if (cfg.no_hyperparam_seeds > 1) {
        double best_err = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < cfg.no_hyperparam_seeds; ++s) {
            InversionConfig inv = ctx.inversion;
            inv.seed = derive_seed(ctx.seed, 0x6e617631ULL, s);
            const auto outcomes =
                na_invert_batch(models.forward_net(cfg, ctx, s), validation_norm, inv, cfg.threads);
            const double err = mean_nfp_error_for_designs(
                cfg, ctx, designs_from_outcomes(outcomes, ctx.sampled.data.design_dim()),
                validation_raw);
            if (err < best_err) {
                best_err = err;
                best = s;
            }
        }
    }

    const Mlp& net = models.forward_net(cfg, ctx, best);
    InversionConfig inv = ctx.inversion;
    inv.seed = derive_seed(ctx.seed, 0x6e617232ULL);
    const auto t0 = std::chrono::steady_clock::now();
    const auto outcomes = na_invert_batch(net, ctx.targets_norm, inv, cfg.threads);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    MethodRunOutput out;
    for (std::size_t t = 0; t < outcomes.size(); ++t) {
        const auto& bestc = outcomes[t].best;
        ReportRow row = make_row(cfg, ctx, Method::NA, repeat, t, bestc.design,
                                 surrogate_error(net, bestc.design, ctx.targets_norm.row(t)),
                                 nullptr, bestc.restart_index);
        row.wall_time_s = elapsed / static_cast<double>(outcomes.size());
        out.rows.push_back(std::move(row));
    }
    return out;
}

MethodRunOutput run_ensemble_inversion(const ExperimentConfig& cfg, const RepeatContext& ctx,
                                       RepeatModels& models, std::size_t repeat, Method method) {
    MethodRunOutput out;
    const bool uncertainty_aware = method == Method::UANA;

    std::size_t best = 0;
    if (!uncertainty_aware && cfg.no_hyperparam_seeds > 1) {
        const std::size_t v = ctx.targets_norm.rows < 2 ? 1 : cfg.validation_count();
        const Matrix validation_norm = head_rows(ctx.targets_norm, v);
        const Matrix validation_raw = head_rows(ctx.targets_raw, v);
        double best_err = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < cfg.no_hyperparam_seeds; ++s) {
            InversionConfig inv = ctx.inversion;
            inv.seed = derive_seed(ctx.seed, 0x6e656e31ULL, s);
            const auto outcomes = na_ensemble_invert_batch(models.ensemble_candidate(cfg, ctx, s),
                                                           validation_norm, inv, cfg.threads);
            const double err = mean_nfp_error_for_designs(
                cfg, ctx, designs_from_outcomes(outcomes, ctx.sampled.data.design_dim()),
                validation_raw);
            if (err < best_err) {
                best_err = err;
                best = s;
            }
        }
    }

    const DeepEnsemble& ens = uncertainty_aware ? models.ensemble(cfg, ctx)
                                                : models.ensemble_candidate(cfg, ctx, best);
    InversionConfig inv = ctx.inversion;
    inv.seed = derive_seed(ctx.seed, uncertainty_aware ? 0x75616e61ULL : 0x6e656e32ULL);
    const auto t0 = std::chrono::steady_clock::now();
    const auto outcomes = uncertainty_aware
                              ? uana_invert_batch(ens, ctx.targets_norm, inv, cfg.threads)
                              : na_ensemble_invert_batch(ens, ctx.targets_norm, inv, cfg.threads);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    for (std::size_t t = 0; t < outcomes.size(); ++t) {
        const auto& bestc = outcomes[t].best;
        ReportRow row = make_row(cfg, ctx, method, repeat, t, bestc.design,
                                 surrogate_error(ens, bestc.design, ctx.targets_norm.row(t)),
                                 &bestc.uncertainty, bestc.restart_index);
        row.wall_time_s = elapsed / static_cast<double>(outcomes.size());
        out.rows.push_back(std::move(row));
    }
    return out;
}

MethodRunOutput run_tandem_method(const ExperimentConfig& cfg, const RepeatContext& ctx,
                                  RepeatModels& models, std::size_t repeat, Method method) {
    const bool uncertainty_aware = method == Method::UATandem;
    const Matrix train_targets = ctx.sampled.data.normalized_performances();
    const std::size_t v = ctx.targets_norm.rows < 2 ? 1 : cfg.validation_count();
    const Matrix validation_norm = head_rows(ctx.targets_norm, v);

    std::vector<InverseNet> candidates;
    for (std::size_t c = 0; c < cfg.tandem.candidate_count; ++c) {
        TandemTrainConfig tc = cfg.tandem;
        tc.base.seed = derive_seed(ctx.seed, uncertainty_aware ? 0x75617463ULL : 0x74616e63ULL, c);
        if (uncertainty_aware) {
            candidates.push_back(
                train_ua_tandem(models.ensemble(cfg, ctx), train_targets, tc).inverse);
        } else {
            tc.weights = UncertaintyWeights{};
            candidates.push_back(
                train_tandem(models.forward_net(cfg, ctx, 0), train_targets, tc).inverse);
        }
    }
    const auto selection =
        select_inverse_model(candidates, cfg.nfp, validation_norm, ctx.sampled.data.design_norm,
                             ctx.sampled.data.performance_norm);
    const InverseNet& inverse = candidates[selection.best_index];

    const auto t0 = std::chrono::steady_clock::now();
    const Matrix designs = query_batch(inverse, ctx.targets_norm);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    MethodRunOutput out;
    for (std::size_t t = 0; t < designs.rows; ++t) {
        double surr = 0.0;
        Prediction pred;
        const Prediction* pred_ptr = nullptr;
        if (uncertainty_aware) {
            const auto& ens = models.ensemble(cfg, ctx);
            pred = predict(ens, designs.row(t));
            surr = performance_mse(pred.mu, ctx.targets_norm.row(t));
            pred_ptr = &pred;
        } else {
            surr = surrogate_error(models.forward_net(cfg, ctx, 0), designs.row(t),
                                   ctx.targets_norm.row(t));
        }
        ReportRow row = make_row(cfg, ctx, method, repeat, t, designs.row(t), surr, pred_ptr,
                                 selection.best_index);
        row.wall_time_s = elapsed / static_cast<double>(designs.rows);
        out.rows.push_back(std::move(row));
    }
    return out;
}

}  // namespace

BenchmarkReport run_benchmark(const ExperimentConfig& cfg) {
    return run_benchmark(cfg, all_methods());
}

BenchmarkReport run_benchmark(const ExperimentConfig& cfg, const std::vector<Method>& methods) {
    cfg.validate();
    BenchmarkReport report;
    struct PerMethod {
        std::vector<double> repeat_nfp_means;
        std::vector<double> repeat_surr_means;
        std::vector<double> all_nfp;
        std::vector<double> all_surr;
        std::string error;
    };
    std::vector<PerMethod> stats(methods.size());

    for (std::size_t r = 0; r < cfg.repeat_count; ++r) {
        const RepeatContext ctx = make_repeat(cfg, r);
        report.targets_per_repeat.push_back(ctx.targets_raw);
        RepeatModels models;
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            const Method m = methods[mi];
            try {
                MethodRunOutput out;
                switch (m) {
                    case Method::NA: out = run_na(cfg, ctx, models, r); break;
                    case Method::UANA:
                    case Method::NAEnsemble:
                        out = run_ensemble_inversion(cfg, ctx, models, r, m);
                        break;
                    case Method::Tandem:
                    case Method::UATandem:
                        out = run_tandem_method(cfg, ctx, models, r, m);
                        break;
                }
                std::vector<double> nfp_vals;
                std::vector<double> surr_vals;
                for (auto& row : out.rows) {
                    nfp_vals.push_back(row.nfp_error);
                    surr_vals.push_back(row.surrogate_error);
                    report.rows.push_back(std::move(row));
                }
                stats[mi].repeat_nfp_means.push_back(mean(nfp_vals));
                stats[mi].repeat_surr_means.push_back(mean(surr_vals));
                stats[mi].all_nfp.insert(stats[mi].all_nfp.end(), nfp_vals.begin(), nfp_vals.end());
                stats[mi].all_surr.insert(stats[mi].all_surr.end(), surr_vals.begin(),
                                          surr_vals.end());
            } catch (const std::exception& e) {
                if (!stats[mi].error.empty()) stats[mi].error += "; ";
                stats[mi].error += "repeat " + std::to_string(r) + ": " + e.what();
            }
        }
    }

    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        MethodAggregate agg;
        agg.method = method_name(methods[mi]);
        agg.error = stats[mi].error;
        if (!stats[mi].all_nfp.empty()) {
            agg.nfp_mean = mean(stats[mi].repeat_nfp_means);
            agg.nfp_std = sample_std(stats[mi].repeat_nfp_means, agg.nfp_mean);
            agg.nfp_median = median(stats[mi].all_nfp);
            agg.surrogate_mean = mean(stats[mi].repeat_surr_means);
            agg.surrogate_std = sample_std(stats[mi].repeat_surr_means, agg.surrogate_mean);
            agg.surrogate_median = median(stats[mi].all_surr);
        }
        report.aggregates.push_back(std::move(agg));
    }
    return report;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join_design(const std::vector<double>& design) {
    std::string out;
    for (std::size_t d = 0; d < design.size(); ++d) {
        if (d) out += ';';
        out += fmt(design[d]);
    }
    return out;
}

}  // namespace

void write_benchmark_csv(std::ostream& out, const BenchmarkReport& report) {
    out << "method,repeat,target,design,surrogate_error,nfp_error,sigma_aleatoric_sum,"
           "sigma_epistemic_sum,seed,restart_index\n";
    for (const auto& row : report.rows) {
        out << row.method << ',' << row.repeat << ',' << row.target_id << ','
            << join_design(row.design) << ',' << fmt(row.surrogate_error) << ','
            << fmt(row.nfp_error) << ',' << fmt(row.sigma_aleatoric_sum) << ','
            << fmt(row.sigma_epistemic_sum) << ',' << row.seed << ',' << row.restart_index
            << '\n';
    }
}

void write_benchmark_json(std::ostream& out, const BenchmarkReport& report) {
    json rows = json::array();
    for (const auto& row : report.rows) {
        json design = json::array();
        for (double v : row.design) design.push_back(encode_double(v));
        rows.push_back({{"method", row.method},
                        {"repeat", row.repeat},
                        {"target", row.target_id},
                        {"design", design},
                        {"surrogate_error", encode_double(row.surrogate_error)},
                        {"nfp_error", encode_double(row.nfp_error)},
                        {"sigma_aleatoric_sum", encode_double(row.sigma_aleatoric_sum)},
                        {"sigma_epistemic_sum", encode_double(row.sigma_epistemic_sum)},
                        {"seed", row.seed},
                        {"restart_index", row.restart_index}});
    }
    json aggs = json::array();
    for (const auto& agg : report.aggregates) {
        aggs.push_back({{"method", agg.method},
                        {"nfp_mean", encode_double(agg.nfp_mean)},
                        {"nfp_std", encode_double(agg.nfp_std)},
                        {"nfp_median", encode_double(agg.nfp_median)},
                        {"surrogate_mean", encode_double(agg.surrogate_mean)},
                        {"surrogate_std", encode_double(agg.surrogate_std)},
                        {"surrogate_median", encode_double(agg.surrogate_median)},
                        {"error", agg.error}});
    }
    out << json{{"format", "autoinv-benchmark"}, {"version", 1}, {"rows", rows},
                {"aggregates", aggs}}
               .dump(2)
        << '\n';
}

SweepResult sweep_hyperparams(const SweepGrid& grid, const ExperimentConfig& cfg) {
    cfg.validate();
    if (grid.coarse.empty()) throw std::invalid_argument("sweep_hyperparams: empty coarse grid");
    for (const auto& [a, b] : grid.coarse) {
        if (!(a >= 0.0) || !(b >= 0.0)) {
            throw std::invalid_argument("sweep_hyperparams: weights must be nonnegative");
        }
    }

    const RepeatContext ctx = make_repeat(cfg, 0);
    EnsembleTrainConfig ec = cfg.ensemble;
    ec.seed = derive_seed(ctx.seed, 0x656e7330ULL);
    ec.threads = cfg.threads;
    const DeepEnsemble ens = train_ensemble(ctx.sampled.data, ec);

    const auto v = std::max<std::size_t>(
        1, static_cast<std::size_t>(grid.validation_fraction *
                                    static_cast<double>(cfg.target_count)));
    const Matrix validation_norm = head_rows(ctx.targets_norm, v);
    const Matrix validation_raw = head_rows(ctx.targets_raw, v);

    SweepResult result;
    auto evaluate = [&](double alpha, double beta) {
        InversionConfig inv = ctx.inversion;
        inv.weights = {alpha, beta};
        inv.seed = derive_seed(ctx.seed, 0x73776565ULL);  // shared across pairs
        const auto outcomes = uana_invert_batch(ens, validation_norm, inv, cfg.threads);
        const double err = mean_nfp_error_for_designs(
            cfg, ctx, designs_from_outcomes(outcomes, ctx.sampled.data.design_dim()),
            validation_raw);
        result.log.push_back({alpha, beta, err});
        return err;
    };

    std::vector<double> coarse_losses;
    std::size_t best_idx = 0;
    for (std::size_t i = 0; i < grid.coarse.size(); ++i) {
        coarse_losses.push_back(evaluate(grid.coarse[i].first, grid.coarse[i].second));
        if (coarse_losses[i] < coarse_losses[best_idx]) best_idx = i;
    }

    double best_alpha = grid.coarse[best_idx].first;
    double best_beta = grid.coarse[best_idx].second;
    double best_loss = coarse_losses[best_idx];

    // refine toward the better-scoring side of the winner; each step shrinks
    // the multiplicative factor (sqrt(10), then its square root, ...)
    double dir = 1.0;
    if (best_idx + 1 < coarse_losses.size() && best_idx > 0) {
        dir = coarse_losses[best_idx + 1] <= coarse_losses[best_idx - 1] ? 1.0 : -1.0;
    } else if (best_idx == 0 && coarse_losses.size() > 1) {
        dir = -1.0;  // edge winner: continue outward
    }
    double factor = std::sqrt(10.0);
    for (int step = 0; step < grid.refine_steps; ++step) {
        const double scale = std::pow(factor, dir);
        const double a = best_alpha * scale;
        const double b = best_beta * scale;
        const double loss = evaluate(a, b);
        if (loss < best_loss) {
            best_loss = loss;
            best_alpha = a;
            best_beta = b;
        } else {
            dir = -dir;
        }
        factor = std::sqrt(factor);
    }

    result.alpha = best_alpha;
    result.beta = best_beta;
    return result;
}

std::vector<AvoidanceReport> avoidance_study(const ExperimentConfig& cfg, std::size_t flagged_dim,
                                             double threshold, const std::vector<Method>& methods,
                                             const std::string& variant_name) {
    if (flagged_dim >= cfg.nfp.design_dim()) {
        throw DimensionError("avoidance_study flagged dim", cfg.nfp.design_dim(), flagged_dim);
    }
    const BenchmarkReport bench = run_benchmark(cfg, methods);
    std::vector<AvoidanceReport> reports;
    for (Method m : methods) {
        AvoidanceReport rep;
        rep.method = method_name(m);
        rep.variant = variant_name;
        rep.flagged_dim = flagged_dim;
        rep.threshold = threshold;
        rep.target_count = cfg.target_count;
        rep.counts.assign(cfg.nfp.design_dim(), 0);
        // worst repeat per dimension, so zero means zero in every repeat
        for (std::size_t r = 0; r < cfg.repeat_count; ++r) {
            std::vector<std::size_t> counts(cfg.nfp.design_dim(), 0);
            for (const auto& row : bench.rows) {
                if (row.method != rep.method || row.repeat != r) continue;
                for (std::size_t d = 0; d < row.design.size(); ++d) {
                    if (row.design[d] >= threshold) ++counts[d];
                }
            }
            for (std::size_t d = 0; d < counts.size(); ++d) {
                rep.counts[d] = std::max(rep.counts[d], counts[d]);
            }
        }
        reports.push_back(std::move(rep));
    }
    return reports;
}

void write_avoidance_csv(std::ostream& out, const std::vector<AvoidanceReport>& reports) {
    out << "method,variant,flagged_dim,threshold,target_count";
    if (!reports.empty()) {
        for (std::size_t d = 0; d < reports.front().counts.size(); ++d) out << ",dim" << d;
    }
    out << '\n';
    for (const auto& rep : reports) {
        out << rep.method << ',' << rep.variant << ',' << rep.flagged_dim << ','
            << fmt(rep.threshold) << ',' << rep.target_count;
        for (std::size_t c : rep.counts) out << ',' << c;
        out << '\n';
    }
}

std::vector<ProfilePoint> uncertainty_profile(const DeepEnsemble& ens, const AxisSpec& axis) {
    ens.validate();
    if (axis.steps < 2) throw std::invalid_argument("uncertainty_profile: needs >= 2 steps");
    require_dim("uncertainty_profile base point", ens.input_dim(), axis.base.size());
    if (axis.dim >= ens.input_dim()) {
        throw DimensionError("uncertainty_profile axis dim", ens.input_dim(), axis.dim);
    }
    std::vector<ProfilePoint> profile;
    profile.reserve(axis.steps);
    std::vector<double> x = axis.base;
    for (std::size_t i = 0; i < axis.steps; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(axis.steps - 1);
        x[axis.dim] = axis.lo + t * (axis.hi - axis.lo);
        const Prediction pred = predict(ens, x);
        ProfilePoint p;
        p.x = x[axis.dim];
        for (double v : pred.sigma_aleatoric) p.sigma_aleatoric += v;
        for (double v : pred.sigma_epistemic) p.sigma_epistemic += v;
        profile.push_back(p);
    }
    return profile;
}

void write_profile_csv(std::ostream& out, const std::vector<ProfilePoint>& profile) {
    out << "x,sigma_aleatoric,sigma_epistemic\n";
    for (const auto& p : profile) {
        out << fmt(p.x) << ',' << fmt(p.sigma_aleatoric) << ',' << fmt(p.sigma_epistemic) << '\n';
    }
}

std::vector<AblationRow> ensemble_size_ablation(const ExperimentConfig& cfg,
                                                const std::vector<std::size_t>& sizes) {
    cfg.validate();
    if (sizes.empty()) throw std::invalid_argument("ensemble_size_ablation: no sizes");
    for (std::size_t s : sizes) {
        if (s < 2) throw std::invalid_argument("ensemble_size_ablation: sizes must be >= 2");
    }
    const std::size_t m_max = *std::max_element(sizes.begin(), sizes.end());

    std::vector<std::vector<double>> medians_per_size(sizes.size());
    for (std::size_t r = 0; r < cfg.repeat_count; ++r) {
        const RepeatContext ctx = make_repeat(cfg, r);
        EnsembleTrainConfig ec = cfg.ensemble;
        ec.member_count = m_max;
        if (ec.roster.empty()) {
            ec.roster = default_roster(m_max);
        } else if (ec.roster.size() < m_max) {
            throw DimensionError("ensemble_size_ablation roster", m_max, ec.roster.size());
        } else {
            ec.roster.resize(m_max);
        }
        ec.seed = derive_seed(ctx.seed, 0x656e7330ULL);
        ec.threads = cfg.threads;
        const DeepEnsemble full = train_ensemble(ctx.sampled.data, ec);

        for (std::size_t si = 0; si < sizes.size(); ++si) {
            DeepEnsemble sliced;
            sliced.variance_floor = full.variance_floor;
            sliced.members.assign(full.members.begin(),
                                  full.members.begin() + static_cast<long>(sizes[si]));
            sliced.roster.assign(full.roster.begin(),
                                 full.roster.begin() + static_cast<long>(sizes[si]));
            InversionConfig inv = ctx.inversion;
            inv.seed = derive_seed(ctx.seed, 0x61626c30ULL, sizes[si]);
            const auto outcomes = uana_invert_batch(sliced, ctx.targets_norm, inv, cfg.threads);
            std::vector<double> errors;
            for (std::size_t t = 0; t < outcomes.size(); ++t) {
                const auto raw =
                    ctx.sampled.data.design_norm.denormalize(outcomes[t].best.design);
                errors.push_back(nfp_error(cfg.nfp, raw, ctx.targets_raw.row(t),
                                           ctx.sampled.data.performance_norm));
            }
            medians_per_size[si].push_back(median(std::move(errors)));
        }
    }

    std::vector<AblationRow> rows;
    for (std::size_t si = 0; si < sizes.size(); ++si) {
        rows.push_back({sizes[si], median(medians_per_size[si])});
    }
    return rows;
}

void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows) {
    out << "members,nfp_error_median\n";
    for (const auto& row : rows) {
        out << row.members << ',' << fmt(row.nfp_error_median) << '\n';
    }
}

}  // namespace autoinv
