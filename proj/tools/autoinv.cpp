// Command-line front end: dataset generation, surrogate/ensemble training,
// inversion, tandem training/querying, and the experiment harness.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "autoinv/config.hpp"
#include "autoinv/harness.hpp"
#include "autoinv/kernels.hpp"
#include "autoinv/pareto.hpp"
#include "autoinv/serialize.hpp"

namespace {

using namespace autoinv;

std::vector<double> parse_csv_doubles(const std::string& text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t next = text.find(',', pos);
        if (next == std::string::npos) next = text.size();
        out.push_back(std::stod(text.substr(pos, next - pos)));
        pos = next + 1;
    }
    return out;
}

std::vector<std::size_t> parse_csv_sizes(const std::string& text) {
    std::vector<std::size_t> out;
    for (double v : parse_csv_doubles(text)) out.push_back(static_cast<std::size_t>(v));
    return out;
}

// dim:from:to[:std] region shorthand used by gen-data flags
IntervalRegion parse_region(const std::string& text, std::size_t dims, double* noise_std) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t next = text.find(':', pos);
        if (next == std::string::npos) next = text.size();
        parts.push_back(text.substr(pos, next - pos));
        pos = next + 1;
    }
    if (parts.size() < 3) throw CLI::ValidationError("region must be dim:from:to[:std]");
    auto bound = [](const std::string& s, double fallback) {
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s.empty()) return fallback;
        return std::stod(s);
    };
    const auto dim = static_cast<std::size_t>(std::stoul(parts[0]));
    if (dim >= dims) throw CLI::ValidationError("region dim out of range");
    if (noise_std) {
        if (parts.size() < 4) throw CLI::ValidationError("noise region needs dim:from:to:std");
        *noise_std = std::stod(parts[3]);
    }
    return IntervalRegion::dim_range(dims, dim,
                                     bound(parts[1], -std::numeric_limits<double>::infinity()),
                                     bound(parts[2], std::numeric_limits<double>::infinity()));
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

Matrix head_rows_matrix(const Matrix& m, std::size_t n) {
    Matrix out(std::min(n, m.rows), m.cols);
    std::copy_n(m.data.begin(), out.rows * out.cols, out.data.begin());
    return out;
}

struct NfpCliOptions {
    std::string kind = "robot_arm";
    double amplitude = 1.0;
    double frequency = 1.0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--nfp", kind, "Forward process: robot_arm|sine1d|toy2d");
        cmd->add_option("--amplitude", amplitude, "Sine1D amplitude");
        cmd->add_option("--frequency", frequency, "Sine1D frequency");
    }

    NfpSpec spec() const {
        if (kind == "robot_arm") return NfpSpec::robot_arm();
        if (kind == "sine1d") return NfpSpec::sine1d(amplitude, frequency);
        if (kind == "toy2d") return NfpSpec::toy2d();
        throw CLI::ValidationError("unknown --nfp " + kind);
    }
};

int cmd_gen_data(const NfpCliOptions& nfp_opts, std::size_t n, std::uint64_t seed,
                 const std::vector<std::string>& noise_specs,
                 const std::vector<std::string>& sparse_specs, const std::string& out_path) {
    const NfpSpec spec = nfp_opts.spec();
    CorruptionSpec corruption;
    for (const auto& text : noise_specs) {
        NoiseRegion nr;
        nr.region = parse_region(text, spec.design_dim(), &nr.noise_std);
        corruption.noise_regions.push_back(std::move(nr));
    }
    for (const auto& text : sparse_specs) {
        corruption.sparse_regions.push_back(parse_region(text, spec.design_dim(), nullptr));
    }
    save_dataset(out_path, sample_dataset(spec, n, seed, corruption));
    std::cout << "wrote " << n << " samples to " << out_path << "\n";
    return 0;
}

int cmd_train_surrogate(const std::string& data_path, const std::string& hidden,
                        const std::string& act, const nlohmann::json& train_json,
                        const std::string& out_path) {
    const SampledDataset sampled = load_dataset(data_path);
    MlpModelFile model;
    model.role = "surrogate";
    model.net = Mlp::make(sampled.data.design_dim(), parse_csv_sizes(hidden),
                          sampled.data.performance_dim(), activation_from_string(act));
    const TrainConfig cfg = train_config_from_json(train_json);
    Rng rng(derive_seed(cfg.seed, 0x696e6974ULL));
    model.net.init_glorot(rng);
    const auto result = train_mse(model.net, sampled.data, cfg);
    model.design_norm = sampled.data.design_norm;
    model.performance_norm = sampled.data.performance_norm;
    save_mlp_model(out_path, model);
    std::cout << "final training loss "
              << (result.loss_history.empty() ? 0.0 : result.loss_history.back()) << ", saved "
              << out_path << "\n";
    return 0;
}

int cmd_train_ensemble(const std::string& data_path, const nlohmann::json& ens_json,
                       std::uint64_t seed, const std::string& out_path) {
    const SampledDataset sampled = load_dataset(data_path);
    EnsembleTrainConfig cfg = ensemble_config_from_json(ens_json);
    cfg.seed = seed;
    EnsembleModelFile model;
    model.ensemble = train_ensemble(sampled.data, cfg);
    model.design_norm = sampled.data.design_norm;
    model.performance_norm = sampled.data.performance_norm;
    save_ensemble_model(out_path, model);
    std::cout << "trained " << model.ensemble.member_count() << "-member ensemble, saved "
              << out_path << "\n";
    return 0;
}

int cmd_invert(const std::string& method, const std::string& model_path,
               const std::string& targets_path, const nlohmann::json& inv_json,
               const std::string& report_path) {
    InversionConfig cfg = inversion_config_from_json(inv_json);

    Normalizer design_norm;
    Normalizer performance_norm;
    std::vector<InversionOutcome> outcomes;
    Matrix targets_norm;
    if (method == "na") {
        const MlpModelFile model = load_mlp_model(model_path);
        design_norm = model.design_norm;
        performance_norm = model.performance_norm;
        const Matrix targets_raw = load_targets(targets_path, model.net.output_dim());
        targets_norm = performance_norm.normalize_rows(targets_raw);
        if (cfg.box_lo.empty()) {
            cfg.box_lo.assign(model.net.input_dim(), -2.0);
            cfg.box_hi.assign(model.net.input_dim(), 2.0);
        }
        outcomes = na_invert_batch(model.net, targets_norm, cfg);
    } else if (method == "uana" || method == "na-ensemble") {
        const EnsembleModelFile model = load_ensemble_model(model_path);
        design_norm = model.design_norm;
        performance_norm = model.performance_norm;
        const Matrix targets_raw = load_targets(targets_path, model.ensemble.output_dim());
        targets_norm = performance_norm.normalize_rows(targets_raw);
        if (cfg.box_lo.empty()) {
            cfg.box_lo.assign(model.ensemble.input_dim(), -2.0);
            cfg.box_hi.assign(model.ensemble.input_dim(), 2.0);
        }
        outcomes = method == "uana"
                       ? uana_invert_batch(model.ensemble, targets_norm, cfg)
                       : na_ensemble_invert_batch(model.ensemble, targets_norm, cfg);
    } else {
        throw CLI::ValidationError("unknown --method " + method);
    }

    auto out = open_out(report_path);
    out << "target,design,surrogate_error,total_loss,restart_index,iterations\n";
    char buf[32];
    for (std::size_t t = 0; t < outcomes.size(); ++t) {
        const auto& best = outcomes[t].best;
        const auto raw = design_norm.denormalize(best.design);
        out << t << ',';
        for (std::size_t d = 0; d < raw.size(); ++d) {
            std::snprintf(buf, sizeof buf, "%.17g", raw[d]);
            out << (d ? ";" : "") << buf;
        }
        std::snprintf(buf, sizeof buf, "%.17g", best.surrogate_error);
        out << ',' << buf;
        std::snprintf(buf, sizeof buf, "%.17g", best.total_loss);
        out << ',' << buf << ',' << best.restart_index << ',' << best.iterations_used << '\n';
    }
    std::cout << "inverted " << outcomes.size() << " targets -> " << report_path << "\n";
    return 0;
}

int cmd_tandem_train(const std::string& forward_path, const std::string& ensemble_path,
                     const std::string& data_path, const nlohmann::json& tandem_json,
                     const NfpCliOptions& nfp_opts, bool have_nfp, const std::string& out_path) {
    const SampledDataset sampled = load_dataset(data_path);
    const Matrix train_targets = sampled.data.normalized_performances();
    TandemTrainConfig cfg = tandem_config_from_json(tandem_json);

    std::vector<InverseNet> candidates;
    for (std::size_t c = 0; c < cfg.candidate_count; ++c) {
        TandemTrainConfig tc = cfg;
        tc.base.seed = derive_seed(cfg.base.seed, 0x74616e64ULL, c);
        if (!ensemble_path.empty()) {
            const EnsembleModelFile model = load_ensemble_model(ensemble_path);
            candidates.push_back(train_ua_tandem(model.ensemble, train_targets, tc).inverse);
        } else {
            const MlpModelFile model = load_mlp_model(forward_path);
            tc.weights = UncertaintyWeights{};
            candidates.push_back(train_tandem(model.net, train_targets, tc).inverse);
        }
    }

    std::size_t best = 0;
    if (candidates.size() > 1) {
        if (!have_nfp) {
            throw CLI::ValidationError("selecting between candidates needs --nfp for NFP error");
        }
        const NfpSpec spec = nfp_opts.spec();
        const auto v = std::max<std::size_t>(
            1, static_cast<std::size_t>(cfg.validation_fraction *
                                        static_cast<double>(train_targets.rows)));
        const auto selection = select_inverse_model(
            candidates, spec, head_rows_matrix(train_targets, v), sampled.data.design_norm,
            sampled.data.performance_norm);
        best = selection.best_index;
    }

    MlpModelFile model;
    model.role = "inverse";
    model.net = candidates[best].net;
    model.design_norm = sampled.data.design_norm;
    model.performance_norm = sampled.data.performance_norm;
    save_mlp_model(out_path, model);
    std::cout << "selected candidate " << best << ", saved " << out_path << "\n";
    return 0;
}

int cmd_tandem_query(const std::string& inverse_path, const std::string& targets_path,
                     const std::string& out_path) {
    const MlpModelFile model = load_mlp_model(inverse_path);
    if (model.role != "inverse") throw std::runtime_error("model is not an inverse net");
    const Matrix targets_raw = load_targets(targets_path, model.net.input_dim());
    const Matrix targets_norm = model.performance_norm.normalize_rows(targets_raw);
    InverseNet inverse{model.net};
    const Matrix designs_norm = query_batch(inverse, targets_norm);
    Matrix designs_raw(designs_norm.rows, designs_norm.cols);
    for (std::size_t r = 0; r < designs_norm.rows; ++r) {
        model.design_norm.denormalize(designs_norm.row(r), designs_raw.row(r));
    }
    save_targets(out_path, designs_raw);
    std::cout << "queried " << designs_raw.rows << " designs -> " << out_path << "\n";
    return 0;
}

int cmd_bench(const std::string& config_path, const std::string& csv_path,
              const std::string& json_path, const std::string& methods_csv) {
    const ExperimentConfig cfg = load_experiment_config(config_path);
    std::vector<Method> methods;
    if (methods_csv.empty()) {
        methods = all_methods();
    } else {
        std::size_t pos = 0;
        while (pos < methods_csv.size()) {
            std::size_t next = methods_csv.find(',', pos);
            if (next == std::string::npos) next = methods_csv.size();
            methods.push_back(method_from_name(methods_csv.substr(pos, next - pos)));
            pos = next + 1;
        }
    }
    const BenchmarkReport report = run_benchmark(cfg, methods);
    {
        auto out = open_out(csv_path);
        write_benchmark_csv(out, report);
    }
    if (!json_path.empty()) {
        auto out = open_out(json_path);
        write_benchmark_json(out, report);
    }
    bool failed = false;
    for (const auto& agg : report.aggregates) {
        std::cout << agg.method << ": nfp " << agg.nfp_mean << " +- " << agg.nfp_std
                  << " (median " << agg.nfp_median << "), surrogate " << agg.surrogate_mean
                  << " +- " << agg.surrogate_std;
        if (!agg.error.empty()) {
            std::cout << "  [FAILED: " << agg.error << "]";
            failed = true;
        }
        std::cout << "\n";
    }
    return failed ? 1 : 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_path, int refine_steps) {
    const ExperimentConfig cfg = load_experiment_config(config_path);
    SweepGrid grid;
    grid.refine_steps = refine_steps;
    grid.validation_fraction = cfg.validation_fraction;
    const SweepResult result = sweep_hyperparams(grid, cfg);
    auto out = open_out(out_path);
    out << "alpha,beta,validation_nfp_error\n";
    char buf[32];
    for (const auto& entry : result.log) {
        std::snprintf(buf, sizeof buf, "%.17g", entry.alpha);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", entry.beta);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", entry.validation_nfp_error);
        out << buf << '\n';
    }
    std::cout << "best alpha " << result.alpha << ", beta " << result.beta << " ("
              << result.log.size() << " tuning runs) -> " << out_path << "\n";
    return 0;
}

int cmd_avoidance(const std::string& config_path, std::size_t flagged_dim, double threshold,
                  const std::string& variant, const std::string& methods_csv,
                  const std::string& out_path) {
    const ExperimentConfig cfg = load_experiment_config(config_path);
    std::vector<Method> methods;
    if (methods_csv.empty()) {
        methods = {Method::NA, Method::UANA};
    } else {
        std::size_t pos = 0;
        while (pos < methods_csv.size()) {
            std::size_t next = methods_csv.find(',', pos);
            if (next == std::string::npos) next = methods_csv.size();
            methods.push_back(method_from_name(methods_csv.substr(pos, next - pos)));
            pos = next + 1;
        }
    }
    const auto reports = avoidance_study(cfg, flagged_dim, threshold, methods, variant);
    auto out = open_out(out_path);
    write_avoidance_csv(out, reports);
    for (const auto& rep : reports) {
        std::cout << rep.method << " [" << rep.variant << "] flagged-dim count "
                  << rep.counts[rep.flagged_dim] << "/" << rep.target_count << "\n";
    }
    return 0;
}

int cmd_profile(const std::string& ensemble_path, std::size_t dim, double lo, double hi,
                std::size_t steps, const std::string& base_csv, const std::string& out_path) {
    const EnsembleModelFile model = load_ensemble_model(ensemble_path);
    AxisSpec axis;
    axis.dim = dim;
    axis.lo = lo;
    axis.hi = hi;
    axis.steps = steps;
    axis.base = base_csv.empty() ? std::vector<double>(model.ensemble.input_dim(), 0.0)
                                 : parse_csv_doubles(base_csv);
    const auto profile = uncertainty_profile(model.ensemble, axis);
    auto out = open_out(out_path);
    write_profile_csv(out, profile);
    std::cout << "profiled " << profile.size() << " points -> " << out_path << "\n";
    return 0;
}

int cmd_ablate(const std::string& config_path, const std::string& sizes_csv,
               const std::string& out_path) {
    const ExperimentConfig cfg = load_experiment_config(config_path);
    const auto rows = ensemble_size_ablation(cfg, parse_csv_sizes(sizes_csv));
    auto out = open_out(out_path);
    write_ablation_csv(out, rows);
    for (const auto& row : rows) {
        std::cout << "M=" << row.members << ": median nfp error " << row.nfp_error_median << "\n";
    }
    return 0;
}

int cmd_pareto(const std::string& ensemble_path, const std::string& target_csv, double alpha,
               double beta, std::size_t population, std::size_t generations, std::uint64_t seed,
               const std::string& out_path) {
    const EnsembleModelFile model = load_ensemble_model(ensemble_path);
    const auto target_raw = parse_csv_doubles(target_csv);
    const auto target_norm = model.performance_norm.normalize(target_raw);

    Nsga2Config cfg;
    cfg.population = population;
    cfg.generations = generations;
    cfg.seed = seed;
    // bounds: +-2 normalized units unless the ensemble has tighter data; the
    // harness-facing API takes explicit bounds, the CLI uses this default
    cfg.bounds_lo.assign(model.ensemble.input_dim(), -2.0);
    cfg.bounds_hi.assign(model.ensemble.input_dim(), 2.0);

    const auto front = nsga2_run(model.ensemble, target_norm, {alpha, beta}, cfg);
    auto out = open_out(out_path);
    out << "design,mse,uncertainty_score\n";
    char buf[32];
    for (const auto& ind : front) {
        const auto raw = model.design_norm.denormalize(ind.design);
        for (std::size_t d = 0; d < raw.size(); ++d) {
            std::snprintf(buf, sizeof buf, "%.17g", raw[d]);
            out << (d ? ";" : "") << buf;
        }
        std::snprintf(buf, sizeof buf, "%.17g", ind.mse);
        out << ',' << buf;
        std::snprintf(buf, sizeof buf, "%.17g", ind.uncertainty_score);
        out << ',' << buf << '\n';
    }
    std::cout << "front size " << front.size() << " -> " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Uncertainty-aware neural surrogate inversion toolkit"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "Sample a forward process into a dataset file");
    NfpCliOptions gen_nfp;
    gen_nfp.attach(gen);
    std::size_t gen_n = 10000;
    std::uint64_t gen_seed = 0;
    std::vector<std::string> gen_noise;
    std::vector<std::string> gen_sparse;
    std::string gen_out = "data.tsv";
    gen->add_option("--n", gen_n, "Sample count");
    gen->add_option("--seed", gen_seed, "RNG seed");
    gen->add_option("--noise-region", gen_noise, "dim:from:to:std (repeatable)");
    gen->add_option("--sparse-region", gen_sparse, "dim:from:to (repeatable)");
    gen->add_option("--out", gen_out, "Output dataset path");

    // train-surrogate
    auto* ts = app.add_subcommand("train-surrogate", "Train a single MSE surrogate");
    std::string ts_data, ts_out = "surrogate.json";
    std::string ts_hidden = "64,64,64";
    std::string ts_act = "relu";
    double ts_lr = 1e-3;
    long ts_epochs = 200;
    std::size_t ts_batch = 128;
    std::uint64_t ts_seed = 0;
    ts->add_option("--data", ts_data, "Dataset path")->required();
    ts->add_option("--hidden", ts_hidden, "Hidden sizes, comma separated");
    ts->add_option("--activation", ts_act, "Hidden activation");
    ts->add_option("--lr", ts_lr, "Learning rate");
    ts->add_option("--epochs", ts_epochs, "Epochs");
    ts->add_option("--batch", ts_batch, "Batch size");
    ts->add_option("--seed", ts_seed, "Seed");
    ts->add_option("--out", ts_out, "Output model path");

    // train-ensemble
    auto* te = app.add_subcommand("train-ensemble", "Train a deep ensemble (3-step procedure)");
    std::string te_data, te_out = "ensemble.json";
    std::string te_roster;
    std::size_t te_members = 10;
    std::string te_mean_hidden = "32,32", te_var_hidden = "16,16";
    double te_lr = 1e-3;
    long te_stage1 = 200, te_stage2 = 100;
    std::size_t te_batch = 128;
    std::uint64_t te_seed = 0;
    te->add_option("--data", te_data, "Dataset path")->required();
    te->add_option("--members", te_members, "Ensemble size M");
    te->add_option("--roster", te_roster, "Comma-separated activations (default: diverse roster)");
    te->add_option("--mean-hidden", te_mean_hidden, "Mean-net hidden sizes");
    te->add_option("--var-hidden", te_var_hidden, "Variance-net hidden sizes");
    te->add_option("--lr", te_lr, "Stage-1 learning rate");
    te->add_option("--stage1-epochs", te_stage1, "Stage-1 (MSE) epochs");
    te->add_option("--stage2-epochs", te_stage2, "Stage-2 (NLL) epochs");
    te->add_option("--batch", te_batch, "Batch size");
    te->add_option("--seed", te_seed, "Seed");
    te->add_option("--out", te_out, "Output model path");

    // invert
    auto* inv = app.add_subcommand("invert", "Gradient-based inversion of a trained model");
    std::string inv_method = "na", inv_model, inv_targets, inv_report = "inversion.csv";
    double inv_step = 0.05, inv_alpha = 0.0, inv_beta = 0.0;
    long inv_iters = 2000;
    std::size_t inv_restarts = 50;
    std::uint64_t inv_seed = 0;
    std::string inv_init = "uniform", inv_optimizer = "adam", inv_fixed, inv_selection = "surrogate_error";
    inv->add_option("--method", inv_method, "na|uana|na-ensemble");
    inv->add_option("--model", inv_model, "Surrogate or ensemble model path")->required();
    inv->add_option("--targets", inv_targets, "Targets file (raw performance rows)")->required();
    inv->add_option("--step", inv_step, "Step size delta");
    inv->add_option("--iters", inv_iters, "Max iterations");
    inv->add_option("--restarts", inv_restarts, "Restart count");
    inv->add_option("--alpha", inv_alpha, "Aleatoric weight");
    inv->add_option("--beta", inv_beta, "Epistemic weight");
    inv->add_option("--seed", inv_seed, "Seed");
    inv->add_option("--init", inv_init, "uniform|fixed");
    inv->add_option("--fixed-point", inv_fixed, "Init point for --init fixed (comma separated)");
    inv->add_option("--optimizer", inv_optimizer, "adam|sgd");
    inv->add_option("--selection", inv_selection, "surrogate_error|total_loss");
    inv->add_option("--report", inv_report, "Output report path");

    // tandem-train
    auto* tt = app.add_subcommand("tandem-train", "Train an inverse net against a frozen model");
    std::string tt_forward, tt_ensemble, tt_data, tt_out = "inverse.json";
    std::string tt_hidden = "32,32";
    double tt_lr = 1e-3, tt_alpha = 0.0, tt_beta = 0.0;
    long tt_epochs = 200;
    std::size_t tt_batch = 128, tt_candidates = 5;
    std::uint64_t tt_seed = 0;
    NfpCliOptions tt_nfp;
    tt->add_option("--forward", tt_forward, "Frozen forward surrogate (tandem)");
    tt->add_option("--ensemble", tt_ensemble, "Frozen ensemble (UA-tandem)");
    tt->add_option("--data", tt_data, "Dataset path (training targets)")->required();
    tt->add_option("--hidden", tt_hidden, "Inverse-net hidden sizes");
    tt->add_option("--lr", tt_lr, "Learning rate");
    tt->add_option("--epochs", tt_epochs, "Epochs");
    tt->add_option("--batch", tt_batch, "Batch size");
    tt->add_option("--candidates", tt_candidates, "Pretrained candidates to select from");
    tt->add_option("--alpha", tt_alpha, "Aleatoric weight (UA)");
    tt->add_option("--beta", tt_beta, "Epistemic weight (UA)");
    tt->add_option("--seed", tt_seed, "Seed");
    tt_nfp.attach(tt);
    tt->add_option("--out", tt_out, "Output model path");

    // tandem-query
    auto* tq = app.add_subcommand("tandem-query", "Query designs from a trained inverse net");
    std::string tq_inverse, tq_targets, tq_out = "designs.tsv";
    tq->add_option("--inverse", tq_inverse, "Inverse model path")->required();
    tq->add_option("--targets", tq_targets, "Targets file")->required();
    tq->add_option("--out", tq_out, "Output designs path");

    // bench
    auto* bench = app.add_subcommand("bench", "Run the benchmark harness from a config file");
    std::string bench_config, bench_csv = "bench.csv", bench_json, bench_methods;
    bench->add_option("--config", bench_config, "Experiment config (JSON)")->required();
    bench->add_option("--out-csv", bench_csv, "Report CSV path");
    bench->add_option("--out-json", bench_json, "Report JSON mirror path");
    bench->add_option("--methods", bench_methods, "Comma-separated subset of methods");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Tune alpha/beta on the validation split");
    std::string sweep_config, sweep_out = "sweep.csv";
    int sweep_refine = 2;
    sweep->add_option("--config", sweep_config, "Experiment config (JSON)")->required();
    sweep->add_option("--refine-steps", sweep_refine, "Refinement steps after the coarse grid");
    sweep->add_option("--out", sweep_out, "Sweep log CSV path");

    // avoidance
    auto* avoid = app.add_subcommand("avoidance", "Count best designs inside a flagged region");
    std::string avoid_config, avoid_variant = "standard", avoid_methods, avoid_out = "avoidance.csv";
    std::size_t avoid_dim = 0;
    double avoid_threshold = 0.4;
    avoid->add_option("--config", avoid_config, "Experiment config (JSON)")->required();
    avoid->add_option("--flagged-dim", avoid_dim, "Design dimension under study");
    avoid->add_option("--threshold", avoid_threshold, "Count designs with value >= threshold");
    avoid->add_option("--variant", avoid_variant, "Label: standard|sparse|noisy");
    avoid->add_option("--methods", avoid_methods, "Comma-separated methods (default na,uana)");
    avoid->add_option("--out", avoid_out, "Output CSV path");

    // profile
    auto* prof = app.add_subcommand("profile", "Uncertainty landscape along one design axis");
    std::string prof_ensemble, prof_base, prof_out = "profile.csv";
    std::size_t prof_dim = 0, prof_steps = 101;
    double prof_lo = -2.0, prof_hi = 2.0;
    prof->add_option("--ensemble", prof_ensemble, "Ensemble model path")->required();
    prof->add_option("--dim", prof_dim, "Varied design dim (normalized units)");
    prof->add_option("--from", prof_lo, "Sweep start");
    prof->add_option("--to", prof_hi, "Sweep end");
    prof->add_option("--steps", prof_steps, "Grid points");
    prof->add_option("--base", prof_base, "Fixed values for other dims (comma separated)");
    prof->add_option("--out", prof_out, "Output CSV path");

    // ablate-ensemble
    auto* abl = app.add_subcommand("ablate-ensemble", "NFP error vs ensemble size");
    std::string abl_config, abl_sizes = "2,5,10", abl_out = "ablation.csv";
    abl->add_option("--config", abl_config, "Experiment config (JSON)")->required();
    abl->add_option("--sizes", abl_sizes, "Ensemble sizes, comma separated");
    abl->add_option("--out", abl_out, "Output CSV path");

    // pareto
    auto* par = app.add_subcommand("pareto", "NSGA-II accuracy/uncertainty front for one target");
    std::string par_ensemble, par_target, par_out = "front.csv";
    double par_alpha = 1.0, par_beta = 10.0;
    std::size_t par_pop = 1000, par_gens = 100;
    std::uint64_t par_seed = 0;
    par->add_option("--ensemble", par_ensemble, "Ensemble model path")->required();
    par->add_option("--target", par_target, "Raw target performance, comma separated")->required();
    par->add_option("--alpha", par_alpha, "Aleatoric weight");
    par->add_option("--beta", par_beta, "Epistemic weight");
    par->add_option("--pop", par_pop, "Population size");
    par->add_option("--gens", par_gens, "Generations");
    par->add_option("--seed", par_seed, "Seed");
    par->add_option("--out", par_out, "Output CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            return cmd_gen_data(gen_nfp, gen_n, gen_seed, gen_noise, gen_sparse, gen_out);
        }
        if (ts->parsed()) {
            nlohmann::json train{{"learning_rate", ts_lr},
                                 {"epochs", ts_epochs},
                                 {"batch_size", ts_batch},
                                 {"seed", ts_seed}};
            return cmd_train_surrogate(ts_data, ts_hidden, ts_act, train, ts_out);
        }
        if (te->parsed()) {
            nlohmann::json ens{{"members", te_members},
                               {"stage1",
                                {{"learning_rate", te_lr},
                                 {"epochs", te_stage1},
                                 {"batch_size", te_batch}}},
                               {"stage2_epochs", te_stage2}};
            {
                nlohmann::json hidden = nlohmann::json::array();
                for (std::size_t v : parse_csv_sizes(te_mean_hidden)) hidden.push_back(v);
                ens["mean_hidden"] = hidden;
            }
            {
                nlohmann::json hidden = nlohmann::json::array();
                for (std::size_t v : parse_csv_sizes(te_var_hidden)) hidden.push_back(v);
                ens["var_hidden"] = hidden;
            }
            if (!te_roster.empty()) {
                nlohmann::json roster = nlohmann::json::array();
                std::size_t pos = 0;
                while (pos < te_roster.size()) {
                    std::size_t next = te_roster.find(',', pos);
                    if (next == std::string::npos) next = te_roster.size();
                    roster.push_back(te_roster.substr(pos, next - pos));
                    pos = next + 1;
                }
                ens["roster"] = roster;
            }
            return cmd_train_ensemble(te_data, ens, te_seed, te_out);
        }
        if (inv->parsed()) {
            nlohmann::json j{{"step_size", inv_step},
                             {"max_iters", inv_iters},
                             {"restarts", inv_restarts},
                             {"alpha", inv_alpha},
                             {"beta", inv_beta},
                             {"optimizer", inv_optimizer},
                             {"selection", inv_selection}};
            if (inv_init == "fixed") {
                nlohmann::json point = nlohmann::json::array();
                for (double v : parse_csv_doubles(inv_fixed)) point.push_back(v);
                j["init"] = {{"kind", "fixed"}, {"point", point}};
            }
            j["seed"] = inv_seed;
            return cmd_invert(inv_method, inv_model, inv_targets, j, inv_report);
        }
        if (tt->parsed()) {
            if (tt_forward.empty() == tt_ensemble.empty()) {
                throw CLI::ValidationError("pass exactly one of --forward / --ensemble");
            }
            nlohmann::json j{{"train",
                              {{"learning_rate", tt_lr},
                               {"epochs", tt_epochs},
                               {"batch_size", tt_batch},
                               {"seed", tt_seed}}},
                             {"alpha", tt_alpha},
                             {"beta", tt_beta},
                             {"candidates", tt_candidates}};
            {
                nlohmann::json hidden = nlohmann::json::array();
                for (std::size_t v : parse_csv_sizes(tt_hidden)) hidden.push_back(v);
                j["hidden"] = hidden;
            }
            return cmd_tandem_train(tt_forward, tt_ensemble, tt_data, j, tt_nfp,
                                    tt->count("--nfp") > 0, tt_out);
        }
        if (tq->parsed()) return cmd_tandem_query(tq_inverse, tq_targets, tq_out);
        if (bench->parsed()) return cmd_bench(bench_config, bench_csv, bench_json, bench_methods);
        if (sweep->parsed()) return cmd_sweep(sweep_config, sweep_out, sweep_refine);
        if (avoid->parsed()) {
            return cmd_avoidance(avoid_config, avoid_dim, avoid_threshold, avoid_variant,
                                 avoid_methods, avoid_out);
        }
        if (prof->parsed()) {
            return cmd_profile(prof_ensemble, prof_dim, prof_lo, prof_hi, prof_steps, prof_base,
                               prof_out);
        }
        if (abl->parsed()) return cmd_ablate(abl_config, abl_sizes, abl_out);
        if (par->parsed()) {
            return cmd_pareto(par_ensemble, par_target, par_alpha, par_beta, par_pop, par_gens,
                              par_seed, par_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
