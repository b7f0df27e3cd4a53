#include "autoinv/config.hpp"

#include <fstream>
#include <stdexcept>

#include "autoinv/serialize.hpp"

namespace autoinv {

using nlohmann::json;

namespace {

std::vector<std::size_t> sizes_from_json(const json& arr) {
    std::vector<std::size_t> out;
    for (const auto& v : arr) out.push_back(v.get<std::size_t>());
    return out;
}

std::vector<double> numbers_from_json(const json& arr) {
    std::vector<double> out;
    for (const auto& v : arr) out.push_back(v.get<double>());
    return out;
}

OptimizerKind optimizer_from_json(const json& j, OptimizerKind fallback) {
    if (!j.contains("optimizer")) return fallback;
    const std::string name = j["optimizer"].get<std::string>();
    if (name == "sgd") return OptimizerKind::SGD;
    if (name == "adam") return OptimizerKind::Adam;
    throw std::invalid_argument("unknown optimizer: " + name);
}

// Region bounds in configs are plain numbers; missing dims are unconstrained.
IntervalRegion region_from_json(const json& j) {
    IntervalRegion r;
    r.lo = numbers_from_json(j.at("lo"));
    r.hi = numbers_from_json(j.at("hi"));
    return r;
}

CorruptionSpec corruption_config_from_json(const json& j, std::size_t design_dim) {
    CorruptionSpec c;
    for (const auto& jn : j.value("noise_regions", json::array())) {
        NoiseRegion nr;
        if (jn.contains("dim")) {
            nr.region = IntervalRegion::dim_range(
                design_dim, jn["dim"].get<std::size_t>(),
                jn.value("from", -std::numeric_limits<double>::infinity()),
                jn.value("to", std::numeric_limits<double>::infinity()));
        } else {
            nr.region = region_from_json(jn);
        }
        nr.noise_std = jn.at("std").get<double>();
        c.noise_regions.push_back(std::move(nr));
    }
    for (const auto& js : j.value("sparse_regions", json::array())) {
        if (js.contains("dim")) {
            c.sparse_regions.push_back(IntervalRegion::dim_range(
                design_dim, js["dim"].get<std::size_t>(),
                js.value("from", -std::numeric_limits<double>::infinity()),
                js.value("to", std::numeric_limits<double>::infinity())));
        } else {
            c.sparse_regions.push_back(region_from_json(js));
        }
    }
    return c;
}

NfpSpec nfp_config_from_json(const json& j) {
    const std::string kind = j.value("kind", "robot_arm");
    NfpSpec spec;
    if (kind == "robot_arm") {
        spec = NfpSpec::robot_arm();
        if (j.contains("segment_lengths")) {
            const auto l = numbers_from_json(j["segment_lengths"]);
            if (l.size() != 3) throw std::invalid_argument("robot_arm needs 3 segment lengths");
            std::copy(l.begin(), l.end(), spec.segment_lengths.begin());
        }
        spec.base_std = j.value("base_std", spec.base_std);
        spec.angle_std = j.value("angle_std", spec.angle_std);
    } else if (kind == "sine1d") {
        spec = NfpSpec::sine1d(j.value("amplitude", 1.0), j.value("frequency", 1.0));
    } else if (kind == "toy2d") {
        spec = NfpSpec::toy2d();
    } else {
        throw std::invalid_argument("unknown nfp kind: " + kind);
    }
    if (j.contains("box_lo")) spec.box_lo = numbers_from_json(j["box_lo"]);
    if (j.contains("box_hi")) spec.box_hi = numbers_from_json(j["box_hi"]);
    spec.validate();
    return spec;
}

}  // namespace

TrainConfig train_config_from_json(const json& j, const TrainConfig& defaults) {
    TrainConfig cfg = defaults;
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.optimizer = optimizer_from_json(j, cfg.optimizer);
    return cfg;
}

EnsembleTrainConfig ensemble_config_from_json(const json& j, const EnsembleTrainConfig& defaults) {
    EnsembleTrainConfig cfg = defaults;
    cfg.member_count = j.value("members", cfg.member_count);
    if (j.contains("roster")) {
        cfg.roster.clear();
        for (const auto& name : j["roster"]) {
            cfg.roster.push_back(activation_from_string(name.get<std::string>()));
        }
    }
    if (j.contains("mean_hidden")) cfg.mean_hidden = sizes_from_json(j["mean_hidden"]);
    if (j.contains("var_hidden")) cfg.var_hidden = sizes_from_json(j["var_hidden"]);
    if (j.contains("stage1")) cfg.stage1 = train_config_from_json(j["stage1"], cfg.stage1);
    cfg.stage2_epochs = j.value("stage2_epochs", cfg.stage2_epochs);
    cfg.stage2_lr_factor = j.value("stage2_lr_factor", cfg.stage2_lr_factor);
    cfg.variance_floor = j.value("variance_floor", cfg.variance_floor);
    return cfg;
}

InversionConfig inversion_config_from_json(const json& j, const InversionConfig& defaults) {
    InversionConfig cfg = defaults;
    cfg.step_size = j.value("step_size", cfg.step_size);
    cfg.max_iters = j.value("max_iters", cfg.max_iters);
    cfg.restarts = j.value("restarts", cfg.restarts);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.optimizer = optimizer_from_json(j, cfg.optimizer);
    cfg.weights.alpha = j.value("alpha", cfg.weights.alpha);
    cfg.weights.beta = j.value("beta", cfg.weights.beta);
    if (j.contains("init")) {
        const auto& ji = j["init"];
        const std::string kind = ji.value("kind", "uniform");
        if (kind == "uniform") {
            cfg.init = InitSpec::uniform_in_data_box();
        } else if (kind == "gaussian") {
            cfg.init = InitSpec::gaussian(numbers_from_json(ji.at("mean")),
                                          numbers_from_json(ji.at("std")));
        } else if (kind == "fixed") {
            cfg.init = InitSpec::fixed(numbers_from_json(ji.at("point")));
        } else {
            throw std::invalid_argument("unknown init kind: " + kind);
        }
    }
    if (j.contains("selection")) {
        const std::string sel = j["selection"].get<std::string>();
        if (sel == "surrogate_error") {
            cfg.selection = SelectionCriterion::SurrogateError;
        } else if (sel == "total_loss") {
            cfg.selection = SelectionCriterion::TotalLoss;
        } else {
            throw std::invalid_argument("unknown selection criterion: " + sel);
        }
    }
    for (const auto& jr : j.value("regularizers", json::array())) {
        const std::string kind = jr.at("kind").get<std::string>();
        if (kind == "boundary") {
            cfg.regularizers.push_back(RegularizerSpec::boundary(
                numbers_from_json(jr.at("mu")), numbers_from_json(jr.at("range")),
                jr.value("weight", 1.0)));
        } else if (kind == "smoothness") {
            cfg.regularizers.push_back(RegularizerSpec::smoothness(
                sizes_from_json(jr.value("skip", json::array())), jr.value("weight", 1.0)));
        } else {
            throw std::invalid_argument("unknown regularizer kind: " + kind);
        }
    }
    return cfg;
}

TandemTrainConfig tandem_config_from_json(const json& j, const TandemTrainConfig& defaults) {
    TandemTrainConfig cfg = defaults;
    if (j.contains("train")) cfg.base = train_config_from_json(j["train"], cfg.base);
    cfg.weights.alpha = j.value("alpha", cfg.weights.alpha);
    cfg.weights.beta = j.value("beta", cfg.weights.beta);
    cfg.candidate_count = j.value("candidates", cfg.candidate_count);
    cfg.validation_fraction = j.value("validation_fraction", cfg.validation_fraction);
    if (j.contains("hidden")) cfg.hidden = sizes_from_json(j["hidden"]);
    if (j.contains("activation")) {
        cfg.hidden_act = activation_from_string(j["activation"].get<std::string>());
    }
    return cfg;
}

ExperimentConfig experiment_config_from_json(const json& j) {
    ExperimentConfig cfg;
    if (j.contains("nfp")) cfg.nfp = nfp_config_from_json(j["nfp"]);
    if (j.contains("corruption")) {
        cfg.corruption = corruption_config_from_json(j["corruption"], cfg.nfp.design_dim());
    }
    cfg.sample_count = j.value("sample_count", cfg.sample_count);
    if (j.contains("surrogate")) {
        const auto& js = j["surrogate"];
        if (js.contains("hidden")) cfg.surrogate.hidden = sizes_from_json(js["hidden"]);
        if (js.contains("activation")) {
            cfg.surrogate.hidden_act = activation_from_string(js["activation"].get<std::string>());
        }
        if (js.contains("train")) {
            cfg.surrogate.train = train_config_from_json(js["train"], cfg.surrogate.train);
        }
    }
    if (j.contains("ensemble")) cfg.ensemble = ensemble_config_from_json(j["ensemble"], cfg.ensemble);
    if (j.contains("inversion")) cfg.inversion = inversion_config_from_json(j["inversion"], cfg.inversion);
    if (j.contains("tandem")) cfg.tandem = tandem_config_from_json(j["tandem"], cfg.tandem);
    cfg.target_count = j.value("target_count", cfg.target_count);
    cfg.repeat_count = j.value("repeat_count", cfg.repeat_count);
    cfg.no_hyperparam_seeds = j.value("no_hyperparam_seeds", cfg.no_hyperparam_seeds);
    cfg.validation_fraction = j.value("validation_fraction", cfg.validation_fraction);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.threads = j.value("threads", cfg.threads);
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    json j;
    in >> j;
    return experiment_config_from_json(j);
}

}  // namespace autoinv
