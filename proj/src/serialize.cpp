#include "autoinv/serialize.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "autoinv/errors.hpp"

namespace autoinv {

using nlohmann::json;

std::string encode_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

double decode_double(const std::string& s) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) throw std::invalid_argument("decode_double: cannot parse '" + s + "'");
    return v;
}

namespace {

json doubles_to_json(std::span<const double> values) {
    json arr = json::array();
    for (double v : values) arr.push_back(encode_double(v));
    return arr;
}

std::vector<double> doubles_from_json(const json& arr) {
    std::vector<double> out;
    out.reserve(arr.size());
    for (const auto& v : arr) out.push_back(decode_double(v.get<std::string>()));
    return out;
}

void expect_format(const json& j, const std::string& format, int version) {
    if (j.value("format", "") != format || j.value("version", 0) != version) {
        throw std::runtime_error("unexpected file format (want " + format + " v" +
                                 std::to_string(version) + ")");
    }
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    return j;
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

}  // namespace

json mlp_to_json(const Mlp& net) {
    json layers = json::array();
    for (std::size_t k = 0; k < net.layer_count(); ++k) {
        const auto& l = net.layers[k];
        layers.push_back({{"in", l.in},
                          {"out", l.out},
                          {"activation", to_string(l.act)},
                          {"weights", doubles_to_json(net.weights(k))},
                          {"biases", doubles_to_json(net.biases(k))}});
    }
    return {{"layers", layers}};
}

Mlp mlp_from_json(const json& j) {
    std::vector<LayerShape> shapes;
    for (const auto& jl : j.at("layers")) {
        shapes.push_back({jl.at("in").get<std::size_t>(), jl.at("out").get<std::size_t>(),
                          activation_from_string(jl.at("activation").get<std::string>())});
    }
    Mlp net = Mlp::from_shapes(std::move(shapes));
    std::size_t k = 0;
    for (const auto& jl : j.at("layers")) {
        const auto w = doubles_from_json(jl.at("weights"));
        const auto b = doubles_from_json(jl.at("biases"));
        require_dim("mlp_from_json weights", net.weights(k).size(), w.size());
        require_dim("mlp_from_json biases", net.biases(k).size(), b.size());
        std::copy(w.begin(), w.end(), net.weights(k).begin());
        std::copy(b.begin(), b.end(), net.biases(k).begin());
        ++k;
    }
    return net;
}

json normalizer_to_json(const Normalizer& n) {
    return {{"mean", doubles_to_json(n.mean)}, {"std", doubles_to_json(n.std)}};
}

Normalizer normalizer_from_json(const json& j) {
    Normalizer n;
    n.mean = doubles_from_json(j.at("mean"));
    n.std = doubles_from_json(j.at("std"));
    require_dim("normalizer_from_json", n.mean.size(), n.std.size());
    return n;
}

json nfp_spec_to_json(const NfpSpec& spec) {
    json j;
    switch (spec.kind) {
        case NfpKind::RobotArm: j["kind"] = "robot_arm"; break;
        case NfpKind::Sine1D: j["kind"] = "sine1d"; break;
        case NfpKind::Toy2D: j["kind"] = "toy2d"; break;
    }
    j["segment_lengths"] = doubles_to_json(spec.segment_lengths);
    j["base_std"] = encode_double(spec.base_std);
    j["angle_std"] = encode_double(spec.angle_std);
    j["amplitude"] = encode_double(spec.amplitude);
    j["frequency"] = encode_double(spec.frequency);
    j["box_lo"] = doubles_to_json(spec.box_lo);
    j["box_hi"] = doubles_to_json(spec.box_hi);
    return j;
}

NfpSpec nfp_spec_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    NfpSpec spec;
    if (kind == "robot_arm") {
        spec = NfpSpec::robot_arm();
    } else if (kind == "sine1d") {
        spec = NfpSpec::sine1d();
    } else if (kind == "toy2d") {
        spec = NfpSpec::toy2d();
    } else {
        throw std::runtime_error("unknown nfp kind: " + kind);
    }
    if (j.contains("segment_lengths")) {
        const auto l = doubles_from_json(j["segment_lengths"]);
        require_dim("nfp segment_lengths", 3, l.size());
        std::copy(l.begin(), l.end(), spec.segment_lengths.begin());
    }
    if (j.contains("base_std")) spec.base_std = decode_double(j["base_std"].get<std::string>());
    if (j.contains("angle_std")) spec.angle_std = decode_double(j["angle_std"].get<std::string>());
    if (j.contains("amplitude")) spec.amplitude = decode_double(j["amplitude"].get<std::string>());
    if (j.contains("frequency")) spec.frequency = decode_double(j["frequency"].get<std::string>());
    if (j.contains("box_lo")) spec.box_lo = doubles_from_json(j["box_lo"]);
    if (j.contains("box_hi")) spec.box_hi = doubles_from_json(j["box_hi"]);
    spec.validate();
    return spec;
}

json corruption_to_json(const CorruptionSpec& c) {
    json noise = json::array();
    for (const auto& nr : c.noise_regions) {
        noise.push_back({{"lo", doubles_to_json(nr.region.lo)},
                         {"hi", doubles_to_json(nr.region.hi)},
                         {"std", encode_double(nr.noise_std)}});
    }
    json sparse = json::array();
    for (const auto& sr : c.sparse_regions) {
        sparse.push_back({{"lo", doubles_to_json(sr.lo)}, {"hi", doubles_to_json(sr.hi)}});
    }
    return {{"noise_regions", noise}, {"sparse_regions", sparse}};
}

CorruptionSpec corruption_from_json(const json& j) {
    CorruptionSpec c;
    for (const auto& jn : j.value("noise_regions", json::array())) {
        NoiseRegion nr;
        nr.region.lo = doubles_from_json(jn.at("lo"));
        nr.region.hi = doubles_from_json(jn.at("hi"));
        nr.noise_std = decode_double(jn.at("std").get<std::string>());
        c.noise_regions.push_back(std::move(nr));
    }
    for (const auto& js : j.value("sparse_regions", json::array())) {
        IntervalRegion sr;
        sr.lo = doubles_from_json(js.at("lo"));
        sr.hi = doubles_from_json(js.at("hi"));
        c.sparse_regions.push_back(std::move(sr));
    }
    return c;
}

void save_mlp_model(const std::string& path, const MlpModelFile& model) {
    write_json_file(path, {{"format", "autoinv-mlp-model"},
                           {"version", 1},
                           {"role", model.role},
                           {"net", mlp_to_json(model.net)},
                           {"design_normalizer", normalizer_to_json(model.design_norm)},
                           {"performance_normalizer", normalizer_to_json(model.performance_norm)}});
}

MlpModelFile load_mlp_model(const std::string& path) {
    const json j = read_json_file(path);
    expect_format(j, "autoinv-mlp-model", 1);
    MlpModelFile model;
    model.role = j.value("role", "surrogate");
    model.net = mlp_from_json(j.at("net"));
    model.design_norm = normalizer_from_json(j.at("design_normalizer"));
    model.performance_norm = normalizer_from_json(j.at("performance_normalizer"));
    return model;
}

void save_ensemble_model(const std::string& path, const EnsembleModelFile& model) {
    json roster = json::array();
    for (const auto& act : model.ensemble.roster) roster.push_back(to_string(act));
    json members = json::array();
    for (const auto& m : model.ensemble.members) {
        members.push_back({{"mean_net", mlp_to_json(m.mean_net)},
                           {"var_net", mlp_to_json(m.var_net)}});
    }
    write_json_file(path,
                    {{"format", "autoinv-ensemble"},
                     {"version", 1},
                     {"variance_floor", encode_double(model.ensemble.variance_floor)},
                     {"roster", roster},
                     {"members", members},
                     {"design_normalizer", normalizer_to_json(model.design_norm)},
                     {"performance_normalizer", normalizer_to_json(model.performance_norm)}});
}

EnsembleModelFile load_ensemble_model(const std::string& path) {
    const json j = read_json_file(path);
    expect_format(j, "autoinv-ensemble", 1);
    EnsembleModelFile model;
    model.ensemble.variance_floor = decode_double(j.at("variance_floor").get<std::string>());
    for (const auto& name : j.at("roster")) {
        model.ensemble.roster.push_back(activation_from_string(name.get<std::string>()));
    }
    for (const auto& jm : j.at("members")) {
        EnsembleMember m;
        m.mean_net = mlp_from_json(jm.at("mean_net"));
        m.var_net = mlp_from_json(jm.at("var_net"));
        model.ensemble.members.push_back(std::move(m));
    }
    model.design_norm = normalizer_from_json(j.at("design_normalizer"));
    model.performance_norm = normalizer_from_json(j.at("performance_normalizer"));
    model.ensemble.validate();
    return model;
}

void save_dataset(const std::string& path, const SampledDataset& dataset) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "# autoinv-dataset v1\n";
    out << "# seed " << dataset.seed << "\n";
    out << "# samples " << dataset.sample_count << "\n";
    out << "# design_dim " << dataset.data.design_dim() << "\n";
    out << "# performance_dim " << dataset.data.performance_dim() << "\n";
    out << "# nfp " << nfp_spec_to_json(dataset.spec).dump() << "\n";
    out << "# corruption " << corruption_to_json(dataset.corruption).dump() << "\n";
    char buf[32];
    for (std::size_t r = 0; r < dataset.data.size(); ++r) {
        bool first = true;
        for (double v : dataset.data.designs.row(r)) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << (first ? "" : "\t") << buf;
            first = false;
        }
        for (double v : dataset.data.performances.row(r)) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << '\t' << buf;
        }
        out << '\n';
    }
}

SampledDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    SampledDataset dataset;
    std::size_t design_dim = 0;
    std::size_t performance_dim = 0;
    std::vector<double> design_values;
    std::vector<double> performance_values;
    std::string line;
    bool saw_magic = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string key;
            hs >> key;
            if (key == "autoinv-dataset") {
                std::string ver;
                hs >> ver;
                if (ver != "v1") throw std::runtime_error("unsupported dataset version " + ver);
                saw_magic = true;
            } else if (key == "seed") {
                hs >> dataset.seed;
            } else if (key == "samples") {
                hs >> dataset.sample_count;
            } else if (key == "design_dim") {
                hs >> design_dim;
            } else if (key == "performance_dim") {
                hs >> performance_dim;
            } else if (key == "nfp") {
                std::string rest;
                std::getline(hs, rest);
                dataset.spec = nfp_spec_from_json(json::parse(rest));
            } else if (key == "corruption") {
                std::string rest;
                std::getline(hs, rest);
                dataset.corruption = corruption_from_json(json::parse(rest));
            }
            continue;
        }
        if (!saw_magic) throw std::runtime_error(path + " is not an autoinv dataset");
        std::istringstream rs(line);
        double v = 0.0;
        std::size_t col = 0;
        while (rs >> v) {
            if (col < design_dim) {
                design_values.push_back(v);
            } else {
                performance_values.push_back(v);
            }
            ++col;
        }
        if (col != design_dim + performance_dim) {
            throw std::runtime_error("dataset row has wrong column count");
        }
    }
    const std::size_t n = design_values.size() / std::max<std::size_t>(design_dim, 1);
    Matrix designs(n, design_dim);
    designs.data = std::move(design_values);
    Matrix performances(n, performance_dim);
    performances.data = std::move(performance_values);
    dataset.data = Dataset::from_rows(std::move(designs), std::move(performances));
    return dataset;
}

Matrix load_targets(const std::string& path, std::size_t expected_dim) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<double> values;
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream rs(line);
        double v = 0.0;
        std::size_t col = 0;
        while (rs >> v) {
            values.push_back(v);
            ++col;
        }
        if (col != expected_dim) {
            throw DimensionError("targets file row " + std::to_string(rows), expected_dim, col);
        }
        ++rows;
    }
    Matrix targets(rows, expected_dim);
    targets.data = std::move(values);
    return targets;
}

void save_targets(const std::string& path, const Matrix& targets) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    char buf[32];
    for (std::size_t r = 0; r < targets.rows; ++r) {
        bool first = true;
        for (double v : targets.row(r)) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << (first ? "" : "\t") << buf;
            first = false;
        }
        out << '\n';
    }
}

}  // namespace autoinv
