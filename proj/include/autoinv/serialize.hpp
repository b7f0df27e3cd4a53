#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "autoinv/dataset.hpp"
#include "autoinv/ensemble.hpp"
#include "autoinv/mlp.hpp"
#include "autoinv/nfp.hpp"

namespace autoinv {

// All persisted doubles are encoded as hexfloat strings ("0x1.8p+1", "inf"),
// so round-trips are bit-exact for every finite and infinite value.
std::string encode_double(double v);
double decode_double(const std::string& s);

nlohmann::json mlp_to_json(const Mlp& net);
Mlp mlp_from_json(const nlohmann::json& j);

nlohmann::json normalizer_to_json(const Normalizer& n);
Normalizer normalizer_from_json(const nlohmann::json& j);

nlohmann::json nfp_spec_to_json(const NfpSpec& spec);
NfpSpec nfp_spec_from_json(const nlohmann::json& j);

nlohmann::json corruption_to_json(const CorruptionSpec& c);
CorruptionSpec corruption_from_json(const nlohmann::json& j);

// A single network plus the normalizers of both spaces. role is "surrogate"
// (design -> performance) or "inverse" (performance -> design); both use the
// same schema.
struct MlpModelFile {
    std::string role = "surrogate";
    Mlp net;
    Normalizer design_norm;
    Normalizer performance_norm;
};

void save_mlp_model(const std::string& path, const MlpModelFile& model);
MlpModelFile load_mlp_model(const std::string& path);

struct EnsembleModelFile {
    DeepEnsemble ensemble;
    Normalizer design_norm;
    Normalizer performance_norm;
};

void save_ensemble_model(const std::string& path, const EnsembleModelFile& model);
EnsembleModelFile load_ensemble_model(const std::string& path);

// Columnar text: '#'-prefixed header lines (version, seed, sample count,
// provenance JSON) followed by one tab-separated row of design and
// performance values per sample, printed with 17 significant digits.
void save_dataset(const std::string& path, const SampledDataset& dataset);
SampledDataset load_dataset(const std::string& path);

// Targets files: one whitespace-separated performance vector per line;
// '#' lines ignored.
Matrix load_targets(const std::string& path, std::size_t expected_dim);
void save_targets(const std::string& path, const Matrix& targets);

}  // namespace autoinv
