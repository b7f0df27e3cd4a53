#pragma once

#include <string>

#include <json.hpp>

#include "autoinv/harness.hpp"

namespace autoinv {

// Human-written experiment configs are plain JSON (numbers as JSON numbers);
// every field is optional and falls back to the defaults in the structs.
// The full schema is documented in the README.
TrainConfig train_config_from_json(const nlohmann::json& j, const TrainConfig& defaults = {});
EnsembleTrainConfig ensemble_config_from_json(const nlohmann::json& j,
                                              const EnsembleTrainConfig& defaults = {});
InversionConfig inversion_config_from_json(const nlohmann::json& j,
                                           const InversionConfig& defaults = {});
TandemTrainConfig tandem_config_from_json(const nlohmann::json& j,
                                          const TandemTrainConfig& defaults = {});
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

ExperimentConfig load_experiment_config(const std::string& path);

}  // namespace autoinv
