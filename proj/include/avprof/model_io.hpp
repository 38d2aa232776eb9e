#pragma once

#include <filesystem>
#include <string_view>
#include <variant>

#include "json.hpp"

#include "avprof/forest.hpp"
#include "avprof/mlp.hpp"
#include "avprof/normalizer.hpp"
#include "avprof/recurrent.hpp"

namespace avprof {

inline constexpr int kModelFormatVersion = 1;

/// Any trained learner; the JSON form carries a "family" tag (rf, seq, mlp).
using TrainedModel = std::variant<RandomForest, SeqModel, MlpModel>;

std::string_view family_name(const TrainedModel& model);

nlohmann::json to_json(const Normalizer& n);
Normalizer normalizer_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RfHyperParams& p);
RfHyperParams rf_params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SeqHyperParams& p);
SeqHyperParams seq_params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MlpHyperParams& p);
MlpHyperParams mlp_params_from_json(const nlohmann::json& j);

/// Versioned JSON; reloading reproduces predictions bit-exactly.
nlohmann::json model_to_json(const TrainedModel& model);
/// Throws DataError on an unknown family, unsupported version or malformed body.
TrainedModel model_from_json(const nlohmann::json& j);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace avprof
