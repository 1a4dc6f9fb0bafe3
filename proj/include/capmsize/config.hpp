#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "capmsize/analysis.hpp"
#include "capmsize/estimate.hpp"
#include "capmsize/model.hpp"
#include "capmsize/panel.hpp"
#include "capmsize/simulate.hpp"

namespace capmsize {

// Key order in echoes and reports follows the order keys were written in,
// so serialized output is reproducible byte for byte.
using Json = nlohmann::ordered_json;

Json load_json_file(const std::string& path);

// Rejects keys outside `allowed`; context names the object in the message.
void require_keys(const Json& object, const std::vector<std::string>& allowed,
                  const std::string& context);

CoefficientSpec coefficient_from_json(const Json& j, const std::string& context);
Json coefficient_to_json(const CoefficientSpec& spec);

MarketModel model_from_json(const Json& j);
Json model_to_json(const MarketModel& model);

// Builds the full simulation setup from the top-level config ("model",
// "simulate", "seed").
SimulationConfig simulation_from_json(const Json& root);

struct CurveOptions {
    double time = 100.0;
    CurveKind kind = CurveKind::modified;
    int rank_lo = 10;
    int rank_hi = 90;
};
CurveOptions curve_options_from_json(const Json& root);

struct StabilityOptions {
    double probe_lo = -1000.0;
    double probe_hi = 1000.0;
};
StabilityOptions stability_options_from_json(const Json& root);

DensityGrid density_grid_from_json(const Json& root);

enum class EstimateTarget { price, premium, both };

struct EstimateConfig {
    std::string price_file;
    std::string total_file;
    std::string caps_file;
    std::vector<std::string> rate_files;
    RateBasis rate_basis = RateBasis::percent;
    PanelRange range;
    std::vector<int> deciles;
    EstimationOptions options;
    EstimateTarget target = EstimateTarget::price;
};
EstimateConfig estimate_config_from_json(const Json& root);

struct FundsConfig {
    std::string small_file;
    std::string mid_file;
    std::string large_file;
    std::vector<std::string> rate_files;
    RateBasis value_basis = RateBasis::fraction;
    RateBasis rate_basis = RateBasis::percent;
    PanelRange range;
};
FundsConfig funds_config_from_json(const Json& root);

struct OutputOptions {
    std::string dir = "runs";
    bool csv = true;
    bool binary = false;
};
OutputOptions output_options_from_json(const Json& root);

std::uint64_t seed_from_json(const Json& root);

}  // namespace capmsize
