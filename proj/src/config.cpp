#include "capmsize/config.hpp"

#include <algorithm>
#include <fstream>

#include "capmsize/errors.hpp"

namespace capmsize {

Json load_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CoverageError("cannot open config file " + path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void require_keys(const Json& object, const std::vector<std::string>& allowed,
                  const std::string& context) {
    if (!object.is_object()) throw ParseError(context + ": expected an object");
    for (const auto& item : object.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
            throw ParseError(context + ": unknown key '" + item.key() + "'");
        }
    }
}

namespace {

const Json& require(const Json& j, const std::string& key, const std::string& context) {
    if (!j.contains(key)) throw ParseError(context + ": missing key '" + key + "'");
    return j.at(key);
}

double as_number(const Json& j, const std::string& context) {
    if (!j.is_number()) throw ParseError(context + ": expected a number");
    return j.get<double>();
}

double number_at(const Json& j, const std::string& key, const std::string& context) {
    return as_number(require(j, key, context), context + "." + key);
}

double number_or(const Json& j, const std::string& key, double fallback,
                 const std::string& context) {
    if (!j.contains(key)) return fallback;
    return as_number(j.at(key), context + "." + key);
}

int int_at(const Json& j, const std::string& key, const std::string& context) {
    const Json& v = require(j, key, context);
    if (!v.is_number_integer()) throw ParseError(context + "." + key + ": expected an integer");
    return v.get<int>();
}

int int_or(const Json& j, const std::string& key, int fallback, const std::string& context) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer()) {
        throw ParseError(context + "." + key + ": expected an integer");
    }
    return j.at(key).get<int>();
}

bool bool_or(const Json& j, const std::string& key, bool fallback, const std::string& context) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_boolean()) throw ParseError(context + "." + key + ": expected a boolean");
    return j.at(key).get<bool>();
}

std::string string_at(const Json& j, const std::string& key, const std::string& context) {
    const Json& v = require(j, key, context);
    if (!v.is_string()) throw ParseError(context + "." + key + ": expected a string");
    return v.get<std::string>();
}

std::string string_or(const Json& j, const std::string& key, const std::string& fallback,
                      const std::string& context) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_string()) throw ParseError(context + "." + key + ": expected a string");
    return j.at(key).get<std::string>();
}

CoefficientBranch branch_from_json(const Json& j, const std::string& context) {
    require_keys(j, {"kind", "scale", "exponent"}, context);
    CoefficientBranch branch;
    const std::string kind = string_at(j, "kind", context);
    if (kind == "linear") {
        branch.kind = CoefficientKind::linear;
    } else if (kind == "power") {
        branch.kind = CoefficientKind::power;
    } else if (kind == "constant") {
        branch.kind = CoefficientKind::constant;
    } else {
        throw ParseError(context + ".kind: expected linear, power or constant, got '" + kind +
                         "'");
    }
    branch.scale = number_at(j, "scale", context);
    branch.exponent = number_or(j, "exponent", 1.0, context);
    if (branch.kind != CoefficientKind::power && j.contains("exponent")) {
        throw ParseError(context + ".exponent: only power coefficients take an exponent");
    }
    return branch;
}

Json branch_to_json(const CoefficientBranch& branch) {
    Json j;
    switch (branch.kind) {
        case CoefficientKind::linear:
            j["kind"] = "linear";
            break;
        case CoefficientKind::power:
            j["kind"] = "power";
            break;
        case CoefficientKind::constant:
            j["kind"] = "constant";
            break;
    }
    j["scale"] = branch.scale;
    if (branch.kind == CoefficientKind::power) j["exponent"] = branch.exponent;
    return j;
}

bool branches_equal(const CoefficientBranch& a, const CoefficientBranch& b) {
    return a.kind == b.kind && a.scale == b.scale && a.exponent == b.exponent;
}

RateBasis basis_from_string(const std::string& s, const std::string& context) {
    if (s == "fraction") return RateBasis::fraction;
    if (s == "percent") return RateBasis::percent;
    throw ParseError(context + ": expected fraction or percent, got '" + s + "'");
}

PanelRange range_from_json(const Json& j, const std::string& context) {
    if (!j.is_array() || j.size() != 2) {
        throw ParseError(context + ": expected [first_month, last_month]");
    }
    PanelRange range;
    if (!j[0].is_number_integer() || !j[1].is_number_integer()) {
        throw ParseError(context + ": months must be YYYYMM integers");
    }
    range.first_month = j[0].get<int>();
    range.last_month = j[1].get<int>();
    return range;
}

std::vector<std::string> string_list(const Json& j, const std::string& context) {
    if (!j.is_array()) throw ParseError(context + ": expected an array of strings");
    std::vector<std::string> out;
    for (const auto& item : j) {
        if (!item.is_string()) throw ParseError(context + ": expected an array of strings");
        out.push_back(item.get<std::string>());
    }
    return out;
}

}  // namespace

CoefficientSpec coefficient_from_json(const Json& j, const std::string& context) {
    if (!j.is_object()) throw ParseError(context + ": expected an object");
    CoefficientSpec spec;
    if (j.contains("kind")) {
        spec.positive = branch_from_json(j, context);
        spec.negative = spec.positive;
    } else {
        require_keys(j, {"positive", "negative", "joint"}, context);
        spec.positive = branch_from_json(require(j, "positive", context), context + ".positive");
        spec.negative = branch_from_json(require(j, "negative", context), context + ".negative");
        if (j.contains("joint")) {
            const Json& joint = j.at("joint");
            require_keys(joint, {"policy", "below", "above"}, context + ".joint");
            const std::string policy = string_at(joint, "policy", context + ".joint");
            if (policy == "extend") {
                spec.joint = JointPolicy::extend;
            } else if (policy == "bridge") {
                spec.joint = JointPolicy::bridge;
            } else {
                throw ParseError(context + ".joint.policy: expected extend or bridge, got '" +
                                 policy + "'");
            }
            spec.bridge_below = number_or(joint, "below", 1.0, context + ".joint");
            spec.bridge_above = number_or(joint, "above", 1.0, context + ".joint");
        }
    }
    spec.validate();
    return spec;
}

Json coefficient_to_json(const CoefficientSpec& spec) {
    if (branches_equal(spec.positive, spec.negative) && spec.joint == JointPolicy::extend) {
        return branch_to_json(spec.positive);
    }
    Json j;
    j["positive"] = branch_to_json(spec.positive);
    j["negative"] = branch_to_json(spec.negative);
    Json joint;
    joint["policy"] = spec.joint == JointPolicy::extend ? "extend" : "bridge";
    if (spec.joint == JointPolicy::bridge) {
        joint["below"] = spec.bridge_below;
        joint["above"] = spec.bridge_above;
    }
    j["joint"] = joint;
    return j;
}

MarketModel model_from_json(const Json& j) {
    require_keys(j,
                 {"stocks", "alpha", "alpha_wealth", "beta_deviation", "sigma", "benchmark",
                  "noise_correlation"},
                 "model");
    MarketModel model;
    model.n = int_at(j, "stocks", "model");
    model.alpha = coefficient_from_json(require(j, "alpha", "model"), "model.alpha");
    model.alpha_wealth = j.contains("alpha_wealth")
                             ? coefficient_from_json(j.at("alpha_wealth"), "model.alpha_wealth")
                             : model.alpha;
    model.beta_deviation =
        coefficient_from_json(require(j, "beta_deviation", "model"), "model.beta_deviation");
    model.sigma = coefficient_from_json(require(j, "sigma", "model"), "model.sigma");
    if (j.contains("benchmark")) {
        const Json& b = j.at("benchmark");
        require_keys(b, {"size_drift", "wealth_drift", "size_vol", "wealth_vol", "correlation"},
                     "model.benchmark");
        model.benchmark.size_drift = number_or(b, "size_drift", 0.0, "model.benchmark");
        model.benchmark.wealth_drift = number_or(b, "wealth_drift", 0.0, "model.benchmark");
        model.benchmark.size_vol = number_or(b, "size_vol", 0.0, "model.benchmark");
        model.benchmark.wealth_vol = number_or(b, "wealth_vol", 0.0, "model.benchmark");
        model.benchmark.correlation = number_or(b, "correlation", 0.0, "model.benchmark");
    }
    if (!j.contains("noise_correlation") ||
        (j.at("noise_correlation").is_string() &&
         j.at("noise_correlation").get<std::string>() == "identity")) {
        model.noise_correlation = Eigen::MatrixXd::Identity(model.n, model.n);
    } else {
        const Json& m = j.at("noise_correlation");
        if (!m.is_array()) {
            throw ParseError("model.noise_correlation: expected \"identity\" or a matrix");
        }
        model.noise_correlation.resize(model.n, model.n);
        if (static_cast<Eigen::Index>(m.size()) != model.n) {
            throw ParseError("model.noise_correlation: expected " + std::to_string(model.n) +
                             " rows");
        }
        for (Eigen::Index r = 0; r < model.n; ++r) {
            const Json& row = m[static_cast<std::size_t>(r)];
            if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != model.n) {
                throw ParseError("model.noise_correlation: row " + std::to_string(r) +
                                 " must have " + std::to_string(model.n) + " entries");
            }
            for (Eigen::Index c = 0; c < model.n; ++c) {
                model.noise_correlation(r, c) =
                    as_number(row[static_cast<std::size_t>(c)], "model.noise_correlation");
            }
        }
    }
    model.validate();
    return model;
}

Json model_to_json(const MarketModel& model) {
    Json j;
    j["stocks"] = model.n;
    j["alpha"] = coefficient_to_json(model.alpha);
    j["alpha_wealth"] = coefficient_to_json(model.alpha_wealth);
    j["beta_deviation"] = coefficient_to_json(model.beta_deviation);
    j["sigma"] = coefficient_to_json(model.sigma);
    Json b;
    b["size_drift"] = model.benchmark.size_drift;
    b["wealth_drift"] = model.benchmark.wealth_drift;
    b["size_vol"] = model.benchmark.size_vol;
    b["wealth_vol"] = model.benchmark.wealth_vol;
    b["correlation"] = model.benchmark.correlation;
    j["benchmark"] = b;
    if (model.noise_correlation.isIdentity(0.0)) {
        j["noise_correlation"] = "identity";
    } else {
        Json m = Json::array();
        for (Eigen::Index r = 0; r < model.n; ++r) {
            Json row = Json::array();
            for (Eigen::Index c = 0; c < model.n; ++c) row.push_back(model.noise_correlation(r, c));
            m.push_back(row);
        }
        j["noise_correlation"] = m;
    }
    return j;
}

namespace {

Eigen::VectorXd vector_from_json(const Json& j, Eigen::Index n, const std::string& context) {
    if (j.is_number()) return Eigen::VectorXd::Constant(n, j.get<double>());
    if (j.is_array()) {
        if (static_cast<Eigen::Index>(j.size()) != n) {
            throw ParseError(context + ": expected " + std::to_string(n) + " entries");
        }
        Eigen::VectorXd out(n);
        for (Eigen::Index i = 0; i < n; ++i) out[i] = as_number(j[static_cast<std::size_t>(i)], context);
        return out;
    }
    if (j.is_object() && j.contains("linspace")) {
        require_keys(j, {"linspace"}, context);
        const Json& pair = j.at("linspace");
        if (!pair.is_array() || pair.size() != 2) {
            throw ParseError(context + ".linspace: expected [lo, hi]");
        }
        return Eigen::VectorXd::LinSpaced(n, as_number(pair[0], context),
                                          as_number(pair[1], context));
    }
    throw ParseError(context + ": expected a number, an array or {\"linspace\": [lo, hi]}");
}

}  // namespace

SimulationConfig simulation_from_json(const Json& root) {
    SimulationConfig config;
    config.model = model_from_json(require(root, "model", "config"));
    config.seed = seed_from_json(root);
    config.initial.relative_sizes = Eigen::VectorXd::Zero(config.model.n);
    if (!root.contains("simulate")) {
        config.validate();
        return config;
    }
    const Json& s = root.at("simulate");
    require_keys(s, {"horizon", "dt", "paths", "scheme", "record_stride", "initial"}, "simulate");
    config.horizon = number_or(s, "horizon", config.horizon, "simulate");
    config.dt = number_or(s, "dt", config.dt, "simulate");
    config.paths = int_or(s, "paths", config.paths, "simulate");
    config.scheme = scheme_from_name(string_or(s, "scheme", "euler", "simulate"));
    config.record_stride = int_or(s, "record_stride", config.record_stride, "simulate");
    if (s.contains("initial")) {
        const Json& init = s.at("initial");
        require_keys(init,
                     {"relative_sizes", "log_wealth", "log_benchmark_size",
                      "log_benchmark_wealth"},
                     "simulate.initial");
        if (init.contains("relative_sizes")) {
            config.initial.relative_sizes = vector_from_json(
                init.at("relative_sizes"), config.model.n, "simulate.initial.relative_sizes");
        }
        if (init.contains("log_wealth")) {
            config.initial.log_wealth = vector_from_json(init.at("log_wealth"), config.model.n,
                                                         "simulate.initial.log_wealth");
        }
        config.initial.log_benchmark_size =
            number_or(init, "log_benchmark_size", 0.0, "simulate.initial");
        config.initial.log_benchmark_wealth =
            number_or(init, "log_benchmark_wealth", 0.0, "simulate.initial");
    }
    config.validate();
    return config;
}

CurveOptions curve_options_from_json(const Json& root) {
    CurveOptions options;
    if (!root.contains("curve")) return options;
    const Json& c = root.at("curve");
    require_keys(c, {"time", "kind", "rank_lo", "rank_hi"}, "curve");
    options.time = number_or(c, "time", options.time, "curve");
    const std::string kind = string_or(c, "kind", "modified", "curve");
    if (kind == "modified") {
        options.kind = CurveKind::modified;
    } else if (kind == "classical") {
        options.kind = CurveKind::classical;
    } else {
        throw ParseError("curve.kind: expected modified or classical, got '" + kind + "'");
    }
    options.rank_lo = int_or(c, "rank_lo", options.rank_lo, "curve");
    options.rank_hi = int_or(c, "rank_hi", options.rank_hi, "curve");
    return options;
}

StabilityOptions stability_options_from_json(const Json& root) {
    StabilityOptions options;
    if (!root.contains("stability")) return options;
    const Json& s = root.at("stability");
    require_keys(s, {"probe_lo", "probe_hi"}, "stability");
    options.probe_lo = number_or(s, "probe_lo", options.probe_lo, "stability");
    options.probe_hi = number_or(s, "probe_hi", options.probe_hi, "stability");
    return options;
}

DensityGrid density_grid_from_json(const Json& root) {
    DensityGrid grid;
    if (!root.contains("density")) return grid;
    const Json& d = root.at("density");
    require_keys(d, {"lo", "hi", "step"}, "density");
    grid.lo = number_or(d, "lo", grid.lo, "density");
    grid.hi = number_or(d, "hi", grid.hi, "density");
    grid.step = number_or(d, "step", grid.step, "density");
    return grid;
}

EstimateConfig estimate_config_from_json(const Json& root) {
    const Json& e = require(root, "estimate", "config");
    require_keys(e,
                 {"files", "rate_basis", "range", "deciles", "benchmark", "target",
                  "window_months", "ljung_box_lags", "acf_lags", "gamma_estimator"},
                 "estimate");
    EstimateConfig config;
    const Json& files = require(e, "files", "estimate");
    require_keys(files, {"price", "total", "caps", "rates"}, "estimate.files");
    config.price_file = string_at(files, "price", "estimate.files");
    config.total_file = string_at(files, "total", "estimate.files");
    config.caps_file = string_at(files, "caps", "estimate.files");
    config.rate_files = string_list(require(files, "rates", "estimate.files"),
                                    "estimate.files.rates");
    config.rate_basis =
        basis_from_string(string_or(e, "rate_basis", "percent", "estimate"), "estimate.rate_basis");
    config.range = range_from_json(require(e, "range", "estimate"), "estimate.range");
    if (e.contains("deciles")) {
        const Json& d = e.at("deciles");
        if (!d.is_array()) throw ParseError("estimate.deciles: expected an array of integers");
        for (const auto& item : d) {
            if (!item.is_number_integer()) {
                throw ParseError("estimate.deciles: expected an array of integers");
            }
            config.deciles.push_back(item.get<int>());
        }
    } else {
        config.deciles = {1, 2, 3, 4, 5, 6, 7, 8};
    }
    const std::string side = string_or(e, "benchmark", "top", "estimate");
    if (side == "top") {
        config.options.side = BenchmarkSide::top;
    } else if (side == "bottom") {
        config.options.side = BenchmarkSide::bottom;
    } else {
        throw ParseError("estimate.benchmark: expected top or bottom, got '" + side + "'");
    }
    const std::string target = string_or(e, "target", "price", "estimate");
    if (target == "price") {
        config.target = EstimateTarget::price;
    } else if (target == "premium") {
        config.target = EstimateTarget::premium;
    } else if (target == "both") {
        config.target = EstimateTarget::both;
    } else {
        throw ParseError("estimate.target: expected price, premium or both, got '" + target +
                         "'");
    }
    config.options.window_months = int_or(e, "window_months", 24, "estimate");
    if (e.contains("ljung_box_lags")) {
        const Json& lags = e.at("ljung_box_lags");
        if (!lags.is_array()) {
            throw ParseError("estimate.ljung_box_lags: expected an array of integers");
        }
        config.options.ljung_box_lags.clear();
        for (const auto& item : lags) {
            if (!item.is_number_integer()) {
                throw ParseError("estimate.ljung_box_lags: expected an array of integers");
            }
            config.options.ljung_box_lags.push_back(item.get<int>());
        }
    }
    config.options.acf_lags = int_or(e, "acf_lags", config.options.acf_lags, "estimate");
    const std::string estimator = string_or(e, "gamma_estimator", "mean", "estimate");
    if (estimator == "mean") {
        config.options.gamma_estimator = GammaEstimator::mean_ratio;
    } else if (estimator == "ls-origin") {
        config.options.gamma_estimator = GammaEstimator::ls_origin;
    } else {
        throw ParseError("estimate.gamma_estimator: expected mean or ls-origin, got '" +
                         estimator + "'");
    }
    return config;
}

FundsConfig funds_config_from_json(const Json& root) {
    const Json& f = require(root, "funds", "config");
    require_keys(f, {"files", "value_basis", "rate_basis", "range"}, "funds");
    FundsConfig config;
    const Json& files = require(f, "files", "funds");
    require_keys(files, {"small", "mid", "large", "rates"}, "funds.files");
    config.small_file = string_at(files, "small", "funds.files");
    config.mid_file = string_at(files, "mid", "funds.files");
    config.large_file = string_at(files, "large", "funds.files");
    config.rate_files = string_list(require(files, "rates", "funds.files"), "funds.files.rates");
    config.value_basis =
        basis_from_string(string_or(f, "value_basis", "fraction", "funds"), "funds.value_basis");
    config.rate_basis =
        basis_from_string(string_or(f, "rate_basis", "percent", "funds"), "funds.rate_basis");
    config.range = range_from_json(require(f, "range", "funds"), "funds.range");
    return config;
}

OutputOptions output_options_from_json(const Json& root) {
    OutputOptions options;
    if (!root.contains("output")) return options;
    const Json& o = root.at("output");
    require_keys(o, {"dir", "csv", "binary"}, "output");
    options.dir = string_or(o, "dir", options.dir, "output");
    options.csv = bool_or(o, "csv", options.csv, "output");
    options.binary = bool_or(o, "binary", options.binary, "output");
    return options;
}

std::uint64_t seed_from_json(const Json& root) {
    if (!root.contains("seed")) return 0;
    const Json& s = root.at("seed");
    if (!s.is_number_unsigned()) throw ParseError("seed: expected a nonnegative integer");
    return s.get<std::uint64_t>();
}

}  // namespace capmsize
