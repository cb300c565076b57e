/*
 * (C) Copyright 2026 specda authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "specda/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "specda/errors.hpp"

namespace specda {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& object, const std::set<std::string>& known,
                         const std::string& section) {
  for (const auto& item : object.items()) {
    if (known.find(item.key()) == known.end()) {
      throw InvalidParameterError("unknown config key '" + section +
                                  item.key() + "'");
    }
  }
}

template <typename T>
void read(const json& object, const char* key, T& value) {
  if (object.contains(key)) {
    object.at(key).get_to(value);
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidParameterError(std::string("config is not valid JSON: ") +
                                e.what());
  }
  if (!root.is_object()) {
    throw InvalidParameterError("config root must be a JSON object");
  }
  reject_unknown_keys(root, {"model", "observation", "filter", "run"}, "");

  ExperimentConfig config;
  try {
    if (root.contains("model")) {
      const json& model = root.at("model");
      reject_unknown_keys(
          model, {"N", "F", "dt", "spinup_duration", "spinup_perturbation"},
          "model.");
      read(model, "N", config.model.dimension);
      read(model, "F", config.model.forcing);
      read(model, "dt", config.model.dt);
      read(model, "spinup_duration", config.model.spinup_duration);
      read(model, "spinup_perturbation", config.model.spinup_perturbation);
    }
    if (root.contains("observation")) {
      const json& observation = root.at("observation");
      reject_unknown_keys(
          observation, {"steps_per_cycle", "resolution_stride", "noise_std"},
          "observation.");
      read(observation, "steps_per_cycle", config.observation.steps_per_cycle);
      read(observation, "resolution_stride",
           config.observation.resolution_stride);
      read(observation, "noise_std", config.observation.noise_std);
    }
    if (root.contains("filter")) {
      const json& filter = root.at("filter");
      reject_unknown_keys(filter, {"K", "rho", "c", "sigma", "mode"},
                          "filter.");
      read(filter, "K", config.filter.ensemble_size);
      read(filter, "rho", config.filter.rho);
      read(filter, "c", config.filter.c);
      read(filter, "sigma", config.filter.sigma);
      if (filter.contains("mode")) {
        config.filter.mode =
            smoothing_mode_from_string(filter.at("mode").get<std::string>());
      }
    }
    if (root.contains("run")) {
      const json& run = root.at("run");
      reject_unknown_keys(run, {"n_cycles", "rmse_window", "seed"}, "run.");
      read(run, "n_cycles", config.run.n_cycles);
      read(run, "rmse_window", config.run.rmse_window);
      read(run, "seed", config.run.seed);
    }
  } catch (const json::exception& e) {
    throw InvalidParameterError(std::string("bad config value: ") + e.what());
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream stream(path);
  if (!stream) {
    throw InvalidParameterError("cannot open config file '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << stream.rdbuf();
  return parse_config(buffer.str());
}

std::string config_to_json(const ExperimentConfig& config) {
  json root;
  root["model"] = {{"N", config.model.dimension},
                   {"F", config.model.forcing},
                   {"dt", config.model.dt},
                   {"spinup_duration", config.model.spinup_duration},
                   {"spinup_perturbation", config.model.spinup_perturbation}};
  root["observation"] = {
      {"steps_per_cycle", config.observation.steps_per_cycle},
      {"resolution_stride", config.observation.resolution_stride},
      {"noise_std", config.observation.noise_std}};
  root["filter"] = {{"K", config.filter.ensemble_size},
                    {"rho", config.filter.rho},
                    {"c", config.filter.c},
                    {"sigma", config.filter.sigma},
                    {"mode", to_string(config.filter.mode)}};
  root["run"] = {{"n_cycles", config.run.n_cycles},
                 {"rmse_window", config.run.rmse_window},
                 {"seed", config.run.seed}};
  return root.dump(2);
}

std::vector<double> parse_grid_spec(const std::string& spec) {
  const auto first = spec.find(':');
  if (first == std::string::npos) {
    try {
      std::size_t consumed = 0;
      const double value = std::stod(spec, &consumed);
      if (consumed != spec.size()) throw std::invalid_argument(spec);
      return {value};
    } catch (const std::exception&) {
      throw InvalidParameterError("bad grid value '" + spec + "'");
    }
  }
  const auto second = spec.find(':', first + 1);
  if (second == std::string::npos || spec.find(':', second + 1) != std::string::npos) {
    throw InvalidParameterError("grid spec must be start:stop:step, got '" +
                                spec + "'");
  }
  double start = 0.0, stop = 0.0, step = 0.0;
  try {
    start = std::stod(spec.substr(0, first));
    stop = std::stod(spec.substr(first + 1, second - first - 1));
    step = std::stod(spec.substr(second + 1));
  } catch (const std::exception&) {
    throw InvalidParameterError("bad grid spec '" + spec + "'");
  }
  if (!(step > 0.0)) {
    throw InvalidParameterError("grid step must be positive in '" + spec + "'");
  }
  if (stop < start) {
    throw InvalidParameterError("grid stop must be >= start in '" + spec + "'");
  }
  // Values are generated as start + i * step (never accumulated) so long
  // floating grids do not drift off the intended lattice.
  const long count = std::lround((stop - start) / step);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(count + 1));
  for (long i = 0; i <= count; ++i) {
    const double value = start + static_cast<double>(i) * step;
    if (value > stop + 0.5 * step) break;
    values.push_back(value);
  }
  return values;
}

}  // namespace specda
