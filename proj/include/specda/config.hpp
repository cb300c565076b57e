/*
 * (C) Copyright 2026 specda authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <string>
#include <vector>

#include "specda/experiment.hpp"

namespace specda {

/// Parses an experiment configuration from its JSON text. Sections and keys
/// mirror the ExperimentConfig field names; every key is optional and unknown
/// keys are an error (InvalidParameterError).
ExperimentConfig parse_config(const std::string& json_text);

/// Loads and parses a configuration file.
ExperimentConfig load_config(const std::string& path);

/// Serializes a configuration back to JSON (the config echo used in result
/// manifests).
std::string config_to_json(const ExperimentConfig& config);

/// Expands an inclusive "start:stop:step" range (values snapped to the step
/// grid to avoid floating-point drift). A plain number yields a single-value
/// grid. Throws InvalidParameterError on malformed specs or nonpositive steps.
std::vector<double> parse_grid_spec(const std::string& spec);

}  // namespace specda
