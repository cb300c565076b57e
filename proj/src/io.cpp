/*
 * (C) Copyright 2026 specda authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "specda/io.hpp"

#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "specda/config.hpp"
#include "specda/errors.hpp"
#include "specda/version.hpp"

namespace specda {

namespace {

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.12g", value);
  return buffer;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream stream(path);
  if (!stream) {
    throw Error("cannot open output file '" + path + "'");
  }
  return stream;
}

}  // namespace

void write_truth_csv(const std::string& path,
                     const std::vector<StateVector>& truth,
                     double cycle_time) {
  std::ofstream out = open_output(path);
  const Eigen::Index n = truth.empty() ? 0 : truth.front().size();
  out << "cycle,time";
  for (Eigen::Index i = 0; i < n; ++i) out << ",u_" << i;
  out << "\n";
  for (std::size_t j = 0; j < truth.size(); ++j) {
    const auto cycle = static_cast<double>(j + 1);
    out << (j + 1) << "," << format_double(cycle * cycle_time);
    for (Eigen::Index i = 0; i < n; ++i) {
      out << "," << format_double(truth[j][i]);
    }
    out << "\n";
  }
}

void write_result_csv(const std::string& path, const ExperimentResult& result) {
  std::ofstream out = open_output(path);
  const double cycle_time = result.config.cycle_time();
  out << "cycle,time,rmse,spread\n";
  for (std::size_t j = 0; j < result.rmse_series.size(); ++j) {
    out << (j + 1) << ","
        << format_double(static_cast<double>(j + 1) * cycle_time) << ","
        << format_double(result.rmse_series[j]) << ","
        << format_double(result.spread_series[j]) << "\n";
  }
}

void write_tuning_csv(const std::string& path,
                      const std::vector<TuningCell>& cells) {
  std::ofstream out = open_output(path);
  out << "rho,c,sigma,rmse,diverged\n";
  for (const TuningCell& cell : cells) {
    out << format_double(cell.rho) << "," << format_double(cell.c) << ","
        << format_double(cell.sigma) << "," << format_double(cell.rmse) << ","
        << (cell.diverged ? 1 : 0) << "\n";
  }
}

void write_diagnostics_csv(const std::string& path,
                           const DiagnosticsResult& diagnostics) {
  std::ofstream out = open_output(path);
  out << "time,component,variance_ratio,offdiag_ratio\n";
  for (std::size_t s = 0; s < diagnostics.snapshot_times.size(); ++s) {
    const Eigen::VectorXd& variance = diagnostics.variance_ratio[s];
    const Eigen::VectorXd& offdiag = diagnostics.offdiag_ratio[s];
    for (Eigen::Index i = 0; i < variance.size(); ++i) {
      out << format_double(diagnostics.snapshot_times[s]) << "," << i << ","
          << format_double(variance[i]) << "," << format_double(offdiag[i])
          << "\n";
    }
  }
}

void write_spectrum_csv(const std::string& path,
                        const SpectrumProfile& spectrum) {
  std::ofstream out = open_output(path);
  out << "wavenumber,power\n";
  for (int w = 0; w <= spectrum.size() / 2; ++w) {
    out << w << "," << format_double(spectrum.power[w]) << "\n";
  }
}

void write_ensemble_csv(const std::string& path, const Ensemble& ensemble) {
  std::ofstream out = open_output(path);
  out << "member,component,value\n";
  for (int k = 0; k < ensemble.size(); ++k) {
    for (int i = 0; i < ensemble.dimension(); ++i) {
      out << k << "," << i << "," << format_double(ensemble.members()(i, k))
          << "\n";
    }
  }
}

void write_manifest(const std::string& path, const std::string& command,
                    const ExperimentConfig& config, std::uint64_t seed,
                    double wall_time_seconds) {
  nlohmann::json manifest;
  manifest["command"] = command;
  manifest["version"] = kVersion;
  manifest["seed"] = seed;
  manifest["config"] = nlohmann::json::parse(config_to_json(config));
  manifest["wall_time_seconds"] = wall_time_seconds;
  std::ofstream out = open_output(path);
  out << manifest.dump(2) << "\n";
}

}  // namespace specda
