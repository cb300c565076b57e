/*
 * (C) Copyright 2026 specda authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <string>
#include <vector>

#include "specda/ensemble.hpp"
#include "specda/experiment.hpp"
#include "specda/spectral.hpp"

namespace specda {

/// Truth trajectory: header `cycle,time,u_0,...,u_{N-1}`, one row per
/// observation time.
void write_truth_csv(const std::string& path,
                     const std::vector<StateVector>& truth,
                     double cycle_time);

/// Per-cycle series: `cycle,time,rmse,spread`.
void write_result_csv(const std::string& path, const ExperimentResult& result);

/// Tuning table: `rho,c,sigma,rmse,diverged`.
void write_tuning_csv(const std::string& path,
                      const std::vector<TuningCell>& cells);

/// Diagnostics: `time,component,variance_ratio,offdiag_ratio` (NaN marks
/// undefined ratios).
void write_diagnostics_csv(const std::string& path,
                           const DiagnosticsResult& diagnostics);

/// Half spectrum `wavenumber,power` for w = 0..N/2.
void write_spectrum_csv(const std::string& path,
                        const SpectrumProfile& spectrum);

/// Ensemble snapshot as `member,component,value` triples.
void write_ensemble_csv(const std::string& path, const Ensemble& ensemble);

/// Run manifest (JSON): command, version, seed, config echo, wall time.
void write_manifest(const std::string& path, const std::string& command,
                    const ExperimentConfig& config, std::uint64_t seed,
                    double wall_time_seconds);

}  // namespace specda
