#pragma once

#include <string>

#include "pz/mc.hpp"
#include "pz/synthesis.hpp"

namespace pz {

// Record schemas. Readers reject any other kind or major version with
// FormatError. An infinite ratio_db is stored as JSON null.
inline constexpr const char* kSynthFrameSchema = "pz.synth-frame/1";
inline constexpr const char* kAnalysisResultSchema = "pz.analysis-result/1";
inline constexpr const char* kExperimentConfigSchema = "pz.experiment-config/1";
inline constexpr const char* kModelSchema = "pz.model/1";

std::string synth_frame_json(const SynthFrame& frame);
void write_synth_frame(const std::string& path, const SynthFrame& frame);
SynthFrame read_synth_frame(const std::string& path);

// method and sample_rate are recorded alongside the result; the JSON also
// carries 512 frequency-response samples on [0, fs/2] for plotting.
std::string analysis_result_json(const AnalysisResult& result,
                                 const std::string& method,
                                 double sample_rate);
void write_analysis_result(const std::string& path,
                           const AnalysisResult& result,
                           const std::string& method, double sample_rate);
AnalysisResult read_analysis_result(const std::string& path);

std::string model_json(const PoleZeroModel& model);
void write_model(const std::string& path, const PoleZeroModel& model);

// Accepts a bare model record, a synth-frame record (ground-truth model), or
// an analysis-result record (estimated model).
PoleZeroModel read_model_any(const std::string& path);

std::string experiment_config_json(const ExperimentConfig& config);
void write_experiment_config(const std::string& path,
                             const ExperimentConfig& config);
ExperimentConfig read_experiment_config(const std::string& path);

}  // namespace pz
