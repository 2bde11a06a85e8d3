#pragma once

#include <iosfwd>
#include <filesystem>

#include "gazekit/pipeline.hpp"

namespace gazekit {

// Versioned `key = value` config file (TOML-like subset: flat keys, `#`
// comments, optional double quotes around strings). Unknown keys are
// rejected; `version = 1` is required.
PipelineConfig parse_pipeline_config(std::istream& in);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

// Canonical serialization of the effective configuration.
void write_pipeline_config(std::ostream& out, const PipelineConfig& cfg);

}  // namespace gazekit
