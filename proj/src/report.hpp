#pragma once

#include <string>
#include <vector>

#include "estimate.hpp"

namespace probitar {

// JSON schemas used by the CLI and the C API. Keys are emitted in a fixed
// order and floats with round-trip precision, so identical inputs produce
// byte-identical documents.

std::string params_to_json(const ModelParams& params);
ModelParams params_from_json(const std::string& text);

std::string fit_to_json(const EstimationResult& fit);
EstimationResult fit_from_json(const std::string& text);

// Aligned human-readable tables (row order A, B, C, R).
std::string format_fit_table(const EstimationResult& fit);
std::string format_replication_table(const std::vector<ReplicationRow>& rows);
std::string format_interval_table(const EstimationResult& fit);

}  // namespace probitar
