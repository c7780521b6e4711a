#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "model.hpp"

namespace probitar {

// Long-format panel record. A missing value is an empty CSV field.
struct RawRecord {
  std::string path_id;
  std::int64_t time = 0;
  std::string series;
  std::optional<double> value;
};

struct RawPanel {
  std::vector<RawRecord> records;

  // Canonical order: (path_id, time, series); duplicate keys are invalid.
  void sort_canonical();
  std::vector<std::string> series_names() const;  // sorted unique
  std::vector<std::string> path_ids() const;      // sorted unique
};

// CSV schema: header "path_id,time,series,value"; value empty = missing.
// Malformed rows and duplicate (path_id,time,series) keys raise
// std::invalid_argument naming the offending row.
RawPanel load_csv(const std::string& path);
void save_csv(const RawPanel& panel, const std::string& path);

struct BinarizeSpec {
  double quantile = 1.0 / 3.0;                  // default: first tercile
  std::map<std::string, double> per_series;     // optional overrides
};

// Per series, pooled (time and paths) type-7 empirical q-quantile threshold;
// value <= threshold -> 0, else 1. Missings pass through. Needs >= 3
// non-missing values per series.
RawPanel binarize(const RawPanel& panel, const BinarizeSpec& spec);

// Fills missing cells of a binary panel with iid Bernoulli(p_s) draws,
// p_s = pooled observed proportion of ones for that series. The mask holds
// value 1 at every imputed cell. Deterministic given seed.
struct ImputeResult {
  RawPanel panel;
  RawPanel mask;
};
ImputeResult impute(const RawPanel& panel, std::uint64_t seed);

// Builds PanelData from a complete binary+covariate panel. Response series
// must be binary. Paths are aligned on their common contiguous time window
// (truncation is reported through `truncated`). X_t is stored at time t and
// consumed at t+1 by the likelihoods.
struct AssembleResult {
  PanelData panel;
  std::vector<std::string> path_ids;
  bool truncated = false;
};
AssembleResult assemble(const RawPanel& panel,
                        const std::vector<std::string>& responses,
                        const std::vector<std::string>& covariates);

// PanelData round-trip through the same long CSV schema with canonical
// series names y1..yk / x1..xd and 0-based integer path ids and times.
void save_panel_csv(const PanelData& panel, const std::string& path);
PanelData load_panel_csv(const std::string& path);

// Self-describing binary trace (exact round-trips): little-endian header
// magic "PAR1", then uint32 k, d, p, T, n; per path Y (T*k uint8 row-major)
// and X (T*d float64 row-major).
void save_trace(const PanelData& panel, int lag_order, const std::string& path);
PanelData load_trace(const std::string& path, int* lag_order = nullptr);

}  // namespace probitar
