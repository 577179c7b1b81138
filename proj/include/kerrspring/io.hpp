#pragma once

#include <iosfwd>
#include <json.hpp>
#include <string>
#include <vector>

#include "kerrspring/core_model.hpp"
#include "kerrspring/estimation.hpp"
#include "kerrspring/interferometer.hpp"

namespace kerrspring {

using Json = nlohmann::json;

// Shortest representation that round-trips through strtod.
std::string format_number(double value);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
};

// '#'-prefixed header lines, then the column row, then data rows.
void write_csv(std::ostream& out, const std::vector<std::string>& header_lines,
               const CsvTable& table);

// Skips '#' lines; the first remaining line is the column row.
CsvTable read_csv(std::istream& in);

// Everything a run needs to know about the physical system.
struct ModelConfig {
  CavityParams cavity;
  KerrMediumParams medium;
  MechanicalParams mechanics;
  MichelsonParams michelson;
};

// Defaults modeled on the bow-tie experiment: F = 100, 1064 nm, 280 mg mirror.
ModelConfig default_model_config();
// The JSON text behind default_model_config (also shipped as data/default_params.json).
const char* default_params_document();

// Overlays a params document on `base` (the defaults unless given). Unknown
// keys and non-numeric values raise a configuration error. Alternative keys
// (finesse, other_loss_ratio, critical_power_W, wavelength_m, quality_factor)
// are resolved against the values already set.
ModelConfig parse_model_config(const Json& doc);
ModelConfig parse_model_config(const Json& doc, const ModelConfig& base);
ModelConfig load_model_config(const std::string& path);
Json to_json(const ModelConfig& config);

// FNV-1a 64 of the compact dump with sorted keys, as 16 hex digits.
std::string config_hash(const Json& resolved_config);

Json to_json(const FitResult& fit);

// Columns xi, k_opt_N_per_m, sigma_k, P0_W, temp_label.
CsvTable spring_datasets_table(const std::vector<SpringDataset>& datasets);
Json spring_datasets_json(const std::vector<SpringDataset>& datasets);

// Reads datasets from CSV or from JSON (a run document or a bare dataset
// list). Rows are grouped by (P0, temperature label) in first-seen order.
std::vector<SpringDataset> read_spring_datasets(const std::string& path);
std::vector<SpringDataset> spring_datasets_from_json(const Json& doc);
std::vector<SpringDataset> spring_datasets_from_csv(const CsvTable& table);

}  // namespace kerrspring
