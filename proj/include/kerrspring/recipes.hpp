#pragma once

#include <string>
#include <vector>

#include "kerrspring/estimation.hpp"
#include "kerrspring/io.hpp"

namespace kerrspring {

struct RecipeCheck {
  std::string name;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;  // passes when |value - expected| <= tolerance
  bool passed = false;
  std::string detail;
};

struct RecipeFile {
  std::string name;
  std::string content;
};

struct RecipeResult {
  std::string recipe;
  std::string figure;  // what the recipe models
  std::vector<RecipeFile> files;
  std::vector<RecipeCheck> checks;

  bool passed() const;
  Json manifest() const;
};

std::vector<std::string> recipe_names();

// Throws configuration for unknown names.
RecipeResult run_recipe(const std::string& name, unsigned jobs = 1);

// Synthetic spring-constant series used by fig3/fig4 and shipped in data/:
// two crystal temperatures with critical powers 1.56 W and 2.65 W, measured
// at 150, 300, 450 and 600 mW with 3 % noise.
struct SpringSeriesSpec {
  std::string temperature_label;
  double critical_power = 0.0;  // [W]
};
std::vector<SpringSeriesSpec> packaged_series();
std::vector<SpringDataset> packaged_spring_datasets();

// k_opt_0 at 600 mW: the linear spring that puts the composite resonance of
// the 280 mg, 14 Hz oscillator at 53 Hz.
double reference_linear_spring();

}  // namespace kerrspring
