#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "kerrspring/errors.hpp"
#include "kerrspring/io.hpp"
#include "kerrspring/recipes.hpp"

using namespace kerrspring;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ErrorKind kind_of(const Json& doc) {
  try {
    parse_model_config(doc);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::domain;
}

// FNV-1a 64 written out directly.
std::string fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

TEST_CASE("numbers round-trip through text") {
  for (double v : {0.1, -1.5396, 1e-300, 6.02214076e23, 1.0 / 3.0}) {
    CHECK(std::stod(format_number(v)) == v);
  }
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(format_number(-HUGE_VAL) == "-inf");
}

TEST_CASE("CSV round trip skips header lines") {
  CsvTable t;
  t.columns = {"a", "b"};
  t.add_row({"1", "x"});
  t.add_row({"2.5", ""});
  std::stringstream ss;
  write_csv(ss, {"first", "second"}, t);
  CHECK(ss.str().rfind("# first\n# second\na,b\n", 0) == 0);
  const CsvTable back = read_csv(ss);
  CHECK(back.columns == t.columns);
  CHECK(back.rows == t.rows);
}

TEST_CASE("shipped default params match the built-in document") {
  CHECK(slurp(std::string(KERRSPRING_DATA_DIR) + "/default_params.json") ==
        std::string(default_params_document()) + "\n");
}

TEST_CASE("default configuration") {
  const auto cfg = default_model_config();
  CHECK(finesse(cfg.cavity.half_cycle_length, cfg.cavity.linear_decay()) == doctest::Approx(100.0));
  CHECK(cfg.cavity.other_loss_decay / cfg.cavity.input_decay == doctest::Approx(0.17));
  CHECK(critical_power(cfg.medium.kerr_susceptibility, cfg.cavity.linear_decay(),
                       cfg.cavity.carrier_angular_frequency) == doctest::Approx(1.56));
  CHECK(cfg.mechanics.quality_factor() == doctest::Approx(193.0));
  CHECK(cfg.cavity.optomech_coupling ==
        doctest::Approx(cfg.cavity.carrier_angular_frequency / cfg.cavity.half_cycle_length));
  CHECK(cfg.michelson.srm_reflectivity * cfg.michelson.srm_reflectivity +
            cfg.michelson.srm_transmissivity * cfg.michelson.srm_transmissivity ==
        doctest::Approx(1.0));
}

TEST_CASE("strict schema") {
  CHECK(kind_of(Json::parse(R"({"cavity": {"lenght_m": 1}})")) == ErrorKind::configuration);
  CHECK(kind_of(Json::parse(R"({"extra": {}})")) == ErrorKind::configuration);
  CHECK(kind_of(Json::parse(R"({"cavity": {"input_power_W": "0.6"}})")) == ErrorKind::configuration);
  CHECK(kind_of(Json::parse(R"({"cavity": {"finesse": 100, "input_decay_rad_s": 1e6}})")) ==
        ErrorKind::configuration);
  CHECK(kind_of(Json::parse(R"({"cavity": {"input_decay_rad_s": -5}})")) ==
        ErrorKind::configuration);
}

TEST_CASE("alternative keys resolve against current values") {
  const auto cfg = parse_model_config(Json::parse(R"({"cavity": {"finesse": 300, "other_loss_ratio": 0}})"));
  CHECK(finesse(cfg.cavity.half_cycle_length, cfg.cavity.input_decay) == doctest::Approx(300.0));
  CHECK(cfg.cavity.other_loss_decay == 0.0);
  const auto micro = parse_model_config(Json::parse(R"({"medium": {"micro": {
      "thermal_resistance_K_per_W": 2, "heat_capacity_J_per_K": 0.5, "expansion_per_K": 1e-5,
      "absorption_per_m": 0.1, "crystal_length_m": 0.01}}})"));
  CHECK(micro.medium.photothermal_relaxation == doctest::Approx(1.0));
  REQUIRE(micro.medium.micro);
}

TEST_CASE("resolved config round-trips and hashes stably") {
  const auto cfg = default_model_config();
  const Json j = to_json(cfg);
  const auto back = parse_model_config(j);
  CHECK(back.cavity.input_decay == cfg.cavity.input_decay);
  CHECK(back.cavity.other_loss_decay == cfg.cavity.other_loss_decay);
  CHECK(back.medium.kerr_susceptibility == cfg.medium.kerr_susceptibility);
  CHECK(back.mechanics.damping == cfg.mechanics.damping);
  CHECK(back.michelson.srm_transmissivity == cfg.michelson.srm_transmissivity);
  CHECK(to_json(back) == j);
  CHECK(config_hash(j) == fnv1a(j.dump()));
  CHECK(config_hash(Json::parse(R"({"a":1})")) == "9c3e82dd6fcae8b1");
  // Key order in the source text does not matter.
  CHECK(config_hash(Json::parse(R"({"b":2,"a":1})")) == config_hash(Json::parse(R"({"a":1,"b":2})")));
}

TEST_CASE("spring datasets survive CSV and JSON") {
  const auto datasets = packaged_spring_datasets();
  std::stringstream csv;
  write_csv(csv, {"test"}, spring_datasets_table(datasets));
  const auto from_csv = spring_datasets_from_csv(read_csv(csv));
  const auto from_json =
      spring_datasets_from_json(Json::parse(spring_datasets_json(datasets).dump()));
  for (const auto* parsed : {&from_csv, &from_json}) {
    REQUIRE(parsed->size() == datasets.size());
    for (std::size_t d = 0; d < datasets.size(); ++d) {
      CHECK((*parsed)[d].temperature_label == datasets[d].temperature_label);
      CHECK((*parsed)[d].input_power == datasets[d].input_power);
      REQUIRE((*parsed)[d].points.size() == datasets[d].points.size());
      for (std::size_t i = 0; i < datasets[d].points.size(); ++i) {
        CHECK((*parsed)[d].points[i].k_opt == datasets[d].points[i].k_opt);
        CHECK((*parsed)[d].points[i].sigma_k == datasets[d].points[i].sigma_k);
      }
    }
  }
}

TEST_CASE("shipped spring datasets are the packaged ones") {
  const auto shipped = read_spring_datasets(std::string(KERRSPRING_DATA_DIR) + "/spring_datasets.csv");
  const auto packaged = packaged_spring_datasets();
  REQUIRE(shipped.size() == packaged.size());
  for (std::size_t d = 0; d < packaged.size(); ++d) {
    REQUIRE(shipped[d].points.size() == packaged[d].points.size());
    for (std::size_t i = 0; i < packaged[d].points.size(); ++i) {
      CHECK(shipped[d].points[i].k_opt == packaged[d].points[i].k_opt);
    }
  }
}

TEST_CASE("fit results serialize NaN as null") {
  FitResult f;
  f.amplification = std::nan("");
  f.unphysical_regime = true;
  const Json j = to_json(f);
  CHECK(j["A"].is_null());
  CHECK(j["unphysical_regime"] == true);
}
