#include "kerrspring/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "kerrspring/errors.hpp"

namespace kerrspring {

namespace {

// Default system, in the same schema users write.
constexpr const char* kDefaultParams = R"({
  "cavity": {
    "half_cycle_length_m": 0.47,
    "wavelength_m": 1.064e-6,
    "finesse": 100,
    "other_loss_ratio": 0.17,
    "input_power_W": 0.6
  },
  "medium": {
    "critical_power_W": 1.56,
    "shg_loss_rad_s": 1.5e-7,
    "photothermal_relaxation_rad_s": 188.49555921538757,
    "photothermal_absorption_m_per_N_s": 65.0
  },
  "mechanics": {
    "mass_kg": 2.8e-4,
    "resonance_rad_s": 87.96459430051421,
    "quality_factor": 193
  },
  "michelson": {
    "srm_reflectivity": 0.8944271909999159,
    "arm_length_m": 4000,
    "arm_power_W": 1.0e5,
    "detune_phase_rad": 0.05,
    "kerr_phase_rad": -0.01,
    "mass_kg": 40,
    "wavelength_m": 1.064e-6
  }
})";

Error config_error(const std::string& what) { return Error(ErrorKind::configuration, what); }

// Reads numeric fields of one JSON object and rejects anything unread.
class Section {
 public:
  Section(const Json& doc, std::string name) : name_(std::move(name)) {
    if (doc.contains(name_)) {
      obj_ = &doc.at(name_);
      if (!obj_->is_object()) throw config_error("section '" + name_ + "' must be an object");
    }
  }

  bool present() const { return obj_ != nullptr; }

  std::optional<double> number(const std::string& key) {
    known_.insert(key);
    if (!obj_ || !obj_->contains(key)) return std::nullopt;
    const Json& v = obj_->at(key);
    if (!v.is_number()) throw config_error(name_ + "." + key + " must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw config_error(name_ + "." + key + " must be finite");
    return x;
  }

  const Json* object(const std::string& key) {
    known_.insert(key);
    if (!obj_ || !obj_->contains(key)) return nullptr;
    return &obj_->at(key);
  }

  void finish() const {
    if (!obj_) return;
    for (const auto& [key, value] : obj_->items()) {
      if (!known_.count(key)) throw config_error("unknown key '" + name_ + "." + key + "'");
    }
  }

  const std::string& name() const { return name_; }

 private:
  std::string name_;
  const Json* obj_ = nullptr;
  std::set<std::string> known_;
};

void exclusive(const Section& s, const std::optional<double>& a, const char* ka,
               const std::optional<double>& b, const char* kb) {
  if (a && b) {
    throw config_error(s.name() + ": '" + ka + "' and '" + kb + "' are mutually exclusive");
  }
}

double angular_frequency_for(double wavelength) {
  if (!(wavelength > 0.0)) throw config_error("wavelength_m must be positive");
  return 2.0 * kPi * kSpeedOfLight / wavelength;
}

std::string field(const std::vector<std::string>& row, std::size_t i) {
  return i < row.size() ? row[i] : std::string{};
}

double parse_number(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  while (begin < end && *begin == ' ') ++begin;
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw config_error("cannot parse " + what + " '" + text + "'");
  }
  return v;
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void CsvTable::add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }

void write_csv(std::ostream& out, const std::vector<std::string>& header_lines,
               const CsvTable& table) {
  for (const auto& line : header_lines) out << "# " << line << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    out << (i ? "," : "") << table.columns[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  bool have_columns = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (!have_columns) {
      table.columns = std::move(cells);
      have_columns = true;
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  return table;
}

const char* default_params_document() { return kDefaultParams; }

ModelConfig default_model_config() {
  static const ModelConfig config = [] {
    // Placeholder system that the default document overwrites entirely.
    ModelConfig seed;
    seed.cavity = {1.0, 1.0, 1.0, 0.0, 0.0, 1.0};
    seed.mechanics = {1.0, 0.0, 0.0};
    seed.michelson = {1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0};
    return parse_model_config(Json::parse(kDefaultParams), seed);
  }();
  return config;
}

ModelConfig parse_model_config(const Json& doc) {
  return parse_model_config(doc, default_model_config());
}

ModelConfig parse_model_config(const Json& doc, const ModelConfig& base) {
  if (!doc.is_object()) throw config_error("params document must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "cavity" && key != "medium" && key != "mechanics" && key != "michelson") {
      throw config_error("unknown top-level key '" + key + "'");
    }
  }
  ModelConfig cfg = base;

  // Cavity.
  {
    Section s(doc, "cavity");
    auto& c = cfg.cavity;
    const double old_default_coupling = c.carrier_angular_frequency / c.half_cycle_length;
    const bool coupling_was_default = std::abs(c.optomech_coupling - old_default_coupling) <=
                                      1e-12 * std::abs(old_default_coupling);
    const auto length = s.number("half_cycle_length_m");
    const auto wavelength = s.number("wavelength_m");
    const auto omega0 = s.number("carrier_angular_frequency_rad_s");
    const auto gin = s.number("input_decay_rad_s");
    const auto gout = s.number("other_loss_decay_rad_s");
    const auto fin = s.number("finesse");
    const auto ratio = s.number("other_loss_ratio");
    const auto power = s.number("input_power_W");
    const auto coupling = s.number("optomech_coupling_rad_s_m");
    s.finish();
    exclusive(s, wavelength, "wavelength_m", omega0, "carrier_angular_frequency_rad_s");
    exclusive(s, fin, "finesse", gin, "input_decay_rad_s");
    exclusive(s, ratio, "other_loss_ratio", gout, "other_loss_decay_rad_s");
    if (length) c.half_cycle_length = *length;
    if (wavelength) c.carrier_angular_frequency = angular_frequency_for(*wavelength);
    if (omega0) c.carrier_angular_frequency = *omega0;
    if (power) c.input_power = *power;
    const double current_ratio = c.other_loss_decay / c.input_decay;
    if (fin) {
      const double r = ratio ? *ratio : current_ratio;
      const double total = decay_for_finesse(c.half_cycle_length, *fin);
      c.input_decay = total / (1.0 + r);
      c.other_loss_decay = total - c.input_decay;
    } else {
      if (gin) c.input_decay = *gin;
      if (gout) c.other_loss_decay = *gout;
      if (ratio) c.other_loss_decay = *ratio * c.input_decay;
    }
    if (coupling) {
      c.optomech_coupling = *coupling;
    } else if (coupling_was_default) {
      c.optomech_coupling = standard_coupling(c.half_cycle_length, c.carrier_angular_frequency);
    }
    try {
      validate(c);
    } catch (const Error& e) {
      throw config_error(std::string("cavity: ") + e.what());
    }
  }

  // Medium.
  {
    Section s(doc, "medium");
    auto& m = cfg.medium;
    const auto chi = s.number("kerr_susceptibility_rad_s");
    const auto pcrit = s.number("critical_power_W");
    const auto beta = s.number("shg_loss_rad_s");
    const auto gth = s.number("photothermal_relaxation_rad_s");
    const auto d = s.number("photothermal_absorption_m_per_N_s");
    const Json* micro = s.object("micro");
    s.finish();
    exclusive(s, chi, "kerr_susceptibility_rad_s", pcrit, "critical_power_W");
    if (chi) m.kerr_susceptibility = *chi;
    if (pcrit) {
      if (!(*pcrit > 0.0)) throw config_error("medium.critical_power_W must be positive");
      const double g = cfg.cavity.linear_decay();
      m.kerr_susceptibility = kCriticalKerrGain * g * g * kHbar *
                              cfg.cavity.carrier_angular_frequency / (-2.0 * *pcrit);
    }
    if (beta) m.shg_loss = *beta;
    if (micro) {
      if (gth || d) {
        throw config_error("medium: give either micro parameters or photothermal rates");
      }
      Json wrapper = {{"micro", *micro}};
      Section ms(wrapper, "micro");
      PhotothermalMicroParams p;
      const auto k = ms.number("thermal_resistance_K_per_W");
      const auto cap = ms.number("heat_capacity_J_per_K");
      const auto alpha = ms.number("expansion_per_K");
      const auto absorb = ms.number("absorption_per_m");
      const auto len = ms.number("crystal_length_m");
      ms.finish();
      if (!k || !cap || !alpha || !absorb || !len) {
        throw config_error("medium.micro needs all five material constants");
      }
      p = {*k, *cap, *alpha, *absorb, *len};
      m = KerrMediumParams::from_micro(m.kerr_susceptibility, m.shg_loss, p);
    } else {
      if (gth || d) m.micro.reset();
      if (gth) m.photothermal_relaxation = *gth;
      if (d) m.photothermal_absorption = *d;
    }
    try {
      validate(m);
    } catch (const Error& e) {
      throw config_error(std::string("medium: ") + e.what());
    }
  }

  // Mechanics.
  {
    Section s(doc, "mechanics");
    auto& m = cfg.mechanics;
    const auto mass = s.number("mass_kg");
    const auto res = s.number("resonance_rad_s");
    const auto damping = s.number("damping_rad_s");
    const auto q = s.number("quality_factor");
    s.finish();
    exclusive(s, damping, "damping_rad_s", q, "quality_factor");
    const double old_q = m.damping > 0.0 ? m.quality_factor() : 0.0;
    if (mass) m.mass = *mass;
    if (res) m.resonance = *res;
    if (damping) m.damping = *damping;
    if (q) {
      if (!(*q > 0.0)) throw config_error("mechanics.quality_factor must be positive");
      m.damping = m.resonance / *q;
    } else if (res && !damping && old_q > 0.0) {
      m.damping = m.resonance / old_q;
    }
    try {
      validate(m);
    } catch (const Error& e) {
      throw config_error(std::string("mechanics: ") + e.what());
    }
  }

  // Michelson.
  {
    Section s(doc, "michelson");
    auto& m = cfg.michelson;
    const auto rs = s.number("srm_reflectivity");
    const auto length = s.number("arm_length_m");
    const auto power = s.number("arm_power_W");
    const auto phi = s.number("detune_phase_rad");
    const auto kphase = s.number("kerr_phase_rad");
    const auto chi = s.number("kerr_susceptibility_rad_s");
    const auto mass = s.number("mass_kg");
    const auto wavelength = s.number("wavelength_m");
    const auto omega0 = s.number("carrier_angular_frequency_rad_s");
    s.finish();
    exclusive(s, kphase, "kerr_phase_rad", chi, "kerr_susceptibility_rad_s");
    exclusive(s, wavelength, "wavelength_m", omega0, "carrier_angular_frequency_rad_s");
    if (rs) {
      if (!(*rs > 0.0) || *rs > 1.0) throw config_error("michelson.srm_reflectivity in (0, 1]");
      m.srm_reflectivity = *rs;
      m.srm_transmissivity = std::sqrt(std::max(0.0, 1.0 - *rs * *rs));
    }
    if (length) m.arm_length = *length;
    if (power) m.arm_power = *power;
    if (phi) m.detune_phase = *phi;
    if (mass) m.mass = *mass;
    if (wavelength) m.carrier_angular_frequency = angular_frequency_for(*wavelength);
    if (omega0) m.carrier_angular_frequency = *omega0;
    if (kphase) m.kerr_phase = *kphase;
    if (chi) {
      m.kerr_phase = kerr_phase_from_susceptibility(*chi, m.arm_length, m.arm_power,
                                                    m.carrier_angular_frequency);
    }
    try {
      validate(m);
    } catch (const Error& e) {
      throw config_error(std::string("michelson: ") + e.what());
    }
  }
  return cfg;
}

ModelConfig load_model_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open params file '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::exception& e) {
    throw config_error("params file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_model_config(doc);
}

Json to_json(const ModelConfig& cfg) {
  const auto& c = cfg.cavity;
  const auto& m = cfg.medium;
  const auto& k = cfg.mechanics;
  const auto& g = cfg.michelson;
  Json medium = {{"kerr_susceptibility_rad_s", m.kerr_susceptibility},
                 {"shg_loss_rad_s", m.shg_loss}};
  if (m.micro) {
    medium["micro"] = {{"thermal_resistance_K_per_W", m.micro->thermal_resistance},
                       {"heat_capacity_J_per_K", m.micro->heat_capacity},
                       {"expansion_per_K", m.micro->expansion},
                       {"absorption_per_m", m.micro->absorption},
                       {"crystal_length_m", m.micro->crystal_length}};
  } else {
    medium["photothermal_relaxation_rad_s"] = m.photothermal_relaxation;
    medium["photothermal_absorption_m_per_N_s"] = m.photothermal_absorption;
  }
  return {
      {"cavity",
       {{"half_cycle_length_m", c.half_cycle_length},
        {"carrier_angular_frequency_rad_s", c.carrier_angular_frequency},
        {"input_decay_rad_s", c.input_decay},
        {"other_loss_decay_rad_s", c.other_loss_decay},
        {"input_power_W", c.input_power},
        {"optomech_coupling_rad_s_m", c.optomech_coupling}}},
      {"medium", medium},
      {"mechanics",
       {{"mass_kg", k.mass}, {"resonance_rad_s", k.resonance}, {"damping_rad_s", k.damping}}},
      {"michelson",
       {{"srm_reflectivity", g.srm_reflectivity},
        {"arm_length_m", g.arm_length},
        {"arm_power_W", g.arm_power},
        {"detune_phase_rad", g.detune_phase},
        {"kerr_phase_rad", g.kerr_phase},
        {"mass_kg", g.mass},
        {"carrier_angular_frequency_rad_s", g.carrier_angular_frequency}}},
  };
}

std::string config_hash(const Json& resolved_config) {
  const std::string text = resolved_config.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json to_json(const FitResult& fit) {
  auto num = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
  Json j = {{"zeta", num(fit.zeta)},
            {"zeta_err", num(fit.zeta_err)},
            {"k_opt_0", num(fit.k_opt_0)},
            {"k_opt_0_err", num(fit.k_opt_0_err)},
            {"A", num(fit.amplification)},
            {"A_err", num(fit.amplification_err)},
            {"chi2red", num(fit.chi_squared_reduced)},
            {"covariance",
             {{num(fit.covariance[0][0]), num(fit.covariance[0][1])},
              {num(fit.covariance[1][0]), num(fit.covariance[1][1])}}},
            {"unphysical_regime", fit.unphysical_regime},
            {"low_detuning_points", fit.low_detuning_points},
            {"P0_W", fit.input_power},
            {"temp_label", fit.temperature_label}};
  if (fit.bootstrap_zeta_err) j["bootstrap_zeta_err"] = *fit.bootstrap_zeta_err;
  if (fit.bootstrap_k_opt_0_err) j["bootstrap_k_opt_0_err"] = *fit.bootstrap_k_opt_0_err;
  return j;
}

CsvTable spring_datasets_table(const std::vector<SpringDataset>& datasets) {
  CsvTable t;
  t.columns = {"xi", "k_opt_N_per_m", "sigma_k", "P0_W", "temp_label"};
  for (const auto& d : datasets) {
    for (const auto& p : d.points) {
      t.add_row({format_number(p.xi), format_number(p.k_opt), format_number(p.sigma_k),
                 format_number(d.input_power), d.temperature_label});
    }
  }
  return t;
}

Json spring_datasets_json(const std::vector<SpringDataset>& datasets) {
  Json out = Json::array();
  for (const auto& d : datasets) {
    Json points = Json::array();
    for (const auto& p : d.points) {
      points.push_back({{"xi", p.xi}, {"k_opt_N_per_m", p.k_opt}, {"sigma_k", p.sigma_k}});
    }
    out.push_back({{"P0_W", d.input_power}, {"temp_label", d.temperature_label},
                   {"points", points}});
  }
  return out;
}

std::vector<SpringDataset> spring_datasets_from_json(const Json& doc) {
  const Json* list = &doc;
  if (doc.is_object()) {
    if (doc.contains("data") && doc["data"].is_object() && doc["data"].contains("datasets")) {
      list = &doc["data"]["datasets"];
    } else if (doc.contains("datasets")) {
      list = &doc["datasets"];
    } else {
      throw config_error("JSON input has no 'datasets' list");
    }
  }
  if (!list->is_array()) throw config_error("'datasets' must be an array");
  std::vector<SpringDataset> out;
  try {
    for (const auto& d : *list) {
      SpringDataset ds;
      ds.input_power = d.at("P0_W").get<double>();
      ds.temperature_label = d.at("temp_label").get<std::string>();
      for (const auto& p : d.at("points")) {
        ds.points.push_back({p.at("xi").get<double>(), p.at("k_opt_N_per_m").get<double>(),
                             p.at("sigma_k").get<double>()});
      }
      out.push_back(std::move(ds));
    }
  } catch (const Json::exception& e) {
    throw config_error(std::string("malformed dataset JSON: ") + e.what());
  }
  return out;
}

std::vector<SpringDataset> spring_datasets_from_csv(const CsvTable& table) {
  const std::vector<std::string> expected = {"xi", "k_opt_N_per_m", "sigma_k", "P0_W",
                                             "temp_label"};
  if (table.columns != expected) {
    throw config_error("dataset CSV must have columns xi,k_opt_N_per_m,sigma_k,P0_W,temp_label");
  }
  std::vector<SpringDataset> out;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (const auto& row : table.rows) {
    const auto key = std::make_pair(field(row, 3), field(row, 4));
    auto it = index.find(key);
    if (it == index.end()) {
      SpringDataset ds;
      ds.input_power = parse_number(field(row, 3), "P0_W");
      ds.temperature_label = field(row, 4);
      out.push_back(std::move(ds));
      it = index.emplace(key, out.size() - 1).first;
    }
    out[it->second].points.push_back({parse_number(field(row, 0), "xi"),
                                      parse_number(field(row, 1), "k_opt_N_per_m"),
                                      parse_number(field(row, 2), "sigma_k")});
  }
  return out;
}

std::vector<SpringDataset> read_spring_datasets(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open dataset '" + path + "'");
  const int first = [&] {
    int ch;
    while ((ch = in.peek()) != EOF && std::isspace(ch)) in.get();
    return ch;
  }();
  if (first == '{' || first == '[') {
    try {
      return spring_datasets_from_json(Json::parse(in));
    } catch (const Json::parse_error& e) {
      throw config_error("dataset '" + path + "' is not valid JSON: " + e.what());
    }
  }
  return spring_datasets_from_csv(read_csv(in));
}

}  // namespace kerrspring
