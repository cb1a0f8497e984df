#include "ferrosyn/model_card.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <cstdio>

#include "ferrosyn/error.hpp"
#include "ferrosyn/trace_csv.hpp"

namespace ferrosyn::io {

using nlohmann::json;

namespace {

void require_object(const json& j, std::string_view where, std::initializer_list<std::string_view> required,
                    std::initializer_list<std::string_view> optional = {}) {
  if (!j.is_object()) throw Error(ErrorCode::SchemaMismatch, std::string(where) + ": expected an object");
  for (auto key : required) {
    if (!j.contains(std::string(key))) {
      throw Error(ErrorCode::SchemaMismatch, std::string(where) + ": missing key '" + std::string(key) + "'");
    }
  }
  for (const auto& item : j.items()) {
    const bool known = std::find(required.begin(), required.end(), item.key()) != required.end() ||
                       std::find(optional.begin(), optional.end(), item.key()) != optional.end();
    if (!known) throw Error(ErrorCode::SchemaMismatch, std::string(where) + ": unknown key '" + item.key() + "'");
  }
}

double number(const json& j, std::string_view where, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number()) {
    throw Error(ErrorCode::SchemaMismatch, std::string(where) + "." + key + ": expected a number");
  }
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw Error(ErrorCode::NonFinite, std::string(where) + "." + key + " is not finite");
  return x;
}

json envelope_json(const device::EnvelopeParams& e) {
  return {{"r_min", e.r_min}, {"r_max", e.r_max}, {"v0", e.v0}, {"v_off", e.v_off}};
}

device::EnvelopeParams envelope_from(const json& j, std::string_view where) {
  require_object(j, where, {"r_min", "r_max", "v0", "v_off"});
  return {number(j, where, "r_min"), number(j, where, "r_max"), number(j, where, "v0"), number(j, where, "v_off")};
}

json vdsp_json(const vdsp::VdspParams& p) {
  return {{"alpha_p", p.alpha_p}, {"alpha_d", p.alpha_d}, {"theta_p", p.theta_p},
          {"theta_d", p.theta_d}, {"gamma_p", p.gamma_p}, {"gamma_d", p.gamma_d}};
}

vdsp::VdspParams vdsp_from(const json& j, std::string_view where) {
  require_object(j, where, {"alpha_p", "alpha_d", "theta_p", "theta_d", "gamma_p", "gamma_d"});
  vdsp::VdspParams p;
  p.alpha_p = number(j, where, "alpha_p");
  p.alpha_d = number(j, where, "alpha_d");
  p.theta_p = number(j, where, "theta_p");
  p.theta_d = number(j, where, "theta_d");
  p.gamma_p = number(j, where, "gamma_p");
  p.gamma_d = number(j, where, "gamma_d");
  return p;
}

json scaling_json(const vdsp::ScalingFactors& s) { return {{"sf_p", s.sf_p}, {"sf_d", s.sf_d}}; }

vdsp::ScalingFactors scaling_from(const json& j, std::string_view where) {
  require_object(j, where, {"sf_p", "sf_d"});
  return {number(j, where, "sf_p"), number(j, where, "sf_d")};
}

json lif_json(const snn::LifConfig& c) {
  return {{"tau_mem", c.tau_mem}, {"v_thresh", c.v_thresh}, {"v_rest", c.v_rest},
          {"v_reset", c.v_reset}, {"refractory", c.refractory}, {"dt", c.dt}};
}

snn::LifConfig lif_from(const json& j, std::string_view where) {
  require_object(j, where, {"tau_mem", "v_thresh", "v_rest", "v_reset", "refractory", "dt"});
  snn::LifConfig c;
  c.tau_mem = number(j, where, "tau_mem");
  c.v_thresh = number(j, where, "v_thresh");
  c.v_rest = number(j, where, "v_rest");
  c.v_reset = number(j, where, "v_reset");
  c.refractory = number(j, where, "refractory");
  c.dt = number(j, where, "dt");
  return c;
}

std::uint64_t unsigned_integer(const json& j, std::string_view where, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw Error(ErrorCode::SchemaMismatch, std::string(where) + "." + key + ": expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

void check_version(const json& j, int expected, std::string_view what) {
  if (!j.contains("schema_version") || !j.at("schema_version").is_number_integer() ||
      j.at("schema_version").get<int>() != expected) {
    throw Error(ErrorCode::SchemaMismatch,
                std::string(what) + ": schema_version must be " + std::to_string(expected));
  }
}

json parse_json_text(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed JSON: ") + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

}  // namespace

bool ModelCard::operator==(const ModelCard& other) const { return to_json(*this) == to_json(other); }

json to_json(const ModelCard& card) {
  json j = {{"schema_version", kModelCardVersion}};
  if (card.device) {
    j["device"] = {{"upper", envelope_json(card.device->upper)},
                   {"lower", envelope_json(card.device->lower)},
                   {"validity_range_volts", card.device->validity_range_volts},
                   {"min_pulse_width_seconds", card.device->min_pulse_width_seconds}};
  }
  if (card.conduction) {
    const auto& c = *card.conduction;
    j["conduction"] = {{"tfl", {{"k_tfl", c.tfl.k_tfl}, {"v_tr", c.tfl.v_tr}}},
                       {"schottky",
                        {{"a_eff", c.schottky.a_eff},
                         {"temperature", c.schottky.temperature},
                         {"phi_b", c.schottky.phi_b},
                         {"eps_r", c.schottky.eps_r}}},
                       {"ohmic_g", c.ohmic_g},
                       {"thickness", c.thickness}};
  }
  if (card.rc) {
    json rc = {{"r_el", card.rc->r_el}, {"d", card.rc->d}};
    if (card.rc->eps_dev) rc["eps_dev"] = *card.rc->eps_dev;
    if (card.rc->cap_per_area) rc["cap_per_area"] = *card.rc->cap_per_area;
    j["rc"] = rc;
  }
  if (card.merz) j["merz"] = {{"t_inf", card.merz->t_inf}, {"e_act", card.merz->e_act}};
  if (card.vdsp) j["vdsp"] = vdsp_json(*card.vdsp);
  if (card.scaling) j["scaling"] = scaling_json(*card.scaling);
  return j;
}

ModelCard model_card_from_json(const json& j) {
  require_object(j, "card", {"schema_version"}, {"device", "conduction", "rc", "merz", "vdsp", "scaling"});
  check_version(j, kModelCardVersion, "model card");
  ModelCard card;
  if (j.contains("device")) {
    const json& d = j.at("device");
    require_object(d, "device", {"upper", "lower", "validity_range_volts"}, {"min_pulse_width_seconds"});
    device::DeviceRule rule;
    rule.upper = envelope_from(d.at("upper"), "device.upper");
    rule.lower = envelope_from(d.at("lower"), "device.lower");
    rule.validity_range_volts = number(d, "device", "validity_range_volts");
    if (d.contains("min_pulse_width_seconds")) {
      rule.min_pulse_width_seconds = number(d, "device", "min_pulse_width_seconds");
    }
    rule.validate();
    card.device = rule;
  }
  if (j.contains("conduction")) {
    const json& c = j.at("conduction");
    require_object(c, "conduction", {"tfl", "schottky", "ohmic_g", "thickness"});
    physics::ConductionModel m;
    const json& t = c.at("tfl");
    require_object(t, "conduction.tfl", {"k_tfl", "v_tr"});
    m.tfl.k_tfl = number(t, "conduction.tfl", "k_tfl");
    m.tfl.v_tr = number(t, "conduction.tfl", "v_tr");
    const json& s = c.at("schottky");
    require_object(s, "conduction.schottky", {"a_eff", "temperature", "phi_b", "eps_r"});
    m.schottky.a_eff = number(s, "conduction.schottky", "a_eff");
    m.schottky.temperature = number(s, "conduction.schottky", "temperature");
    m.schottky.phi_b = number(s, "conduction.schottky", "phi_b");
    m.schottky.eps_r = number(s, "conduction.schottky", "eps_r");
    m.ohmic_g = number(c, "conduction", "ohmic_g");
    m.thickness = number(c, "conduction", "thickness");
    m.validate();
    card.conduction = m;
  }
  if (j.contains("rc")) {
    const json& r = j.at("rc");
    require_object(r, "rc", {"r_el", "d"}, {"eps_dev", "cap_per_area"});
    physics::RcParams rc;
    rc.r_el = number(r, "rc", "r_el");
    rc.d = number(r, "rc", "d");
    if (r.contains("eps_dev")) rc.eps_dev = number(r, "rc", "eps_dev");
    if (r.contains("cap_per_area")) rc.cap_per_area = number(r, "rc", "cap_per_area");
    rc.validate();
    card.rc = rc;
  }
  if (j.contains("merz")) {
    const json& m = j.at("merz");
    require_object(m, "merz", {"t_inf", "e_act"});
    physics::MerzParams p{number(m, "merz", "t_inf"), number(m, "merz", "e_act")};
    p.validate();
    card.merz = p;
  }
  if (j.contains("vdsp")) {
    card.vdsp = vdsp_from(j.at("vdsp"), "vdsp");
    card.vdsp->validate();
  }
  if (j.contains("scaling")) {
    card.scaling = scaling_from(j.at("scaling"), "scaling");
    card.scaling->validate();
  }
  return card;
}

std::string dump_model_card(const ModelCard& card) { return to_json(card).dump(2) + "\n"; }

ModelCard parse_model_card(std::string_view text) { return model_card_from_json(parse_json_text(text)); }

ModelCard load_model_card(const std::filesystem::path& path) { return parse_model_card(read_text(path)); }

void save_model_card(const std::filesystem::path& path, const ModelCard& card) {
  write_text(path, dump_model_card(card));
}

ModelCard default_model_card() {
  ModelCard card;
  card.device = device::table1_rule();
  card.conduction = physics::calibrated_conduction();
  physics::RcParams rc;
  rc.eps_dev = card.conduction->schottky.eps_r * physics::constants::vacuum_permittivity;
  card.rc = rc;
  card.vdsp = vdsp::VdspParams{};
  card.scaling = vdsp::scaling_for_network_size(200);
  return card;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json to_json(const snn::SnnConfig& cfg) {
  return {{"n_outputs", cfg.n_outputs},
          {"input", lif_json(cfg.input)},
          {"output", lif_json(cfg.output)},
          {"synaptic_gain", cfg.synaptic_gain},
          {"homeostasis", {{"theta_plus", cfg.homeostasis.theta_plus}, {"tau_theta", cfg.homeostasis.tau_theta}}},
          {"init_weight_lo", cfg.init_weight_lo},
          {"init_weight_hi", cfg.init_weight_hi}};
}

json to_json(const snn::TrainConfig& t) {
  return {{"vdsp", vdsp_json(t.vdsp)},
          {"scaling", scaling_json(t.sf)},
          {"presentation_time", t.presentation_time},
          {"rest_time", t.rest_time},
          {"input_gain", t.input_gain},
          {"min_output_spikes", t.min_output_spikes},
          {"gain_step", t.gain_step},
          {"max_retries", t.max_retries},
          {"epochs", t.epochs},
          {"seed", t.seed},
          {"log_every", t.log_every}};
}

snn::SnnConfig snn_config_from_json(const json& j) {
  require_object(j, "snn", {"n_outputs", "input", "output", "synaptic_gain", "homeostasis", "init_weight_lo",
                            "init_weight_hi"});
  snn::SnnConfig cfg;
  cfg.n_outputs = unsigned_integer(j, "snn", "n_outputs");
  cfg.input = lif_from(j.at("input"), "snn.input");
  cfg.output = lif_from(j.at("output"), "snn.output");
  cfg.synaptic_gain = number(j, "snn", "synaptic_gain");
  const json& h = j.at("homeostasis");
  require_object(h, "snn.homeostasis", {"theta_plus", "tau_theta"});
  cfg.homeostasis.theta_plus = number(h, "snn.homeostasis", "theta_plus");
  cfg.homeostasis.tau_theta = number(h, "snn.homeostasis", "tau_theta");
  cfg.init_weight_lo = number(j, "snn", "init_weight_lo");
  cfg.init_weight_hi = number(j, "snn", "init_weight_hi");
  cfg.validate();
  return cfg;
}

snn::TrainConfig train_config_from_json(const json& j) {
  require_object(j, "train",
                 {"vdsp", "scaling", "presentation_time", "rest_time", "input_gain", "min_output_spikes", "gain_step",
                  "max_retries", "epochs", "seed", "log_every"});
  snn::TrainConfig t;
  t.vdsp = vdsp_from(j.at("vdsp"), "train.vdsp");
  t.sf = scaling_from(j.at("scaling"), "train.scaling");
  t.presentation_time = number(j, "train", "presentation_time");
  t.rest_time = number(j, "train", "rest_time");
  t.input_gain = number(j, "train", "input_gain");
  t.min_output_spikes = static_cast<int>(unsigned_integer(j, "train", "min_output_spikes"));
  t.gain_step = number(j, "train", "gain_step");
  t.max_retries = static_cast<int>(unsigned_integer(j, "train", "max_retries"));
  t.epochs = static_cast<int>(unsigned_integer(j, "train", "epochs"));
  t.seed = unsigned_integer(j, "train", "seed");
  t.log_every = unsigned_integer(j, "train", "log_every");
  t.validate();
  return t;
}

std::string config_hash(const snn::SnnConfig& cfg, const snn::TrainConfig& train) {
  const json j = {{"snn", to_json(cfg)}, {"train", to_json(train)}};
  return fnv1a_hex(j.dump());
}

std::string dump_checkpoint(const Checkpoint& ck) {
  ck.network.validate();
  json j = {{"schema_version", kCheckpointVersion},
            {"config_hash", config_hash(ck.config, ck.train)},
            {"snn", to_json(ck.config)},
            {"train", to_json(ck.train)},
            {"network",
             {{"n_outputs", ck.network.n_outputs},
              {"weights", ck.network.weights},
              {"v_mem", ck.network.v_mem},
              {"refractory", ck.network.refractory},
              {"theta", ck.network.theta},
              {"labels", ck.network.labels}}}};
  return j.dump() + "\n";
}

Checkpoint parse_checkpoint(std::string_view text) {
  const json j = parse_json_text(text);
  require_object(j, "checkpoint", {"schema_version", "config_hash", "snn", "train", "network"});
  check_version(j, kCheckpointVersion, "checkpoint");
  Checkpoint ck;
  ck.config = snn_config_from_json(j.at("snn"));
  ck.train = train_config_from_json(j.at("train"));
  if (!j.at("config_hash").is_string() || j.at("config_hash").get<std::string>() != config_hash(ck.config, ck.train)) {
    throw Error(ErrorCode::SchemaMismatch, "checkpoint config_hash does not match its configuration");
  }
  const json& n = j.at("network");
  require_object(n, "network", {"n_outputs", "weights", "v_mem", "refractory", "theta", "labels"});
  try {
    ck.network.n_outputs = unsigned_integer(n, "network", "n_outputs");
    ck.network.weights = n.at("weights").get<std::vector<double>>();
    ck.network.v_mem = n.at("v_mem").get<std::vector<double>>();
    ck.network.refractory = n.at("refractory").get<std::vector<double>>();
    ck.network.theta = n.at("theta").get<std::vector<double>>();
    ck.network.labels = n.at("labels").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, std::string("network arrays: ") + e.what());
  }
  ck.network.validate();
  if (ck.network.n_outputs != ck.config.n_outputs) {
    throw Error(ErrorCode::DimensionMismatch, "network size differs from the stored configuration");
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) { write_text(path, dump_checkpoint(ck)); }

Checkpoint load_checkpoint(const std::filesystem::path& path) { return parse_checkpoint(read_text(path)); }

void write_metrics_header(std::ostream& out) { out << "image_index,running_accuracy,mean_weight\n"; }

void write_metrics_row(std::ostream& out, const snn::TrainProgress& p) {
  out << p.image_index << ',' << format_double(p.running_accuracy) << ',' << format_double(p.mean_weight) << '\n';
}

void write_receptive_fields_csv(std::ostream& out, const snn::Network& net) {
  out << "neuron,row";
  for (int c = 0; c < 28; ++c) out << ",c" << c;
  out << '\n';
  for (std::size_t j = 0; j < net.n_outputs; ++j) {
    for (std::size_t r = 0; r < 28; ++r) {
      out << j << ',' << r;
      for (std::size_t c = 0; c < 28; ++c) out << ',' << format_double(net.weight(r * 28 + c, j));
      out << '\n';
    }
  }
}

void write_receptive_fields_pgm(std::ostream& out, const snn::Network& net) {
  const std::size_t width = 28 * net.n_outputs;
  out << "P5\n" << width << " 28\n255\n";
  for (std::size_t r = 0; r < 28; ++r) {
    for (std::size_t j = 0; j < net.n_outputs; ++j) {
      for (std::size_t c = 0; c < 28; ++c) {
        const double w = std::clamp(net.weight(r * 28 + c, j), 0.0, 1.0);
        out.put(static_cast<char>(static_cast<unsigned char>(std::lround(w * 255.0))));
      }
    }
  }
}

}  // namespace ferrosyn::io
