#pragma once

// JSON model cards, network checkpoints, and result tables.
//
// A model card is a JSON object with any subset of the sections
//   "device"     {upper, lower: {r_min, r_max, v0, v_off}, validity_range_volts, min_pulse_width_seconds}
//   "conduction" {tfl: {k_tfl, v_tr}, schottky: {a_eff, temperature, phi_b, eps_r}, ohmic_g, thickness}
//   "rc"         {r_el, d, eps_dev?, cap_per_area?}
//   "merz"       {t_inf, e_act}
//   "vdsp"       {alpha_p, alpha_d, theta_p, theta_d, gamma_p, gamma_d}
//   "scaling"    {sf_p, sf_d}
// plus "schema_version". Unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ferrosyn/device_model.hpp"
#include "ferrosyn/device_physics.hpp"
#include "ferrosyn/snn.hpp"
#include "ferrosyn/vdsp.hpp"

namespace ferrosyn::io {

inline constexpr int kModelCardVersion = 1;
inline constexpr int kCheckpointVersion = 1;

struct ModelCard {
  std::optional<device::DeviceRule> device;
  std::optional<physics::ConductionModel> conduction;
  std::optional<physics::RcParams> rc;
  std::optional<physics::MerzParams> merz;
  std::optional<vdsp::VdspParams> vdsp;
  std::optional<vdsp::ScalingFactors> scaling;

  bool operator==(const ModelCard&) const;
};

nlohmann::json to_json(const ModelCard& card);
/// Throws SchemaMismatch for missing/unknown keys or a wrong schema_version,
/// NonFinite for non-numeric fields.
ModelCard model_card_from_json(const nlohmann::json& j);

std::string dump_model_card(const ModelCard& card);
ModelCard parse_model_card(std::string_view text);
ModelCard load_model_card(const std::filesystem::path& path);
void save_model_card(const std::filesystem::path& path, const ModelCard& card);

/// Card with the device, calibrated conduction, RC, VDSP and scaling defaults.
ModelCard default_model_card();

/// 64-bit FNV-1a of a byte string, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

nlohmann::json to_json(const snn::SnnConfig& cfg);
nlohmann::json to_json(const snn::TrainConfig& cfg);
snn::SnnConfig snn_config_from_json(const nlohmann::json& j);
snn::TrainConfig train_config_from_json(const nlohmann::json& j);

/// Hash of the canonical JSON of both configs; stored in checkpoints and run
/// manifests.
std::string config_hash(const snn::SnnConfig& cfg, const snn::TrainConfig& train);

struct Checkpoint {
  snn::SnnConfig config;
  snn::TrainConfig train;
  snn::Network network;
};

std::string dump_checkpoint(const Checkpoint& ck);
/// Throws SchemaMismatch on version or config-hash mismatch, DimensionMismatch
/// when arrays disagree with n_outputs.
Checkpoint parse_checkpoint(std::string_view text);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// image_index,running_accuracy,mean_weight
void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, const snn::TrainProgress& p);

/// One 28x28 grid per output: CSV rows "neuron,row,c0..c27", and a binary PGM
/// tiling all fields side by side (8-bit, weight 1 -> 255).
void write_receptive_fields_csv(std::ostream& out, const snn::Network& net);
void write_receptive_fields_pgm(std::ostream& out, const snn::Network& net);

}  // namespace ferrosyn::io
