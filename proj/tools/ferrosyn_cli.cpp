// ferrosyn: command-line front end. Every subcommand writes its tables and a
// manifest.json into --out; data goes to files, progress to stderr.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ferrosyn/device_model.hpp"
#include "ferrosyn/device_physics.hpp"
#include "ferrosyn/error.hpp"
#include "ferrosyn/experiment.hpp"
#include "ferrosyn/fitting.hpp"
#include "ferrosyn/model_card.hpp"
#include "ferrosyn/snn.hpp"
#include "ferrosyn/trace_csv.hpp"

#ifndef FERROSYN_DEFAULT_DATA_DIR
#define FERROSYN_DEFAULT_DATA_DIR "data/mnist"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ferrosyn;

namespace {

constexpr int kManifestVersion = 1;

// Files written by the current run; removed again if the run fails.
class Run {
 public:
  Run(fs::path out, std::vector<std::string> argv) : out_(std::move(out)), argv_(std::move(argv)) {}

  std::ofstream open(const std::string& name) {
    fs::create_directories(out_);
    const fs::path path = out_ / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::Io, "cannot create " + path.string());
    written_.push_back(path);
    return f;
  }

  fs::path path(const std::string& name) {
    fs::create_directories(out_);
    written_.push_back(out_ / name);
    return out_ / name;
  }

  void rollback() {
    for (const auto& p : written_) {
      std::error_code ec;
      fs::remove(p, ec);
    }
    written_.clear();
  }

  void finish(const std::string& command, std::uint64_t seed, const std::string& hash, json parameters) {
    json outputs = json::array();
    for (const auto& p : written_) outputs.push_back(p.filename().string());
    const json manifest = {{"schema_version", kManifestVersion},
                           {"command", command},
                           {"argv", argv_},
                           {"seed", seed},
                           {"config_hash", hash},
                           {"parameters", std::move(parameters)},
                           {"outputs", outputs},
                           {"versions",
                            {{"ferrosyn", kVersion},
                             {"model_card", io::kModelCardVersion},
                             {"checkpoint", io::kCheckpointVersion},
                             {"manifest", kManifestVersion}}}};
    auto f = open("manifest.json");
    f << manifest.dump(2) << '\n';
  }

 private:
  fs::path out_;
  std::vector<std::string> argv_;
  std::vector<fs::path> written_;
};

struct Common {
  std::string out = ".";
  std::string card;
  unsigned threads = 1;
};

io::ModelCard card_or_default(const std::string& path) {
  return path.empty() ? io::default_model_card() : io::load_model_card(path);
}

std::string hash_of(const json& j) { return io::fnv1a_hex(j.dump()); }

device::DeviceRule require_device(const io::ModelCard& card) {
  if (!card.device) throw Error(ErrorCode::SchemaMismatch, "model card has no 'device' section");
  return *card.device;
}

physics::ConductionModel require_conduction(const io::ModelCard& card) {
  if (!card.conduction) throw Error(ErrorCode::SchemaMismatch, "model card has no 'conduction' section");
  return *card.conduction;
}

template <class P>
json report_json(const fit::FitReport<P>& r, json parameters) {
  return {{"parameters", std::move(parameters)},
          {"residual_rms", r.residual_rms},
          {"n_points", r.n_points},
          {"converged", r.converged},
          {"iterations", r.iterations}};
}

// ---------------------------------------------------------------------------
// SNN configuration: defaults for the network size, patched by an optional
// JSON file {"snn": {...}, "train": {...}} (RFC 7396 merge patch).

struct SnnSetup {
  snn::SnnConfig cfg;
  snn::TrainConfig train;
};

SnnSetup snn_setup(std::size_t n_outputs, std::uint64_t seed, const std::string& config_path) {
  snn::SnnConfig cfg;
  cfg.n_outputs = n_outputs;
  snn::TrainConfig t = snn::TrainConfig::for_network_size(n_outputs);
  t.seed = seed;
  json s = io::to_json(cfg);
  json tj = io::to_json(t);
  if (!config_path.empty()) {
    json patch;
    try {
      patch = json::parse(io::read_text(config_path));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, config_path + ": " + e.what());
    }
    if (patch.contains("snn")) s.merge_patch(patch["snn"]);
    if (patch.contains("train")) tj.merge_patch(patch["train"]);
  }
  return {io::snn_config_from_json(s), io::train_config_from_json(tj)};
}

fs::path mnist_dir(const std::string& flag) { return flag.empty() ? data_dir(FERROSYN_DEFAULT_DATA_DIR) : fs::path(flag); }

snn::ProgressFn stderr_progress(std::ostream* metrics) {
  return [metrics](const snn::TrainProgress& p) {
    std::cerr << "  image " << p.image_index << "  running accuracy " << p.running_accuracy << "  mean weight "
              << p.mean_weight << '\n';
    if (metrics) io::write_metrics_row(*metrics, p);
  };
}

void write_confusion(std::ostream& out, const snn::Evaluation& ev) {
  out << "true_class";
  for (int c = 0; c < snn::kClasses; ++c) out << ",pred_" << c;
  out << ",abstain\n";
  for (int c = 0; c < snn::kClasses; ++c) {
    out << c;
    for (auto n : ev.confusion[static_cast<std::size_t>(c)]) out << ',' << n;
    out << '\n';
  }
}

std::vector<std::size_t> parse_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "bad list entry '" + item + "' in '" + text + "'");
    }
  }
  if (out.empty()) throw Error(ErrorCode::ParseError, "empty list");
  return out;
}

int run_cli(std::vector<std::string> args);

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(std::move(args));
}

namespace {

int run_cli(std::vector<std::string> args) {
  CLI::App app{"ferroelectric synapse simulation and analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Common common;
  app.add_option("--out", common.out, "output directory")->capture_default_str();
  app.add_option("--card", common.card, "model card JSON (defaults to the built-in card)");
  app.add_option("--threads", common.threads, "maximum worker threads")->capture_default_str()->check(CLI::PositiveNumber);

  std::optional<Run> run;
  std::function<void()> action;

  // device -----------------------------------------------------------------
  auto* device = app.add_subcommand("device", "compact device model");
  device->require_subcommand(1);

  struct {
    double v_max = 3.0, step = 0.1, width = 20e-9, v_end = -3.0;
    int loops = 2;
    std::string initial = "lrs";
  } dev;
  auto* sweep = device->add_subcommand("pulse-sweep", "LTD/LTP staircase: 0 -> +v_max, then 0 -> -v_max");
  sweep->add_option("--v-max", dev.v_max)->capture_default_str();
  sweep->add_option("--step", dev.step)->capture_default_str();
  sweep->add_option("--width", dev.width)->capture_default_str();
  sweep->add_option("--initial", dev.initial, "starting state")->check(CLI::IsMember({"lrs", "hrs"}))->capture_default_str();
  sweep->callback([&] {
    action = [&] {
      const auto card = card_or_default(common.card);
      const auto rule = require_device(card);
      const device::DeviceState start{dev.initial == "lrs" ? rule.lrs() : rule.hrs()};
      const auto trace = device::simulate_staircase(rule, device::ltp_ltd_schedule(dev.v_max, dev.step, dev.width), start);
      auto f = run->open("pulse_sweep.csv");
      io::write_pulse_trace(f, trace);
      const json p = {{"v_max", dev.v_max}, {"step", dev.step}, {"width", dev.width}, {"initial", dev.initial},
                      {"card", io::to_json(card)}};
      run->finish("device pulse-sweep", 0, hash_of(p), p);
    };
  });

  auto* loop = device->add_subcommand("loop", "repeated hysteresis loops: 0 -> v_max -> v_end");
  loop->add_option("--v-max", dev.v_max)->capture_default_str();
  loop->add_option("--v-end", dev.v_end)->capture_default_str();
  loop->add_option("--step", dev.step)->capture_default_str();
  loop->add_option("--width", dev.width)->capture_default_str();
  loop->add_option("--loops", dev.loops)->capture_default_str()->check(CLI::PositiveNumber);
  loop->callback([&] {
    action = [&] {
      const auto card = card_or_default(common.card);
      const auto rule = require_device(card);
      const auto one = device::loop_schedule(dev.v_max, dev.v_end, dev.step, dev.width);
      std::vector<device::PulseSpec> all;
      for (int k = 0; k < dev.loops; ++k) all.insert(all.end(), one.begin(), one.end());
      const auto trace = device::simulate_staircase(rule, all);
      auto f = run->open("loop.csv");
      f << "loop,";
      std::ostringstream body;
      io::write_pulse_trace(body, trace);
      // Prefix each row with its loop number.
      std::istringstream lines(body.str());
      std::string line;
      std::getline(lines, line);
      f << line << '\n';
      for (std::size_t i = 0; std::getline(lines, line); ++i) f << i / one.size() << ',' << line << '\n';
      const json p = {{"v_max", dev.v_max}, {"v_end", dev.v_end}, {"step", dev.step}, {"width", dev.width},
                      {"loops", dev.loops}, {"card", io::to_json(card)}};
      run->finish("device loop", 0, hash_of(p), p);
    };
  });

  struct {
    std::size_t n = 300;
    std::uint64_t seed = 1;
    double v_lo = -3.0, v_hi = 3.0, width = 20e-9;
  } rnd;
  auto* random = device->add_subcommand("random-pulses", "write-read sequence with random amplitudes");
  random->add_option("--n", rnd.n)->capture_default_str();
  random->add_option("--seed", rnd.seed)->capture_default_str();
  random->add_option("--v-lo", rnd.v_lo)->capture_default_str();
  random->add_option("--v-hi", rnd.v_hi)->capture_default_str();
  random->add_option("--width", rnd.width)->capture_default_str();
  random->callback([&] {
    action = [&] {
      const auto card = card_or_default(common.card);
      const auto rule = require_device(card);
      const auto trace = device::simulate_random_pulses(rule, rnd.n, rnd.v_lo, rnd.v_hi, rnd.seed, rnd.width);
      std::size_t outside = 0;
      for (const auto& p : trace) {
        if (!device::inside_envelope(rule, p.pulse.amplitude, p.r_final)) ++outside;
      }
      auto f = run->open("random_pulses.csv");
      io::write_pulse_trace(f, trace);
      std::cerr << trace.size() << " pulses, " << outside << " outside the envelope region\n";
      const json p = {{"n", rnd.n}, {"v_lo", rnd.v_lo}, {"v_hi", rnd.v_hi}, {"width", rnd.width},
                      {"card", io::to_json(card)}};
      run->finish("device random-pulses", rnd.seed, hash_of(p), p);
    };
  });

  // physics ----------------------------------------------------------------
  auto* physics = app.add_subcommand("physics", "device-physics estimators");
  physics->require_subcommand(1);
  struct {
    double v = 1.0, area_min = 1e-12, area_max = 100e-12, t = 20e-9, area = 24e-12;
    std::size_t points = 100;
    std::optional<double> cap_density;
  } phy;
  auto* tau = physics->add_subcommand("tau-sweep", "self-loading time versus device area");
  tau->add_option("--v", phy.v, "read/write bias (V)")->capture_default_str();
  tau->add_option("--area-min", phy.area_min, "m^2")->capture_default_str();
  tau->add_option("--area-max", phy.area_max, "m^2")->capture_default_str();
  tau->add_option("--points", phy.points)->capture_default_str()->check(CLI::Range(2, 100000));
  tau->add_option("--cap-density", phy.cap_density, "capacitance density (F/m^2), overrides the card");
  tau->callback([&] {
    action = [&] {
      auto card = card_or_default(common.card);
      const auto m = require_conduction(card);
      physics::RcParams rc = card.rc.value_or(physics::RcParams{});
      if (phy.cap_density) {
        rc.cap_per_area = *phy.cap_density;
        rc.eps_dev.reset();
      }
      rc.validate();
      auto f = run->open("tau_sweep.csv");
      f << "area_m2,tau_seconds\n";
      for (std::size_t i = 0; i < phy.points; ++i) {
        const double a = phy.area_min + (phy.area_max - phy.area_min) * static_cast<double>(i) /
                                             static_cast<double>(phy.points - 1);
        f << io::format_double(a) << ',' << io::format_double(physics::tau_area(phy.v, a, rc, m)) << '\n';
      }
      card.rc = rc;
      const json p = {{"v", phy.v}, {"area_min", phy.area_min}, {"area_max", phy.area_max},
                      {"points", phy.points}, {"card", io::to_json(card)}};
      run->finish("physics tau-sweep", 0, hash_of(p), p);
    };
  });

  auto* energy = physics->add_subcommand("energy", "programming-energy upper bound");
  energy->add_option("--v", phy.v, "write bias (V)")->required();
  energy->add_option("--t", phy.t, "pulse width (s)")->capture_default_str();
  energy->add_option("--area", phy.area, "device area (m^2)")->capture_default_str();
  energy->callback([&] {
    action = [&] {
      const auto card = card_or_default(common.card);
      const auto m = require_conduction(card);
      const double q = physics::programming_energy(phy.v, phy.t, phy.area, m);
      auto f = run->open("energy.csv");
      f << "v_write_volts,t_write_seconds,area_m2,current_density_a_m2,energy_joules\n"
        << io::format_double(phy.v) << ',' << io::format_double(phy.t) << ',' << io::format_double(phy.area) << ','
        << io::format_double(physics::current_density(phy.v, m)) << ',' << io::format_double(q) << '\n';
      std::cout << io::format_double(q) << '\n';
      const json p = {{"v", phy.v}, {"t", phy.t}, {"area", phy.area}, {"card", io::to_json(card)}};
      run->finish("physics energy", 0, hash_of(p), p);
    };
  });

  // fit --------------------------------------------------------------------
  auto* fitcmd = app.add_subcommand("fit", "parameter extraction from CSV traces");
  fitcmd->require_subcommand(1);
  struct {
    std::string input;
    std::string regime = "schottky";
    double area = 24e-12, thickness = 5e-9, temperature = 300.0, v_min = 0.14;
    std::optional<double> delta_threshold;
  } fo;
  auto* fiv = fitcmd->add_subcommand("iv", "conduction regime from an I-V trace");
  fiv->add_option("--input", fo.input, "CSV: voltage_volts,current_amperes")->required()->check(CLI::ExistingFile);
  fiv->add_option("--regime", fo.regime)->check(CLI::IsMember({"tfl", "schottky"}))->capture_default_str();
  fiv->add_option("--area", fo.area, "m^2")->capture_default_str();
  fiv->add_option("--thickness", fo.thickness, "m")->capture_default_str();
  fiv->add_option("--temperature", fo.temperature, "K")->capture_default_str();
  fiv->add_option("--v-min", fo.v_min, "lower |V| bound of the fitted range")->capture_default_str();
  fiv->callback([&] {
    action = [&] {
      auto card = card_or_default(common.card);
      auto m = card.conduction.value_or(physics::calibrated_conduction());
      const auto trace = io::load_iv_trace(fo.input, fo.area);
      json report;
      if (fo.regime == "tfl") {
        const auto r = fit::fit_tfl(trace, fo.v_min);
        m.tfl = r.parameters.params;
        report = report_json(r, {{"k_tfl", m.tfl.k_tfl}, {"v_tr", m.tfl.v_tr}, {"exponent", r.parameters.exponent}});
      } else {
        const auto r = fit::fit_schottky(trace, fo.thickness, fo.temperature, m.schottky.a_eff, fo.v_min);
        m.schottky = r.parameters.params;
        report = report_json(r, {{"phi_b", m.schottky.phi_b}, {"eps_r", m.schottky.eps_r},
                                 {"slope", r.parameters.slope}, {"intercept", r.parameters.intercept}});
      }
      m.thickness = fo.thickness;
      card.conduction = m;
      run->open("fit_report.json") << report.dump(2) << '\n';
      io::save_model_card(run->path("card.json"), card);
      const json p = {{"input", fo.input}, {"regime", fo.regime}, {"area", fo.area}, {"thickness", fo.thickness},
                      {"temperature", fo.temperature}, {"v_min", fo.v_min}};
      run->finish("fit iv", 0, hash_of(p), p);
    };
  });

  auto* fmerz = fitcmd->add_subcommand("merz", "Merz-law kinetics from (width, amplitude) points");
  fmerz->add_option("--input", fo.input, "CSV: width_seconds,v_max_volts")->required()->check(CLI::ExistingFile);
  fmerz->add_option("--thickness", fo.thickness, "m")->capture_default_str();
  fmerz->callback([&] {
    action = [&] {
      auto card = card_or_default(common.card);
      const auto pts = io::parse_merz_points(io::read_text(fo.input));
      const auto r = fit::fit_merz(pts, fo.thickness);
      card.merz = r.parameters;
      run->open("fit_report.json")
          << report_json(r, {{"t_inf", r.parameters.t_inf}, {"e_act", r.parameters.e_act}}).dump(2) << '\n';
      auto f = run->open("merz_prediction.csv");
      f << "width_seconds,v_max_volts,predicted_width_seconds\n";
      for (const auto& p : pts) {
        f << io::format_double(p.width) << ',' << io::format_double(p.v_max) << ','
          << io::format_double(physics::merz_switching_time(p.v_max / fo.thickness, r.parameters)) << '\n';
      }
      io::save_model_card(run->path("card.json"), card);
      const json p = {{"input", fo.input}, {"thickness", fo.thickness}};
      run->finish("fit merz", 0, hash_of(p), p);
    };
  });

  auto* fenv = fitcmd->add_subcommand("envelope", "tanh switching envelopes from a pulse trace");
  fenv->add_option("--input", fo.input, "pulse-trace CSV")->required()->check(CLI::ExistingFile);
  fenv->add_option("--delta-threshold", fo.delta_threshold, "switching-event threshold (ohm)");
  fenv->callback([&] {
    action = [&] {
      auto card = card_or_default(common.card);
      fit::EnvelopeFitOptions opt;
      opt.delta_threshold = fo.delta_threshold;
      const auto r = fit::fit_envelopes(io::load_pulse_trace(fo.input), opt);
      card.device = r.parameters;
      const auto j = io::to_json(card);
      run->open("fit_report.json") << report_json(r, j["device"]).dump(2) << '\n';
      io::save_model_card(run->path("card.json"), card);
      json p = {{"input", fo.input}};
      if (fo.delta_threshold) p["delta_threshold"] = *fo.delta_threshold;
      run->finish("fit envelope", 0, hash_of(p), p);
    };
  });

  auto* fvdsp = fitcmd->add_subcommand("vdsp", "VDSP constants from (v, w, dw) samples");
  fvdsp->add_option("--input", fo.input, "CSV: v_volts,w_initial,delta_w")->required()->check(CLI::ExistingFile);
  fvdsp->callback([&] {
    action = [&] {
      auto card = card_or_default(common.card);
      const auto r = fit::fit_vdsp(io::parse_vdsp_samples(io::read_text(fo.input)));
      card.vdsp = r.parameters;
      const auto j = io::to_json(card);
      run->open("fit_report.json") << report_json(r, j["vdsp"]).dump(2) << '\n';
      io::save_model_card(run->path("card.json"), card);
      const json p = {{"input", fo.input}};
      run->finish("fit vdsp", 0, hash_of(p), p);
    };
  });

  // card -------------------------------------------------------------------
  auto* cardcmd = app.add_subcommand("card", "write the built-in model card");
  cardcmd->callback([&] {
    action = [&] {
      io::save_model_card(run->path("card.json"), card_or_default(common.card));
      const json p = json::object();
      run->finish("card", 0, hash_of(p), p);
    };
  });

  // snn --------------------------------------------------------------------
  auto* snncmd = app.add_subcommand("snn", "spiking network on MNIST");
  snncmd->require_subcommand(1);
  struct {
    std::size_t n_outputs = 10, train = 10000, label = 10000, test = 2000;
    std::uint64_t seed = 1;
    std::string config, data, checkpoint, sizes = "10,50,100", seeds = "1,2,3";
  } so;
  auto add_data = [&](CLI::App* c) {
    c->add_option("--data-dir", so.data, std::string("MNIST directory (default $") + kDataDirEnv + ")");
  };

  auto* strain = snncmd->add_subcommand("train", "unsupervised training");
  strain->add_option("--n-outputs", so.n_outputs)->capture_default_str()->check(CLI::PositiveNumber);
  strain->add_option("--train-count", so.train)->capture_default_str();
  strain->add_option("--seed", so.seed)->capture_default_str();
  strain->add_option("--config", so.config, "JSON patch over the default snn/train configuration");
  add_data(strain);
  strain->callback([&] {
    action = [&] {
      const auto setup = snn_setup(so.n_outputs, so.seed, so.config);
      const auto mnist = load_mnist(mnist_dir(so.data));
      const auto data = snn::make_dataset(mnist.train_images, mnist.train_labels, 0, so.train);
      auto metrics = run->open("metrics.csv");
      io::write_metrics_header(metrics);
      const auto net = snn::train(snn::make_network(setup.cfg, so.seed), data, setup.cfg, setup.train,
                                  stderr_progress(&metrics));
      io::save_checkpoint(run->path("checkpoint.json"), {setup.cfg, setup.train, net});
      auto rf_csv = run->open("receptive_fields.csv");
      io::write_receptive_fields_csv(rf_csv, net);
      auto rf_pgm = run->open("receptive_fields.pgm");
      io::write_receptive_fields_pgm(rf_pgm, net);
      const json p = {{"n_outputs", so.n_outputs}, {"train_count", so.train}, {"config", so.config}};
      run->finish("snn train", so.seed, io::config_hash(setup.cfg, setup.train), p);
    };
  });

  auto* slabel = snncmd->add_subcommand("label", "assign a class to every output neuron");
  slabel->add_option("--checkpoint", so.checkpoint)->required()->check(CLI::ExistingFile);
  slabel->add_option("--label-count", so.label, "first training images used for labeling")->capture_default_str();
  add_data(slabel);
  slabel->callback([&] {
    action = [&] {
      auto ck = io::load_checkpoint(so.checkpoint);
      const auto mnist = load_mnist(mnist_dir(so.data));
      const auto data = snn::make_dataset(mnist.train_images, mnist.train_labels, 0, so.label);
      ck.network = snn::assign_labels(std::move(ck.network), data, ck.config, ck.train, common.threads);
      const fs::path out_ck = run->path("checkpoint.json");
      if (fs::exists(so.checkpoint) && fs::exists(out_ck) && fs::equivalent(out_ck, so.checkpoint)) {
        throw Error(ErrorCode::Io, "refusing to overwrite the input checkpoint; choose another --out");
      }
      io::save_checkpoint(out_ck, ck);
      auto f = run->open("labels.csv");
      f << "neuron,label\n";
      for (std::size_t j = 0; j < ck.network.labels.size(); ++j) f << j << ',' << ck.network.labels[j] << '\n';
      const json p = {{"checkpoint", so.checkpoint}, {"label_count", so.label}};
      run->finish("snn label", ck.train.seed, io::config_hash(ck.config, ck.train), p);
    };
  });

  auto* seval = snncmd->add_subcommand("eval", "classification accuracy on the test set");
  seval->add_option("--checkpoint", so.checkpoint)->required()->check(CLI::ExistingFile);
  seval->add_option("--test-count", so.test)->capture_default_str();
  add_data(seval);
  seval->callback([&] {
    action = [&] {
      const auto ck = io::load_checkpoint(so.checkpoint);
      const auto mnist = load_mnist(mnist_dir(so.data));
      const auto data = snn::make_dataset(mnist.test_images, mnist.test_labels, 0, so.test);
      const auto ev = snn::evaluate(ck.network, data, ck.config, ck.train, common.threads);
      run->open("eval.csv") << "n_outputs,test_count,correct,abstained,accuracy\n"
                            << ck.network.n_outputs << ',' << ev.total << ',' << ev.correct << ',' << ev.abstained
                            << ',' << io::format_double(ev.accuracy) << '\n';
      auto confusion = run->open("confusion.csv");
      write_confusion(confusion, ev);
      std::cout << io::format_double(ev.accuracy) << '\n';
      const json p = {{"checkpoint", so.checkpoint}, {"test_count", so.test}};
      run->finish("snn eval", ck.train.seed, io::config_hash(ck.config, ck.train), p);
    };
  });

  auto* ssweep = snncmd->add_subcommand("sweep-n", "accuracy versus number of output neurons");
  ssweep->add_option("--sizes", so.sizes, "comma-separated output-layer sizes")->capture_default_str();
  ssweep->add_option("--seeds", so.seeds, "comma-separated seeds")->capture_default_str();
  ssweep->add_option("--train-count", so.train)->capture_default_str();
  ssweep->add_option("--label-count", so.label)->capture_default_str();
  ssweep->add_option("--test-count", so.test)->capture_default_str();
  ssweep->add_option("--config", so.config, "JSON patch over the default snn/train configuration");
  add_data(ssweep);
  ssweep->callback([&] {
    action = [&] {
      const auto sizes = parse_list(so.sizes);
      const auto seeds = parse_list(so.seeds);
      const auto mnist = load_mnist(mnist_dir(so.data));
      auto f = run->open("sweep_n.csv");
      f << "n_outputs,seed,accuracy,abstained,seconds\n";
      auto summary = run->open("sweep_n_summary.csv");
      summary << "n_outputs,mean_accuracy,std_accuracy,runs\n";
      json hashes = json::array();
      for (auto n : sizes) {
        std::vector<double> acc;
        for (auto seed : seeds) {
          const auto setup = snn_setup(n, seed, so.config);
          hashes.push_back(io::config_hash(setup.cfg, setup.train));
          std::cerr << "N = " << n << ", seed " << seed << '\n';
          const auto r = run_experiment(mnist, setup.cfg, setup.train, {so.train, so.label, so.test, common.threads},
                                        stderr_progress(nullptr));
          acc.push_back(r.evaluation.accuracy);
          f << n << ',' << seed << ',' << io::format_double(r.evaluation.accuracy) << ','
            << r.evaluation.abstained << ',' << io::format_double(r.seconds) << '\n'
            << std::flush;
        }
        double mean = 0.0;
        for (double a : acc) mean += a;
        mean /= static_cast<double>(acc.size());
        double var = 0.0;
        for (double a : acc) var += (a - mean) * (a - mean);
        const double sd = acc.size() > 1 ? std::sqrt(var / static_cast<double>(acc.size() - 1)) : 0.0;
        summary << n << ',' << io::format_double(mean) << ',' << io::format_double(sd) << ',' << acc.size() << '\n';
      }
      const json p = {{"sizes", so.sizes}, {"seeds", so.seeds}, {"train_count", so.train},
                      {"label_count", so.label}, {"test_count", so.test}, {"config", so.config}};
      run->finish("snn sweep-n", seeds.front(), hash_of(hashes), p);
    };
  });

  // replay -----------------------------------------------------------------
  std::string manifest_path;
  std::string replay_out;
  auto* replay = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  replay->add_option("manifest", manifest_path)->required()->check(CLI::ExistingFile);
  replay->add_option("--into", replay_out, "output directory for the replayed run")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (*replay) {
    try {
      const json m = json::parse(io::read_text(manifest_path));
      std::vector<std::string> again = m.at("argv").get<std::vector<std::string>>();
      // Drop any recorded --out and point the run at the new directory.
      for (auto it = again.begin(); it != again.end();) {
        if (*it == "--out" && it + 1 != again.end()) {
          it = again.erase(it, it + 2);
        } else if (it->rfind("--out=", 0) == 0) {
          it = again.erase(it);
        } else {
          ++it;
        }
      }
      again.insert(again.begin(), {"--out", replay_out});
      return run_cli(std::move(again));
    } catch (const std::exception& e) {
      std::cerr << json{{"error", "SchemaMismatch"}, {"message", std::string("unreadable manifest: ") + e.what()}}.dump()
                << '\n';
      return 2;
    }
  }

  run.emplace(common.out, args);
  try {
    action();
  } catch (const Error& e) {
    run->rollback();
    std::cerr << json{{"error", to_string(e.code())}, {"message", e.what()}}.dump() << '\n';
    return 2;
  } catch (const std::exception& e) {
    run->rollback();
    std::cerr << json{{"error", "Io"}, {"message", e.what()}}.dump() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace
