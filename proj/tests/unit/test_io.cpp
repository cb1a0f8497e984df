#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <unistd.h>

#include "ferrosyn/device_model.hpp"
#include "ferrosyn/error.hpp"
#include "ferrosyn/idx.hpp"
#include "ferrosyn/model_card.hpp"
#include "ferrosyn/random.hpp"
#include "ferrosyn/snn.hpp"
#include "ferrosyn/trace_csv.hpp"

using namespace ferrosyn;
using namespace ferrosyn::io;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an exception";
  return ErrorCode::Io;
}

IdxImages small_images(std::size_t n) {
  IdxImages im;
  im.count = n;
  im.rows = 28;
  im.cols = 28;
  im.pixels.resize(n * 784);
  Rng rng(n);
  for (auto& p : im.pixels) p = static_cast<std::uint8_t>(rng.next() & 0xff);
  return im;
}

IdxLabels small_labels(std::size_t n) {
  IdxLabels l;
  l.count = n;
  for (std::size_t i = 0; i < n; ++i) l.labels.push_back(static_cast<std::uint8_t>(i % 10));
  return l;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("ferrosyn_test_" + std::to_string(::getpid()) + "_" + name);
}

std::filesystem::path mnist_dir() {
  if (const char* env = std::getenv("FERROSYN_DATA_DIR")) return env;
  return FERROSYN_MNIST_DIR;
}

}  // namespace

TEST(Idx, RoundTrip) {
  const auto im = small_images(3);
  const auto bytes = serialize_idx(im);
  EXPECT_EQ(bytes.size(), 16u + 3 * 784);
  EXPECT_EQ(bytes[0], 0x00);
  EXPECT_EQ(bytes[2], 0x08);
  EXPECT_EQ(bytes[3], 0x03);
  const auto back = parse_idx_images(bytes);
  EXPECT_EQ(back.count, 3u);
  EXPECT_EQ(back.pixels, im.pixels);
  EXPECT_EQ(serialize_idx(back), bytes);

  const auto lab = small_labels(12);
  const auto lb = serialize_idx(lab);
  EXPECT_EQ(lb[3], 0x01);
  EXPECT_EQ(parse_idx_labels(lb).labels, lab.labels);
}

TEST(Idx, WrongMagic) {
  const auto labels = serialize_idx(small_labels(4));
  EXPECT_EQ(code_of([&] { parse_idx_images(labels); }), ErrorCode::BadMagic);
  const auto images = serialize_idx(small_images(1));
  EXPECT_EQ(code_of([&] { parse_idx_labels(images); }), ErrorCode::BadMagic);
}

TEST(Idx, TruncatedReportsOffset) {
  auto bytes = serialize_idx(small_images(2));
  bytes.resize(bytes.size() - 10);
  try {
    parse_idx_images(bytes);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Truncated);
    EXPECT_NE(std::string(e.what()).find(std::to_string(bytes.size())), std::string::npos) << e.what();
  }
  const std::vector<std::uint8_t> header_only{0, 0, 8};
  EXPECT_EQ(code_of([&] { parse_idx_images(header_only); }), ErrorCode::Truncated);
}

TEST(Idx, DimensionMismatch) {
  auto im = small_images(1);
  im.rows = 14;
  im.cols = 56;
  const auto bytes = serialize_idx(im);
  EXPECT_EQ(code_of([&] { parse_idx_images(bytes); }), ErrorCode::DimensionMismatch);
  EXPECT_NO_THROW(parse_idx_images(bytes, 0, 0));
  EXPECT_EQ(code_of([] { check_paired(small_images(2), small_labels(3)); }), ErrorCode::DimensionMismatch);
}

TEST(Idx, LabelOutOfClassRange) {
  auto lab = small_labels(3);
  lab.labels[1] = 11;
  EXPECT_EQ(code_of([&] { parse_idx_labels(serialize_idx(lab)); }), ErrorCode::ParseError);
}

TEST(Idx, OfficialTrainFile) {
  const auto path = mnist_dir() / "train-images-idx3-ubyte";
  if (!std::filesystem::exists(path)) GTEST_SKIP() << "MNIST not found at " << path;
  const auto im = load_idx_images(path);
  EXPECT_EQ(im.count, 60000u);
  EXPECT_EQ(im.rows, 28u);
  EXPECT_EQ(im.cols, 28u);
  const auto lab = load_idx_labels(mnist_dir() / "train-labels-idx1-ubyte");
  EXPECT_NO_THROW(check_paired(im, lab));
  EXPECT_EQ(lab.labels[0], 5);
}

TEST(Idx, MalformedInputFuzz) {
  const auto images = serialize_idx(small_images(2));
  const auto labels = serialize_idx(small_labels(20));
  Rng rng(4242);
  int structured = 0;
  for (int c = 0; c < 10000; ++c) {
    std::vector<std::uint8_t> bytes = (c % 2 == 0) ? images : labels;
    switch (rng.next() % 4) {
      case 0: bytes.resize(rng.next() % (bytes.size() + 1)); break;
      case 1:
        for (int k = 0; k < 4; ++k) bytes[rng.next() % 16] ^= static_cast<std::uint8_t>(1u << (rng.next() % 8));
        break;
      case 2:
        bytes.resize(rng.next() % 64);
        for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.next());
        break;
      default:
        for (int k = 0; k < 3; ++k) bytes[rng.next() % bytes.size()] = static_cast<std::uint8_t>(rng.next());
        break;
    }
    try {
      if (rng.next() % 2) {
        parse_idx_images(bytes, 0, 0);
      } else {
        parse_idx_labels(bytes);
      }
    } catch (const Error&) {
      ++structured;
    }
  }
  EXPECT_GT(structured, 5000);
}

TEST(Csv, PulseTraceRoundTrip) {
  const auto pts = device::simulate_random_pulses(device::table1_rule(), 300, -3.0, 3.0, 7);
  std::ostringstream out;
  write_pulse_trace(out, pts);
  const auto trace = parse_pulse_trace(out.str());
  ASSERT_EQ(trace.records.size(), 300u);
  EXPECT_EQ(trace, fit::to_pulse_trace(pts));

  std::ostringstream again;
  write_pulse_trace(again, trace);
  EXPECT_EQ(again.str(), out.str());
}

TEST(Csv, LoadTraceBySchema) {
  const auto path = temp_path("pulse.csv");
  {
    std::ofstream f(path);
    write_pulse_trace(f, device::simulate_random_pulses(device::table1_rule(), 300, -3.0, 3.0, 1));
  }
  const auto loaded = load_trace_csv(path, TraceSchema::Pulse);
  ASSERT_TRUE(std::holds_alternative<fit::PulseTrace>(loaded));
  EXPECT_EQ(std::get<fit::PulseTrace>(loaded).records.size(), 300u);
  EXPECT_EQ(code_of([&] { load_trace_csv(path, TraceSchema::Iv, 1e-12); }), ErrorCode::SchemaMismatch);
  std::filesystem::remove(path);

  const auto iv_path = temp_path("iv.csv");
  {
    std::ofstream f(iv_path);
    f << "voltage_volts,current_amperes\n0.1,1e-9\n0.2,4e-9\n";
  }
  const auto iv = std::get<fit::IvTrace>(load_trace_csv(iv_path, TraceSchema::Iv, 24e-12));
  EXPECT_EQ(iv.points.size(), 2u);
  EXPECT_EQ(iv.area, 24e-12);
  std::filesystem::remove(iv_path);
  EXPECT_EQ(code_of([] { load_trace_csv("/nonexistent/trace.csv", TraceSchema::Pulse); }), ErrorCode::Io);
}

TEST(Csv, IvRoundTrip) {
  fit::IvTrace t;
  t.area = 24e-12;
  for (int i = 0; i < 10; ++i) t.points.push_back({-1.0 + 0.2 * i, 1e-9 * (i - 5) * 0.1234567890123});
  std::ostringstream out;
  write_iv_trace(out, t);
  const auto back = parse_iv_trace(out.str(), t.area);
  ASSERT_EQ(back.points.size(), t.points.size());
  for (std::size_t i = 0; i < t.points.size(); ++i) {
    EXPECT_EQ(back.points[i].voltage, t.points[i].voltage);
    EXPECT_EQ(back.points[i].current, t.points[i].current);
  }
}

TEST(Csv, VdspSamplesRoundTrip) {
  std::vector<fit::VdspSample> s{{-0.45, 0.5, 0.3104472413420782}, {1.0, 0.25, -1e-5}};
  std::ostringstream out;
  write_vdsp_samples(out, s);
  const auto back = parse_vdsp_samples(out.str());
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].dw, s[0].dw);
  EXPECT_EQ(back[1].w, s[1].w);
}

TEST(Csv, SchemaErrors) {
  EXPECT_EQ(code_of([] { parse_pulse_trace("index,v_write_volts,r_final_ohms\n0,1,2e9\n"); }),
            ErrorCode::SchemaMismatch);
  try {
    parse_pulse_trace("index,v_write_volts,r_final_ohms\n0,1,2e9\n");
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("r_initial_ohms"), std::string::npos);
  }
  EXPECT_EQ(code_of([] { parse_numeric_csv("a,b\n1,2\n3\n"); }), ErrorCode::SchemaMismatch);
  EXPECT_EQ(code_of([] { parse_numeric_csv(""); }), ErrorCode::SchemaMismatch);
  EXPECT_EQ(code_of([] { parse_numeric_csv("a,b\n1,x\n"); }), ErrorCode::ParseError);
}

TEST(Csv, NonFiniteNamesRow) {
  try {
    parse_numeric_csv("a,b\n1,2\n3,4\n5,inf\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFinite);
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos) << e.what();
  }
  EXPECT_EQ(code_of([] { parse_numeric_csv("a\nnan\n"); }), ErrorCode::NonFinite);
  EXPECT_EQ(code_of([] { parse_numeric_csv("a\n1e999\n"); }), ErrorCode::NonFinite);
}

TEST(Csv, CommentsBlankLinesAndCrlf) {
  const auto t = parse_numeric_csv("# note\r\na, b\r\n\r\n1, 2\r\n");
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.column("b"), 1u);
  EXPECT_EQ(t.rows[0][1], 2.0);
}

TEST(Csv, MalformedInputFuzz) {
  std::ostringstream out;
  write_pulse_trace(out, device::simulate_random_pulses(device::table1_rule(), 8, -3.0, 3.0, 2));
  const std::string good = out.str();
  const std::string alphabet = "0123456789.,-+eE\n\r #abcinfINFNaN\t";
  Rng rng(777);
  for (int c = 0; c < 10000; ++c) {
    std::string text = good;
    const int edits = 1 + static_cast<int>(rng.next() % 6);
    for (int k = 0; k < edits; ++k) {
      const std::size_t pos = rng.next() % (text.size() + 1);
      switch (rng.next() % 3) {
        case 0: text.insert(pos, 1, alphabet[rng.next() % alphabet.size()]); break;
        case 1: if (pos < text.size()) text.erase(pos, 1); break;
        default: if (pos < text.size()) text[pos] = static_cast<char>(rng.next() & 0x7f); break;
      }
    }
    if (rng.next() % 5 == 0) text.resize(rng.next() % (text.size() + 1));
    try {
      parse_pulse_trace(text);
    } catch (const Error&) {
    }
  }
  SUCCEED();
}

TEST(ModelCard, DefaultRoundTrip) {
  const auto card = default_model_card();
  const auto text = dump_model_card(card);
  const auto back = parse_model_card(text);
  EXPECT_EQ(back, card);
  EXPECT_EQ(dump_model_card(back), text);
  EXPECT_EQ(back.device, card.device);
  EXPECT_EQ(back.vdsp, card.vdsp);
  EXPECT_EQ(back.scaling, card.scaling);
  EXPECT_EQ(back.conduction->schottky.phi_b, card.conduction->schottky.phi_b);
}

TEST(ModelCard, PartialCardsAndFileRoundTrip) {
  ModelCard card;
  card.merz = physics::MerzParams{9.56e-12, 5.845e9};
  const auto path = temp_path("card.json");
  save_model_card(path, card);
  const auto back = load_model_card(path);
  EXPECT_FALSE(back.device.has_value());
  EXPECT_EQ(back.merz->e_act, 5.845e9);
  std::filesystem::remove(path);
}

TEST(ModelCard, DeviceKeys) {
  const auto j = to_json(default_model_card());
  for (const char* branch : {"upper", "lower"}) {
    for (const char* key : {"r_min", "r_max", "v0", "v_off"}) EXPECT_TRUE(j["device"][branch].contains(key));
  }
  EXPECT_EQ(j["device"]["validity_range_volts"].get<double>(), 3.75);
}

TEST(ModelCard, Errors) {
  EXPECT_EQ(code_of([] { parse_model_card("{"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_model_card("{}"); }), ErrorCode::SchemaMismatch);
  EXPECT_EQ(code_of([] { parse_model_card(R"({"schema_version": 99})"); }), ErrorCode::SchemaMismatch);
  EXPECT_EQ(code_of([] { parse_model_card(R"({"schema_version": 1, "extra": 1})"); }), ErrorCode::SchemaMismatch);
  EXPECT_EQ(code_of([] { parse_model_card(R"({"schema_version": 1, "merz": {"t_inf": "x", "e_act": 1}})"); }),
            ErrorCode::SchemaMismatch);
  EXPECT_EQ(code_of([] { parse_model_card(R"({"schema_version": 1, "scaling": {"sf_p": 1}})"); }),
            ErrorCode::SchemaMismatch);
}

TEST(ModelCard, FuzzedTextGivesStructuredErrors) {
  const std::string good = dump_model_card(default_model_card());
  Rng rng(31);
  for (int c = 0; c < 2000; ++c) {
    std::string text = good;
    for (int k = 0; k < 3; ++k) {
      const std::size_t pos = rng.next() % text.size();
      text[pos] = "{}[]:,\"0123456789.eE-x "[rng.next() % 23];
    }
    try {
      parse_model_card(text);
    } catch (const Error&) {
    }
  }
  SUCCEED();
}

TEST(Checkpoint, RoundTripAndHashCheck) {
  snn::SnnConfig cfg;
  cfg.n_outputs = 3;
  const auto train = snn::TrainConfig::for_network_size(3);
  Checkpoint ck{cfg, train, snn::make_network(cfg, 5)};
  ck.network.labels = {2, snn::kUnassigned, 7};
  ck.network.theta = {0.1, 0.0, 0.3};
  const auto text = dump_checkpoint(ck);
  const auto back = parse_checkpoint(text);
  EXPECT_EQ(back.network, ck.network);
  EXPECT_EQ(config_hash(back.config, back.train), config_hash(cfg, train));
  EXPECT_EQ(dump_checkpoint(back), text);

  auto j = nlohmann::json::parse(text);
  j["snn"]["synaptic_gain"] = 0.5;
  EXPECT_EQ(code_of([&] { parse_checkpoint(j.dump()); }), ErrorCode::SchemaMismatch);

  j = nlohmann::json::parse(text);
  j["network"]["weights"].erase(0);
  EXPECT_EQ(code_of([&] { parse_checkpoint(j.dump()); }), ErrorCode::DimensionMismatch);

  j = nlohmann::json::parse(text);
  j["network"]["weights"][0] = 1.5;
  EXPECT_EQ(code_of([&] { parse_checkpoint(j.dump()); }), ErrorCode::OutOfRange);
}

TEST(ConfigHash, SensitiveToEveryField) {
  snn::SnnConfig cfg;
  snn::TrainConfig t;
  const auto base = config_hash(cfg, t);
  t.seed = 2;
  EXPECT_NE(config_hash(cfg, t), base);
  t.seed = 1;
  cfg.input.tau_mem = 0.2;
  EXPECT_NE(config_hash(cfg, t), base);
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(ResultTables, MetricsAndReceptiveFields) {
  std::ostringstream m;
  write_metrics_header(m);
  write_metrics_row(m, {1000, 0.5, 0.25});
  EXPECT_EQ(m.str(), "image_index,running_accuracy,mean_weight\n1000,0.5,0.25\n");

  snn::SnnConfig cfg;
  cfg.n_outputs = 2;
  const auto net = snn::make_network(cfg, 1);
  std::ostringstream csv;
  write_receptive_fields_csv(csv, net);
  const auto table = parse_numeric_csv(csv.str());
  EXPECT_EQ(table.rows.size(), 56u);
  EXPECT_EQ(table.rows[29][0], 1.0);
  EXPECT_EQ(table.rows[29][2 + 3], net.weight(28 + 3, 1));

  std::ostringstream pgm;
  write_receptive_fields_pgm(pgm, net);
  const std::string header = "P5\n56 28\n255\n";
  EXPECT_EQ(pgm.str().substr(0, header.size()), header);
  EXPECT_EQ(pgm.str().size(), header.size() + 56 * 28);
}
