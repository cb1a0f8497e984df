#pragma once

// CSV exchange formats for measurement traces and fit inputs. Every file has
// one header row; column order is free, extra columns are ignored.
//
//   pulse trace   index, v_write_volts, t_write_seconds, r_initial_ohms, r_final_ohms, delta_r_ohms
//                 (v_write_volts, r_initial_ohms, r_final_ohms required)
//   I-V trace     voltage_volts, current_amperes
//   Merz points   width_seconds, v_max_volts
//   capacitance   area_m2, capacitance_farads
//   VDSP samples  v_volts, w_initial, delta_w

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ferrosyn/device_model.hpp"
#include "ferrosyn/fitting.hpp"

namespace ferrosyn::io {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a named column; throws SchemaMismatch naming the column.
  std::size_t column(std::string_view name) const;
};

/// Numeric CSV: every data cell must parse as a finite double (NonFinite with
/// the row number otherwise; ParseError for non-numeric text; SchemaMismatch
/// for ragged rows). Blank lines and lines starting with '#' are skipped.
CsvTable parse_numeric_csv(std::string_view text);

std::string read_text(const std::filesystem::path& path);

enum class TraceSchema { Pulse, Iv };

fit::PulseTrace parse_pulse_trace(std::string_view text);
fit::IvTrace parse_iv_trace(std::string_view text, double area, fit::StateLabel state = fit::StateLabel::Unknown);
std::vector<fit::MerzPoint> parse_merz_points(std::string_view text);
std::vector<fit::CapacitancePoint> parse_capacitance_points(std::string_view text);
std::vector<fit::VdspSample> parse_vdsp_samples(std::string_view text);

fit::PulseTrace load_pulse_trace(const std::filesystem::path& path);
fit::IvTrace load_iv_trace(const std::filesystem::path& path, double area,
                           fit::StateLabel state = fit::StateLabel::Unknown);

/// Loads either trace kind by schema. `area` (m^2) converts I-V currents to
/// densities and is ignored for pulse traces.
std::variant<fit::IvTrace, fit::PulseTrace> load_trace_csv(const std::filesystem::path& path, TraceSchema schema,
                                                           double area = 1.0);

void write_pulse_trace(std::ostream& out, std::span<const device::TracePoint> trace);
void write_pulse_trace(std::ostream& out, const fit::PulseTrace& trace, double width = 20e-9);
void write_iv_trace(std::ostream& out, const fit::IvTrace& trace);
void write_vdsp_samples(std::ostream& out, std::span<const fit::VdspSample> samples);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double x);

}  // namespace ferrosyn::io
