#include "ferrosyn/trace_csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "ferrosyn/error.hpp"

namespace ferrosyn::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

double parse_cell(std::string_view cell, std::size_t row, std::string_view column) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  const std::string where = " at row " + std::to_string(row) + ", column '" + std::string(column) + "'";
  if (ec == std::errc::result_out_of_range) throw Error(ErrorCode::NonFinite, "value out of range" + where);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || cell.empty()) {
    // from_chars accepts "inf"/"nan" spellings; anything else is malformed text.
    throw Error(ErrorCode::ParseError, "cannot parse '" + std::string(cell.substr(0, 32)) + "'" + where);
  }
  if (!std::isfinite(value)) throw Error(ErrorCode::NonFinite, "non-finite value" + where);
  return value;
}

template <class F>
void require(bool ok, ErrorCode code, F&& message) {
  if (!ok) throw Error(code, message());
}

}  // namespace

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw Error(ErrorCode::SchemaMismatch, "missing column '" + std::string(name) + "'");
}

CsvTable parse_numeric_csv(std::string_view text) {
  CsvTable table;
  bool have_header = false;
  std::size_t line_no = 0;
  std::size_t row_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto cells = split(line);
    if (!have_header) {
      for (const auto c : cells) {
        require(!c.empty(), ErrorCode::SchemaMismatch, [&] { return std::string("empty column name in header"); });
        table.header.emplace_back(c);
      }
      have_header = true;
      continue;
    }
    ++row_no;
    require(cells.size() == table.header.size(), ErrorCode::SchemaMismatch, [&] {
      return "row " + std::to_string(row_no) + " has " + std::to_string(cells.size()) + " cells, header has " +
             std::to_string(table.header.size());
    });
    std::vector<double> row(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) row[i] = parse_cell(cells[i], row_no, table.header[i]);
    table.rows.push_back(std::move(row));
  }
  require(have_header, ErrorCode::SchemaMismatch, [] { return std::string("no header row"); });
  return table;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fit::PulseTrace parse_pulse_trace(std::string_view text) {
  const CsvTable t = parse_numeric_csv(text);
  const auto cv = t.column("v_write_volts");
  const auto ci = t.column("r_initial_ohms");
  const auto cf = t.column("r_final_ohms");
  fit::PulseTrace trace;
  trace.records.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    require(row[ci] > 0.0 && row[cf] > 0.0, ErrorCode::OutOfRange,
            [&] { return "non-positive resistance at row " + std::to_string(r + 1); });
    trace.records.push_back({row[cv], row[ci], row[cf]});
  }
  return trace;
}

fit::IvTrace parse_iv_trace(std::string_view text, double area, fit::StateLabel state) {
  const CsvTable t = parse_numeric_csv(text);
  const auto cv = t.column("voltage_volts");
  const auto ci = t.column("current_amperes");
  fit::IvTrace trace;
  trace.area = area;
  trace.state = state;
  for (const auto& row : t.rows) trace.points.push_back({row[cv], row[ci]});
  return trace;
}

std::vector<fit::MerzPoint> parse_merz_points(std::string_view text) {
  const CsvTable t = parse_numeric_csv(text);
  const auto cw = t.column("width_seconds");
  const auto cv = t.column("v_max_volts");
  std::vector<fit::MerzPoint> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    require(row[cw] > 0.0, ErrorCode::OutOfRange, [&] { return "non-positive width at row " + std::to_string(r + 1); });
    out.push_back({row[cw], row[cv]});
  }
  return out;
}

std::vector<fit::CapacitancePoint> parse_capacitance_points(std::string_view text) {
  const CsvTable t = parse_numeric_csv(text);
  const auto ca = t.column("area_m2");
  const auto cc = t.column("capacitance_farads");
  std::vector<fit::CapacitancePoint> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    require(row[ca] > 0.0 && row[cc] > 0.0, ErrorCode::OutOfRange,
            [&] { return "non-positive area or capacitance at row " + std::to_string(r + 1); });
    out.push_back({row[ca], row[cc]});
  }
  return out;
}

std::vector<fit::VdspSample> parse_vdsp_samples(std::string_view text) {
  const CsvTable t = parse_numeric_csv(text);
  const auto cv = t.column("v_volts");
  const auto cw = t.column("w_initial");
  const auto cd = t.column("delta_w");
  std::vector<fit::VdspSample> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    require(row[cw] >= 0.0 && row[cw] <= 1.0, ErrorCode::OutOfRange,
            [&] { return "w_initial outside [0, 1] at row " + std::to_string(r + 1); });
    out.push_back({row[cv], row[cw], row[cd]});
  }
  return out;
}

fit::PulseTrace load_pulse_trace(const std::filesystem::path& path) { return parse_pulse_trace(read_text(path)); }

fit::IvTrace load_iv_trace(const std::filesystem::path& path, double area, fit::StateLabel state) {
  return parse_iv_trace(read_text(path), area, state);
}

std::variant<fit::IvTrace, fit::PulseTrace> load_trace_csv(const std::filesystem::path& path, TraceSchema schema,
                                                           double area) {
  if (schema == TraceSchema::Pulse) return load_pulse_trace(path);
  return load_iv_trace(path, area);
}

std::string format_double(double x) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

void write_pulse_trace(std::ostream& out, std::span<const device::TracePoint> trace) {
  out << "index,v_write_volts,t_write_seconds,r_initial_ohms,r_final_ohms,delta_r_ohms\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& p = trace[i];
    out << i << ',' << format_double(p.pulse.amplitude) << ',' << format_double(p.pulse.width) << ','
        << format_double(p.r_initial) << ',' << format_double(p.r_final) << ',' << format_double(p.delta_r())
        << '\n';
  }
}

void write_pulse_trace(std::ostream& out, const fit::PulseTrace& trace, double width) {
  std::vector<device::TracePoint> points;
  points.reserve(trace.records.size());
  for (const auto& r : trace.records) points.push_back({{r.v_write, width}, r.r_initial, r.r_final});
  write_pulse_trace(out, points);
}

void write_iv_trace(std::ostream& out, const fit::IvTrace& trace) {
  out << "voltage_volts,current_amperes\n";
  for (const auto& p : trace.points) out << format_double(p.voltage) << ',' << format_double(p.current) << '\n';
}

void write_vdsp_samples(std::ostream& out, std::span<const fit::VdspSample> samples) {
  out << "v_volts,w_initial,delta_w\n";
  for (const auto& s : samples) {
    out << format_double(s.v) << ',' << format_double(s.w) << ',' << format_double(s.dw) << '\n';
  }
}

}  // namespace ferrosyn::io
