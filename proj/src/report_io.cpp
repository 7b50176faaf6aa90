#include "ricciwarp/report_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ricciwarp/error.hpp"

namespace ricciwarp {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

std::string quote_json(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) out += fmt::format("\\u{:04x}", c);
        else out += c;
    }
  }
  return out + "\"";
}

void JsonWriter::prefix(const std::string& key) {
  if (!first_.empty()) {
    out_ += first_.back() ? "\n" : ",\n";
    first_.back() = false;
  }
  out_.append(2 * first_.size(), ' ');
  if (!key.empty()) out_ += quote_json(key) + ": ";
}

JsonWriter& JsonWriter::begin_object(const std::string& key) {
  prefix(key);
  out_ += "{";
  first_.push_back(true);
  return *this;
}

void JsonWriter::close(char c) {
  const bool empty = first_.back();
  first_.pop_back();
  if (!empty) out_ += "\n" + std::string(2 * first_.size(), ' ');
  out_ += c;
}

JsonWriter& JsonWriter::end_object() {
  close('}');
  return *this;
}

JsonWriter& JsonWriter::begin_array(const std::string& key) {
  prefix(key);
  out_ += "[";
  first_.push_back(true);
  return *this;
}

JsonWriter& JsonWriter::end_array() {
  close(']');
  return *this;
}

JsonWriter& JsonWriter::number(const std::string& key, double v) {
  prefix(key);
  out_ += std::isfinite(v) ? format_number(v) : "null";
  return *this;
}

JsonWriter& JsonWriter::integer(const std::string& key, long long v) {
  prefix(key);
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::boolean(const std::string& key, bool v) {
  prefix(key);
  out_ += v ? "true" : "false";
  return *this;
}

JsonWriter& JsonWriter::string(const std::string& key, const std::string& v) {
  prefix(key);
  out_ += quote_json(v);
  return *this;
}

JsonWriter& JsonWriter::numbers(const std::string& key, const std::vector<double>& v) {
  prefix(key);
  out_ += "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out_ += ", ";
    out_ += std::isfinite(v[i]) ? format_number(v[i]) : "null";
  }
  out_ += "]";
  return *this;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + tmp.string());
    out << content;
    if (!out) throw Error(ErrorCode::ConfigError, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string validation_json(const PrescribedTensor& T, const ValidationReport& report) {
  JsonWriter w;
  w.begin_object().string("tensor", T.name()).integer("d1", T.d1()).integer("d2", T.d2());
  w.number("alpha", T.alpha()).number("beta", T.beta()).boolean("pass", report.pass);
  const auto* f = report.first_failure();
  w.string("first_failure", f ? f->name : "");
  w.begin_array("conditions");
  for (const auto& c : report.conditions)
    w.begin_object().string("name", c.name).boolean("pass", c.pass).numbers("values", c.values).end_object();
  w.end_array().end_object();
  return w.str();
}

std::string solution_json(const ScalingSolution& sol, const PrescribedTensor& T) {
  JsonWriter w;
  w.begin_object().string("method", sol.method).string("tensor", T.name());
  w.integer("d1", T.d1()).integer("d2", T.d2());
  w.number("c1", sol.c1).number("c2", sol.c2).number("gamma", sol.gamma);
  w.number("a", sol.a).number("S", sol.S).number("c1_lower", sol.c1_lower);
  const auto& r = sol.residuals;
  w.begin_object("residuals");
  w.number("sup_r0", r.sup_r0).number("sup_r1", r.sup_r1).number("sup_r2", r.sup_r2);
  w.number("sigma_max_dev", r.sigma_max_dev).number("grid_spacing", r.grid_spacing);
  w.integer("grid_points", static_cast<long long>(r.grid_n));
  if (!r.t.empty()) w.number("window_lo", r.t.front()).number("window_hi", r.t.back());
  w.boolean("pass", sol.residuals_pass).end_object();
  const auto& inv = sol.invariants;
  w.begin_object("invariants");
  w.number("max_dy1", inv.max_dy1).number("max_dy2", inv.max_dy2);
  w.number("max_trace", inv.max_trace).number("max_by1d", inv.max_by1d);
  w.boolean("pass", inv.pass).end_object();
  w.boolean("regularity_pass", sol.regularity.pass);
  w.integer("continuation_steps", static_cast<long long>(sol.continuation.size()));
  w.boolean("pass", sol.pass()).end_object();
  return w.str();
}

std::string regularity_json(const RegularityReport& reg) {
  JsonWriter w;
  w.begin_object();
  for (const auto& c : reg.conditions)
    w.begin_object(c.name).number("value", c.value).boolean("pass", c.pass).end_object();
  const auto& e = reg.endpoint;
  w.begin_object("endpoint");
  w.number("f1", e.f1).number("f1p", e.f1p).number("f1pp", e.f1pp);
  w.number("h", e.h).number("hp", e.hp).number("h_extrap", e.h_extrap);
  w.number("f2", e.f2).number("f2p", e.f2p).end_object();
  w.number("h_discrepancy", reg.h_discrepancy).number("z1_probe", reg.z1_probe);
  w.begin_array("z1_tail");
  for (const auto& s : reg.z1_tail) w.numbers("", {s.t, s.z1});
  w.end_array();
  w.boolean("pass", reg.pass).end_object();
  return w.str();
}

std::string profile_csv(const MetricProfile& m) {
  std::string out = "t,h,f1,f2\n";
  for (std::size_t i = 0; i < m.size(); ++i)
    out += format_number(m.t[i]) + "," + format_number(m.h[i]) + "," + format_number(m.f1[i]) +
           "," + format_number(m.f2[i]) + "\n";
  return out;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "t,y1,dy1,y2,dy2,h\n";
  for (const auto& r : traj.records)
    out += format_number(r.t) + "," + format_number(r.y1) + "," + format_number(r.dy1) + "," +
           format_number(r.y2) + "," + format_number(r.dy2) + "," + format_number(r.h) + "\n";
  return out;
}

std::string continuation_csv(const std::vector<ContinuationRecord>& log) {
  std::string out = "c1,c2,gamma,end_t,res_bc,res_sup,z1_end\n";
  for (const auto& r : log)
    out += format_number(r.c1) + "," + format_number(r.c2) + "," + format_number(r.gamma) + "," +
           format_number(r.end_t) + "," + format_number(r.res_bc) + "," +
           format_number(r.res_sup) + "," + format_number(r.z1_end) + "\n";
  return out;
}

namespace {

std::string polyline_panel(const std::string& title, const std::vector<double>& x,
                           const std::vector<double>& y, double ox, double oy) {
  constexpr double W = 380.0, H = 220.0, pad = 30.0;
  double lo = *std::min_element(y.begin(), y.end());
  double hi = *std::max_element(y.begin(), y.end());
  if (hi - lo < 1e-12 * std::max(1.0, std::fabs(hi))) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double x0 = x.front(), x1 = x.back();
  std::string pts;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double px = ox + pad + (x[i] - x0) / (x1 - x0) * (W - 2 * pad);
    const double py = oy + H - pad - (y[i] - lo) / (hi - lo) * (H - 2 * pad);
    pts += fmt::format("{:.2f},{:.2f} ", px, py);
  }
  std::string s;
  s += fmt::format(R"(<rect x="{:.0f}" y="{:.0f}" width="{:.0f}" height="{:.0f}" fill="none" stroke="#999"/>)",
                   ox + pad, oy + pad, W - 2 * pad, H - 2 * pad);
  s += "\n";
  s += fmt::format(R"(<text x="{:.0f}" y="{:.0f}" font-size="13">{}</text>)", ox + pad, oy + 20, title);
  s += "\n";
  s += fmt::format(R"(<text x="{:.0f}" y="{:.0f}" font-size="10">{:.4g}</text>)", ox + 2, oy + pad + 4, hi);
  s += "\n";
  s += fmt::format(R"(<text x="{:.0f}" y="{:.0f}" font-size="10">{:.4g}</text>)", ox + 2, oy + H - pad, lo);
  s += "\n";
  s += fmt::format(R"(<text x="{:.0f}" y="{:.0f}" font-size="10">t = {:.3g} .. {:.3g}</text>)", ox + pad,
                   oy + H - 8, x0, x1);
  s += "\n";
  s += R"(<polyline fill="none" stroke="#1f5fa8" stroke-width="1.2" points=")" + pts + "\"/>\n";
  return s;
}

}  // namespace

std::string profile_svg(const ScalingSolution& sol) {
  const auto& m = sol.profile;
  std::vector<double> zt, z;
  for (const auto& r : sol.trajectory.records) {
    zt.push_back(r.t);
    z.push_back(-(1.0 - r.t) * r.dy1);
  }
  std::string s =
      R"(<svg xmlns="http://www.w3.org/2000/svg" width="760" height="440" font-family="sans-serif">)";
  s += "\n";
  s += polyline_panel("h", m.t, m.h, 0, 0);
  s += polyline_panel("f1", m.t, m.f1, 380, 0);
  s += polyline_panel("f2", m.t, m.f2, 0, 220);
  if (zt.size() >= 2) s += polyline_panel("z1 = -(1-t) y1'", zt, z, 380, 220);
  s += "</svg>\n";
  return s;
}

MetricProfile read_profile_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "t,h,f1,f2") throw Error(ErrorCode::ConfigError, "unexpected profile header");
  MetricProfile m;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() != 4) throw Error(ErrorCode::ConfigError, "malformed profile row: " + line);
    m.t.push_back(v[0]);
    m.h.push_back(v[1]);
    m.f1.push_back(v[2]);
    m.f2.push_back(v[3]);
  }
  return m;
}

}  // namespace ricciwarp
