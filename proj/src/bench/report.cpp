#include "p2gm/bench.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace p2gm::bench {

namespace fs = std::filesystem;

namespace {

const char* const kCsvHeader = "algo,iter,time_sec,objective,residual,stepsize";

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << content;
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) parts.push_back(cur);
  return parts;
}

fs::path csv_name(const std::string& algo) { return "trace_" + algo + ".csv"; }

std::vector<fs::path> write_plots(const fs::path& dir, const std::string& family,
                                  const std::vector<std::pair<Trace, std::vector<double>>>& runs) {
  std::vector<Series> by_iter;
  std::vector<Series> by_time;
  for (const auto& [trace, gaps] : runs) {
    Series si{trace.algo, {}, gaps};
    Series st{trace.algo, {}, gaps};
    for (const auto& r : trace.rows) {
      si.x.push_back(r.iter);
      st.x.push_back(r.wall_seconds);
    }
    by_iter.push_back(std::move(si));
    by_time.push_back(std::move(st));
  }
  const fs::path p_iter = dir / "gap_vs_iteration.svg";
  const fs::path p_time = dir / "gap_vs_time.svg";
  write_file(p_iter, svg_log_plot(family + ": objective gap vs iteration", "iteration", "F(x) - F*", by_iter));
  write_file(p_time, svg_log_plot(family + ": objective gap vs time", "seconds", "F(x) - F*", by_time));
  return {p_iter, p_time};
}

}  // namespace

std::string trace_csv(const Trace& trace) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : trace.rows) {
    out += trace.algo + ',' + std::to_string(r.iter) + ',' + fmt(r.wall_seconds) + ',' + fmt(r.objective) + ',' +
           fmt(r.residual) + ',' + fmt(r.stepsize) + '\n';
  }
  return out;
}

Trace parse_trace_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw std::runtime_error("trace CSV: unexpected header");
  Trace trace;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 6) throw std::runtime_error("trace CSV: expected 6 fields in '" + line + "'");
    if (trace.algo.empty()) trace.algo = f[0];
    trace.rows.push_back({std::stoi(f[1]), std::stod(f[3]), std::stod(f[4]), std::stod(f[5]), std::stod(f[2])});
  }
  return trace;
}

std::string svg_log_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                         const std::vector<Series>& series) {
  static const char* const palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  const double width = 760, height = 480, left = 80, right = 170, top = 40, bottom = 60;
  const double pw = width - left - right;
  const double ph = height - top - bottom;

  double xmax = 0.0;
  double ymin = kInfinity;
  double ymax = -kInfinity;
  for (const auto& s : series) {
    for (double x : s.x) xmax = std::max(xmax, x);
    for (double y : s.y) {
      if (y > 0 && std::isfinite(y)) {
        ymin = std::min(ymin, std::log10(y));
        ymax = std::max(ymax, std::log10(y));
      }
    }
  }
  if (!(xmax > 0)) xmax = 1.0;
  if (!std::isfinite(ymin)) {
    ymin = -16;
    ymax = 0;
  }
  ymin = std::floor(ymin);
  ymax = std::max(std::ceil(ymax), ymin + 1);

  auto px = [&](double x) { return left + pw * x / xmax; };
  auto py = [&](double ly) { return top + ph * (ymax - ly) / (ymax - ymin); };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
     << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n"
     << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
     << "font-size=\"15\">" << xml_escape(title) << "</text>\n";

  const int ystep = std::max(1, static_cast<int>(std::ceil((ymax - ymin) / 10.0)));
  for (int e = static_cast<int>(ymin); e <= static_cast<int>(ymax); e += ystep) {
    const double y = py(e);
    os << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << left + pw << "\" y2=\"" << y
       << "\" stroke=\"#dddddd\"/>\n"
       << "<text x=\"" << left - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
       << "font-size=\"11\">1e" << e << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double xv = xmax * i / 5.0;
    const double x = px(xv);
    os << "<line x1=\"" << x << "\" y1=\"" << top << "\" x2=\"" << x << "\" y2=\"" << top + ph
       << "\" stroke=\"#eeeeee\"/>\n"
       << "<text x=\"" << x << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       << "font-size=\"11\">" << (xmax >= 10 ? std::to_string(static_cast<long>(std::lround(xv))) : fmt_short(xv))
       << "</text>\n";
  }
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n"
     << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 18 << "\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"13\">" << xml_escape(x_label) << "</text>\n"
     << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
     << "font-size=\"13\" transform=\"rotate(-90 18 " << top + ph / 2 << ")\">" << xml_escape(y_label)
     << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = palette[k % (sizeof palette / sizeof *palette)];
    const std::size_t n = std::min(s.x.size(), s.y.size());
    const std::size_t stride = std::max<std::size_t>(1, n / 2000);
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < n; i += stride) {
      const double y = s.y[i] > 0 ? std::log10(s.y[i]) : ymin;
      os << px(s.x[i]) << ',' << py(std::clamp(y, ymin, ymax)) << ' ';
    }
    if (n > 0 && (n - 1) % stride != 0) {
      const double y = s.y[n - 1] > 0 ? std::log10(s.y[n - 1]) : ymin;
      os << px(s.x[n - 1]) << ',' << py(std::clamp(y, ymin, ymax));
    }
    os << "\"/>\n";
    const double ly = top + 16 + 20.0 * static_cast<double>(k);
    os << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 36 << "\" y2=\"" << ly
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
       << "<text x=\"" << left + pw + 42 << "\" y=\"" << ly + 4 << "\" font-family=\"sans-serif\" font-size=\"12\">"
       << xml_escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void emit_report(const ExperimentResult& result, const fs::path& out_dir) {
  if (result.outcomes.empty()) throw std::invalid_argument("emit_report: no outcomes");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());

  nlohmann::json summary;
  summary["manifest"] = nlohmann::json::parse(result.manifest.to_json());
  summary["reference_value"] = result.reference_value;
  summary["reference_run_value"] = result.reference_run_value;
  summary["reference_iterations"] = result.reference_iterations;
  summary["algos"] = nlohmann::json::array();

  std::vector<std::pair<Trace, std::vector<double>>> runs;
  for (const auto& o : result.outcomes) {
    nlohmann::json a;
    a["algo"] = algo_name(o.algo);
    a["status"] = o.status;
    if (!o.skipped()) {
      write_file(out_dir / csv_name(algo_name(o.algo)), trace_csv(o.trace));
      a["iterations"] = o.trace.iterations();
      a["final_gap"] = o.final_gap;
      a["wall_seconds"] = o.wall_seconds;
      a["iterations_to_target"] = o.iterations_to_target ? nlohmann::json(*o.iterations_to_target) : nlohmann::json();
      a["restarts"] = o.restarts;
      if (o.audit) {
        a["descent_audit"] = {{"iterations", o.audit->iterations},
                              {"con1_violations", o.audit->con1_violations},
                              {"con2_violations", o.audit->con2_violations},
                              {"monotonicity_violations", o.audit->monotonicity_violations}};
      }
      runs.emplace_back(o.trace, o.gaps);
    }
    summary["algos"].push_back(std::move(a));
  }
  write_file(out_dir / "summary.json", summary.dump(2) + "\n");
  write_plots(out_dir, family_name(result.manifest.family), runs);
}

std::vector<fs::path> plot_directory(const fs::path& dir) {
  const nlohmann::json summary = nlohmann::json::parse(read_file(dir / "summary.json"));
  const double reference = summary.at("reference_value").get<double>();
  const std::string family = summary.at("manifest").at("family").get<std::string>();
  std::vector<std::pair<Trace, std::vector<double>>> runs;
  for (const auto& a : summary.at("algos")) {
    const std::string status = a.at("status").get<std::string>();
    if (status.rfind("skipped", 0) == 0) continue;
    Trace trace = parse_trace_csv(read_file(dir / csv_name(a.at("algo").get<std::string>())));
    std::vector<double> gaps = gap_series(trace, reference);
    runs.emplace_back(std::move(trace), std::move(gaps));
  }
  return write_plots(dir, family, runs);
}

}  // namespace p2gm::bench
