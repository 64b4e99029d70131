#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "qpl/error.hpp"
#include "qpl/harness.hpp"

namespace qpl {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kTop = 40, kPlotW = 430, kPlotH = 320;

std::string num(double v, const char* fmt = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string color_for(const std::string& method) {
  static const std::map<std::string, std::string> colors{
      {"greedy", "#1f77b4"},      {"pessimistic", "#d62728"},    {"solution_set", "#2ca02c"},
      {"alternating", "#9467bd"}, {"nc_regularized", "#ff7f0e"},
  };
  const auto it = colors.find(method);
  return it == colors.end() ? "#7f7f7f" : it->second;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string svg_file_name(double alpha, double p) {
  return "regret_alpha" + num(alpha, "%g") + "_p" + num(p, "%g") + ".svg";
}

std::string render_svg(const std::vector<CurveRow>& input, double alpha, double p) {
  if (input.empty()) throw ConfigError("no rows to plot");
  std::vector<CurveRow> rows;
  for (const auto& r : input)
    if (std::isfinite(r.mean_regret) && std::isfinite(r.std_regret)) rows.push_back(r);
  std::stable_sort(rows.begin(), rows.end(),
                   [](const CurveRow& a, const CurveRow& b) { return std::tie(a.method, a.n) < std::tie(b.method, b.n); });

  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (!rows.empty()) {
    xmin = xmax = static_cast<double>(rows.front().n);
    ymin = std::min(0.0, rows.front().mean_regret - rows.front().std_regret);
    ymax = rows.front().mean_regret + rows.front().std_regret;
    for (const auto& r : rows) {
      xmin = std::min(xmin, static_cast<double>(r.n));
      xmax = std::max(xmax, static_cast<double>(r.n));
      ymin = std::min(ymin, r.mean_regret - r.std_regret);
      ymax = std::max(ymax, r.mean_regret + r.std_regret);
    }
  }
  if (xmax == xmin) {
    const double span = std::max(1.0, 0.1 * xmin);
    xmin -= span;
    xmax += span;
  }
  const double ypad = ymax > ymin ? 0.05 * (ymax - ymin) : std::max(1e-3, 0.05 * std::abs(ymax));
  ymin -= ypad;
  ymax += ypad;

  const auto px = [&](double n) { return kLeft + (n - xmin) / (xmax - xmin) * kPlotW; };
  const auto py = [&](double y) { return kTop + (ymax - y) / (ymax - ymin) * kPlotH; };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth, "%g") + "\" height=\"" + num(kHeight, "%g") +
       "\" viewBox=\"0 0 " + num(kWidth, "%g") + " " + num(kHeight, "%g") + "\"";
  s += " data-xmin=\"" + num(xmin, "%.17g") + "\" data-xmax=\"" + num(xmax, "%.17g") + "\" data-ymin=\"" +
       num(ymin, "%.17g") + "\" data-ymax=\"" + num(ymax, "%.17g") + "\"";
  s += " data-left=\"" + num(kLeft, "%g") + "\" data-top=\"" + num(kTop, "%g") + "\" data-plot-width=\"" +
       num(kPlotW, "%g") + "\" data-plot-height=\"" + num(kPlotH, "%g") + "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + num(kWidth, "%g") + "\" height=\"" + num(kHeight, "%g") +
       "\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(kLeft + kPlotW / 2, "%g") + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"15\">alpha = " + num(alpha, "%g") + ", p = " + num(p, "%g") + "</text>\n";

  // Axes and ticks.
  s += "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n";
  s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop + kPlotH) + "\" x2=\"" + num(kLeft + kPlotW) + "\" y2=\"" +
       num(kTop + kPlotH) + "\"/>\n";
  s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) + "\" y2=\"" + num(kTop + kPlotH) +
       "\"/>\n";
  s += "</g>\n";
  s += "<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"11\">\n";
  std::set<std::size_t> ns;
  for (const auto& r : rows) ns.insert(r.n);
  for (std::size_t n : ns) {
    const double x = px(static_cast<double>(n));
    s += "<line x1=\"" + num(x) + "\" y1=\"" + num(kTop + kPlotH) + "\" x2=\"" + num(x) + "\" y2=\"" +
         num(kTop + kPlotH + 5) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(x) + "\" y=\"" + num(kTop + kPlotH + 18) + "\" text-anchor=\"middle\">" +
         std::to_string(n) + "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const double v = ymin + (ymax - ymin) * k / 4.0;
    const double y = py(v);
    s += "<line x1=\"" + num(kLeft - 5) + "\" y1=\"" + num(y) + "\" x2=\"" + num(kLeft) + "\" y2=\"" + num(y) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" + num(v, "%.3g") +
         "</text>\n";
  }
  s += "<text x=\"" + num(kLeft + kPlotW / 2) + "\" y=\"" + num(kHeight - 16) +
       "\" text-anchor=\"middle\" font-size=\"13\">n</text>\n";
  s += "<text x=\"18\" y=\"" + num(kTop + kPlotH / 2) + "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 " +
       num(kTop + kPlotH / 2) + ")\">regret</text>\n";
  s += "</g>\n";

  // One group per method: band (upper left to right, lower right to left), mean line, points.
  std::vector<std::string> methods;
  for (const auto& r : rows)
    if (methods.empty() || methods.back() != r.method) methods.push_back(r.method);
  for (const auto& m : methods) {
    std::vector<const CurveRow*> series;
    for (const auto& r : rows)
      if (r.method == m) series.push_back(&r);
    const std::string color = color_for(m);
    s += "<g class=\"series\" data-method=\"" + escape(m) + "\">\n";
    std::string band, line;
    for (const auto* r : series) band += num(px(static_cast<double>(r->n))) + "," + num(py(r->mean_regret + r->std_regret)) + " ";
    for (auto it = series.rbegin(); it != series.rend(); ++it)
      band += num(px(static_cast<double>((*it)->n))) + "," + num(py((*it)->mean_regret - (*it)->std_regret)) + " ";
    for (const auto* r : series) line += num(px(static_cast<double>(r->n))) + "," + num(py(r->mean_regret)) + " ";
    band.pop_back();
    line.pop_back();
    s += "<polygon class=\"band\" fill=\"" + color + "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"" + band +
         "\"/>\n";
    s += "<polyline class=\"mean\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\" points=\"" + line +
         "\"/>\n";
    for (const auto* r : series) {
      s += "<circle class=\"point\" cx=\"" + num(px(static_cast<double>(r->n))) + "\" cy=\"" + num(py(r->mean_regret)) +
           "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }
    s += "</g>\n";
  }

  // Legend.
  s += "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
  double ly = kTop + 10;
  for (const auto& m : methods) {
    const double lx = kLeft + kPlotW + 20;
    s += "<line x1=\"" + num(lx) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(lx + 20) + "\" y2=\"" + num(ly) +
         "\" stroke=\"" + color_for(m) + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + num(lx + 26) + "\" y=\"" + num(ly + 4) + "\">" + escape(m) + "</text>\n";
    ly += 18;
  }
  s += "</g>\n";
  s += "</svg>\n";
  return s;
}

std::vector<std::string> plot_curves(const RegretCurve& curve, const std::string& dir) {
  if (curve.rows.empty()) throw ConfigError("cannot plot an empty curve");
  std::map<std::pair<double, double>, std::vector<CurveRow>> panels;
  for (const auto& r : curve.rows) panels[{r.alpha, r.p}].push_back(r);

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());

  std::vector<std::string> written;
  for (const auto& [key, rows] : panels) {
    const std::string path = (std::filesystem::path(dir) / svg_file_name(key.first, key.second)).string();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << render_svg(rows, key.first, key.second);
    out.flush();
    if (!out) throw IoError("failed writing '" + path + "'");
    written.push_back(path);
  }
  return written;
}

}  // namespace qpl
