#include "lidarcmp/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "lidarcmp/types.hpp"

namespace lidarcmp::svg {
namespace {

constexpr const char* kPalette[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52",
                                    "#8172b3", "#937860", "#da8bc3", "#8c8c8c",
                                    "#ccb974", "#64b5cd", "#2f4b7c", "#ffa600"};
constexpr int kPaletteSize = 12;

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Canvas {
  std::string body;
  double width, height;

  Canvas(double w, double h) : width(w), height(h) {}

  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double stroke_width = 1.0) {
    body += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" +
            num(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" + num(stroke_width) + "\"/>\n";
  }
  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& stroke = "none") {
    body += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" +
            num(h) + "\" fill=\"" + fill + "\" stroke=\"" + stroke + "\"/>\n";
  }
  void text(double x, double y, const std::string& s, double size = 11,
            const std::string& anchor = "start", const std::string& fill = "#222") {
    body += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + num(size) +
            "\" font-family=\"sans-serif\" text-anchor=\"" + anchor + "\" fill=\"" + fill + "\">" +
            escape(s) + "</text>\n";
  }
  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke) {
    body += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : pts) body += num(x) + "," + num(y) + " ";
    body += "\"/>\n";
  }
  std::string finish() const {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
           num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n" +
           "<rect x=\"0\" y=\"0\" width=\"" + num(width) + "\" height=\"" + num(height) +
           "\" fill=\"white\"/>\n" + body + "</svg>\n";
  }
};

void check_report(const nlohmann::json& report, const std::string& expected) {
  if (!report.is_object() || report.value("report", "") != expected) {
    throw PreconditionError("report schema mismatch: expected a '" + expected + "' report");
  }
  if (!report.contains("rows") || report["rows"].empty()) {
    throw PreconditionError("empty report: nothing to plot");
  }
}

void draw_axes(Canvas& c, double x0, double y0, double x1, double y1, double xmin, double xmax,
               double ymin, double ymax, const std::string& xlabel, const std::string& ylabel) {
  c.line(x0, y1, x1, y1, "#222");
  c.line(x0, y0, x0, y1, "#222");
  for (int t = 0; t <= 4; ++t) {
    const double fx = x0 + (x1 - x0) * t / 4.0;
    const double vx = xmin + (xmax - xmin) * t / 4.0;
    c.line(fx, y1, fx, y1 + 4, "#222");
    c.text(fx, y1 + 16, num(vx), 10, "middle");
    const double fy = y1 - (y1 - y0) * t / 4.0;
    const double vy = ymin + (ymax - ymin) * t / 4.0;
    c.line(x0 - 4, fy, x0, fy, "#222");
    c.text(x0 - 6, fy + 3, num(vy), 10, "end");
  }
  c.text((x0 + x1) / 2, y1 + 32, xlabel, 11, "middle");
  c.text(x0 - 40, y0 - 8, ylabel, 11, "start");
}

}  // namespace

std::string sensitivity_curves(const nlohmann::json& report) {
  check_report(report, "sweep");
  const auto levels = report.at("levels").get<std::vector<double>>();
  const auto metric_names = report.at("metrics").get<std::vector<std::string>>();

  std::map<std::string, std::map<double, double>> curves;
  for (const auto& row : report.at("rows")) {
    const double mean = row.value("mean", std::numeric_limits<double>::quiet_NaN());
    if (std::isfinite(mean)) {
      curves[row.at("metric").get<std::string>()][row.at("level").get<double>()] = mean;
    }
  }
  if (curves.empty()) throw PreconditionError("empty report: no finite rows");

  const double w = 760, h = 420, x0 = 70, y0 = 40, x1 = 540, y1 = h - 60;
  Canvas c(w, h);
  c.text(x0, 24, "Metric sensitivity to " + report.value("modifier", "?") +
                     " (per-metric min-max normalized)", 13);
  const double xmin = levels.front(), xmax = levels.back();
  draw_axes(c, x0, y0, x1, y1, xmin, xmax, 0.0, 1.0, "level", "normalized value");

  int color = 0;
  double legend_y = y0 + 10;
  for (const std::string& name : metric_names) {
    const auto it = curves.find(name);
    if (it == curves.end()) continue;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& [_, v] : it->second) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    std::vector<std::pair<double, double>> pts;
    for (const auto& [lvl, v] : it->second) {
      const double fx = x0 + (lvl - xmin) / (xmax - xmin) * (x1 - x0);
      const double fy = y1 - (v - lo) / span * (y1 - y0);
      pts.push_back({fx, fy});
    }
    const std::string stroke = kPalette[color % kPaletteSize];
    c.polyline(pts, stroke);
    c.rect(x1 + 16, legend_y - 8, 14, 3, stroke);
    c.text(x1 + 34, legend_y - 4, name, 10);
    legend_y += 16;
    ++color;
  }
  return c.finish();
}

std::string accuracy_heatmap(const nlohmann::json& report) {
  check_report(report, "accuracy");
  std::vector<std::string> metric_order, modifier_order;
  std::map<std::pair<std::string, std::string>, double> acc;
  for (const auto& row : report.at("rows")) {
    const std::string metric = row.at("metric").get<std::string>();
    const std::string modifier = row.at("modifier").get<std::string>();
    if (std::find(metric_order.begin(), metric_order.end(), metric) == metric_order.end()) {
      metric_order.push_back(metric);
    }
    if (std::find(modifier_order.begin(), modifier_order.end(), modifier) ==
        modifier_order.end()) {
      modifier_order.push_back(modifier);
    }
    acc[{metric, modifier}] = row.at("accuracy").get<double>();
  }

  const double cell_w = 80, cell_h = 26, left = 220, top = 60;
  const double w = left + cell_w * modifier_order.size() + 40;
  const double h = top + cell_h * metric_order.size() + 40;
  Canvas c(w, h);
  c.text(20, 28, "Pair-identification accuracy by metric and modifier", 13);
  for (std::size_t j = 0; j < modifier_order.size(); ++j) {
    c.text(left + cell_w * (j + 0.5), top - 8, modifier_order[j], 10, "middle");
  }
  for (std::size_t i = 0; i < metric_order.size(); ++i) {
    c.text(left - 8, top + cell_h * (i + 0.65), metric_order[i], 10, "end");
    for (std::size_t j = 0; j < modifier_order.size(); ++j) {
      const auto it = acc.find({metric_order[i], modifier_order[j]});
      const double x = left + cell_w * j, y = top + cell_h * i;
      if (it == acc.end()) {
        c.rect(x, y, cell_w - 2, cell_h - 2, "#eee");
        continue;
      }
      const double v = it->second;
      // green ramp, low accuracy pale red
      const int r = static_cast<int>(244 - 160 * v);
      const int g = static_cast<int>(120 + 120 * v);
      char fill[16];
      std::snprintf(fill, sizeof fill, "#%02x%02x7a", r, g);
      c.rect(x, y, cell_w - 2, cell_h - 2, fill);
      c.text(x + cell_w / 2 - 1, y + cell_h / 2 + 4, num(v), 10, "middle");
    }
  }
  return c.finish();
}

std::string timing_bars(const nlohmann::json& report) {
  check_report(report, "timing");
  struct Bar {
    std::string label;
    double mean;
  };
  std::vector<Bar> bars;
  for (const auto& row : report.at("rows")) {
    if (row.value("status", "") != "ok") continue;
    bars.push_back({row.at("metric").get<std::string>() + " @ " +
                        std::to_string(row.at("size").get<std::size_t>()),
                    row.at("mean_s").get<double>()});
  }
  if (bars.empty()) throw PreconditionError("empty report: no successful timing rows");
  std::stable_sort(bars.begin(), bars.end(), [](const Bar& a, const Bar& b) { return a.mean < b.mean; });

  const double row_h = 22, left = 240, top = 50;
  const double w = 720, h = top + row_h * bars.size() + 50;
  const double max_mean = bars.back().mean;
  Canvas c(w, h);
  c.text(20, 28, "Computation time (mean seconds per evaluation, ascending)", 13);
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double y = top + row_h * i;
    const double len = max_mean > 0 ? (w - left - 90) * bars[i].mean / max_mean : 0.0;
    c.text(left - 8, y + 14, bars[i].label, 10, "end");
    c.rect(left, y + 4, std::max(len, 1.0), row_h - 8, kPalette[i % kPaletteSize]);
    c.text(left + len + 6, y + 14, num(bars[i].mean) + " s", 10);
  }
  return c.finish();
}

std::string distribution_hist(const nlohmann::json& report) {
  check_report(report, "pairwise");
  std::map<std::string, std::vector<double>> values;
  std::vector<std::string> order;
  for (const auto& row : report.at("rows")) {
    if (row.contains("error")) continue;
    const std::string metric = row.at("metric").get<std::string>();
    if (!values.count(metric)) order.push_back(metric);
    values[metric].push_back(row.at("value").get<double>());
  }
  if (order.empty()) throw PreconditionError("empty report: no successful rows");

  const int bins = 12;
  const int cols = 3;
  const int rows_n = (static_cast<int>(order.size()) + cols - 1) / cols;
  const double panel_w = 230, panel_h = 150, pad = 24;
  const double w = cols * (panel_w + pad) + pad;
  const double h = rows_n * (panel_h + pad) + pad + 30;
  Canvas c(w, h);
  c.text(20, 24, "Distribution of metric values over scan pairs", 13);

  for (std::size_t mi = 0; mi < order.size(); ++mi) {
    const auto& vals = values[order[mi]];
    const double px = pad + (panel_w + pad) * (mi % cols);
    const double py = 40 + (panel_h + pad) * (mi / cols);
    double lo = *std::min_element(vals.begin(), vals.end());
    double hi = *std::max_element(vals.begin(), vals.end());
    if (hi == lo) hi = lo + 1.0;
    std::vector<int> count(bins, 0);
    for (const double v : vals) {
      int b = static_cast<int>((v - lo) / (hi - lo) * bins);
      if (b >= bins) b = bins - 1;
      count[b] += 1;
    }
    const int peak = *std::max_element(count.begin(), count.end());
    c.rect(px, py, panel_w, panel_h, "none", "#999");
    c.text(px + 4, py + 14, order[mi], 10);
    const double bw = panel_w / bins;
    for (int b = 0; b < bins; ++b) {
      const double bh = peak > 0 ? (panel_h - 30) * count[b] / peak : 0.0;
      c.rect(px + b * bw + 1, py + panel_h - 6 - bh, bw - 2, bh,
             kPalette[mi % kPaletteSize]);
    }
    c.text(px + 2, py + panel_h + 12, num(lo), 9);
    c.text(px + panel_w - 2, py + panel_h + 12, num(hi), 9, "end");
  }
  return c.finish();
}

std::string render(const nlohmann::json& report, const std::string& kind) {
  if (kind == "sensitivity_curves") return sensitivity_curves(report);
  if (kind == "accuracy_heatmap") return accuracy_heatmap(report);
  if (kind == "timing_bars") return timing_bars(report);
  if (kind == "distribution_hist") return distribution_hist(report);
  throw PreconditionError("unknown plot kind: " + kind);
}

}  // namespace lidarcmp::svg
