#include "nnid/svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace nnid {

namespace {

constexpr double kWidth = 900, kHeight = 420;
constexpr double kLeft = 80, kRight = 170, kTop = 40, kBottom = 50;
constexpr std::array<const char*, 8> kPalette{
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Keeps the first, min, max and last sample of each bucket, in index order.
std::vector<std::size_t> decimate(const std::vector<double>& y,
                                  std::size_t max_points) {
  std::vector<std::size_t> idx;
  if (y.size() <= max_points || max_points < 8) {
    idx.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) idx[i] = i;
    return idx;
  }
  const std::size_t buckets = max_points / 4;
  for (std::size_t b = 0; b < buckets; ++b) {
    const std::size_t lo = b * y.size() / buckets;
    const std::size_t hi = (b + 1) * y.size() / buckets;
    std::size_t mn = lo, mx = lo;
    for (std::size_t i = lo; i < hi; ++i) {
      if (y[i] < y[mn]) mn = i;
      if (y[i] > y[mx]) mx = i;
    }
    for (std::size_t i : {lo, std::min(mn, mx), std::max(mn, mx), hi - 1}) {
      if (idx.empty() || idx.back() < i) idx.push_back(i);
    }
  }
  return idx;
}

std::string tick(double v) { return fmt::format("{:.3g}", v); }

}  // namespace

void write_line_plot(std::ostream& os, const std::vector<double>& x,
                     const std::vector<Series>& series, const PlotSpec& spec) {
  const auto usable = [&](double v) {
    return std::isfinite(v) && (!spec.log_y || v > 0.0);
  };
  const auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
  double y0 = x0, y1 = -x0;
  for (double v : x) {
    if (std::isfinite(v)) {
      x0 = std::min(x0, v);
      x1 = std::max(x1, v);
    }
  }
  for (const auto& s : series) {
    if (s.y.size() != x.size()) {
      throw std::invalid_argument("plot: series '" + s.name + "' length mismatch");
    }
    for (double v : s.y) {
      if (usable(v)) {
        y0 = std::min(y0, ty(v));
        y1 = std::max(y1, ty(v));
      }
    }
  }
  for (const auto& [v, label] : spec.hlines) {
    if (usable(v)) {
      y0 = std::min(y0, ty(v));
      y1 = std::max(y1, ty(v));
    }
  }
  if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0;
  if (!std::isfinite(y0)) y0 = 0.0, y1 = 1.0;
  if (x1 <= x0) x1 = x0 + 1.0;
  if (y1 <= y0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const auto px = [&](double v) { return kLeft + (v - x0) / (x1 - x0) * pw; };
  const auto py = [&](double v) { return kTop + (y1 - v) / (y1 - y0) * ph; };

  os << fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "viewBox=\"0 0 {} {}\" font-family=\"sans-serif\" font-size=\"12\">\n",
      kWidth, kHeight, kWidth, kHeight);
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << fmt::format("<text x=\"{}\" y=\"22\" font-size=\"15\">{}</text>\n",
                    kLeft, escape(spec.title));
  os << fmt::format(
      "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" "
      "stroke=\"#333\"/>\n",
      kLeft, kTop, pw, ph);

  for (int i = 0; i <= 5; ++i) {
    const double xv = x0 + (x1 - x0) * i / 5.0;
    const double yv = y0 + (y1 - y0) * i / 5.0;
    os << fmt::format(
        "<line x1=\"{0:.1f}\" y1=\"{1}\" x2=\"{0:.1f}\" y2=\"{2}\" "
        "stroke=\"#ddd\"/>\n<text x=\"{0:.1f}\" y=\"{3}\" "
        "text-anchor=\"middle\">{4}</text>\n",
        px(xv), kTop, kTop + ph, kTop + ph + 16, tick(xv));
    os << fmt::format(
        "<line x1=\"{0}\" y1=\"{1:.1f}\" x2=\"{2}\" y2=\"{1:.1f}\" "
        "stroke=\"#ddd\"/>\n<text x=\"{3}\" y=\"{4:.1f}\" "
        "text-anchor=\"end\">{5}</text>\n",
        kLeft, py(yv), kLeft + pw, kLeft - 6, py(yv) + 4,
        spec.log_y ? "1e" + tick(yv) : tick(yv));
  }
  os << fmt::format(
      "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
      kLeft + pw / 2, kHeight - 10, escape(spec.xlabel));
  os << fmt::format(
      "<text x=\"16\" y=\"{0}\" text-anchor=\"middle\" "
      "transform=\"rotate(-90 16 {0})\">{1}</text>\n",
      kTop + ph / 2, escape(spec.ylabel + (spec.log_y ? " (log10)" : "")));

  for (const auto& [v, label] : spec.hlines) {
    if (!usable(v)) continue;
    os << fmt::format(
        "<line x1=\"{0}\" y1=\"{1:.1f}\" x2=\"{2}\" y2=\"{1:.1f}\" "
        "stroke=\"#555\" stroke-dasharray=\"6 4\"/>\n<text x=\"{3}\" "
        "y=\"{4:.1f}\" fill=\"#555\">{5}</text>\n",
        kLeft, py(ty(v)), kLeft + pw, kLeft + pw + 6, py(ty(v)) + 4,
        escape(label));
  }

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* colour = kPalette[k % kPalette.size()];
    std::string path;
    bool pen_down = false;
    double last_y = 0.0;
    for (std::size_t i : decimate(s.y, spec.max_points)) {
      if (!usable(s.y[i]) || !std::isfinite(x[i])) {
        pen_down = false;
        continue;
      }
      const double X = px(x[i]), Y = py(ty(s.y[i]));
      if (!pen_down) {
        path += fmt::format("M{:.1f},{:.1f}", X, Y);
      } else if (spec.step) {
        path += fmt::format("L{:.1f},{:.1f}L{:.1f},{:.1f}", X, last_y, X, Y);
      } else {
        path += fmt::format("L{:.1f},{:.1f}", X, Y);
      }
      pen_down = true;
      last_y = Y;
    }
    os << fmt::format(
        "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\"/>\n",
        path, colour);
    const double ly = kTop + 10 + 18.0 * static_cast<double>(k);
    os << fmt::format(
        "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" "
        "stroke-width=\"2\"/>\n<text x=\"{4}\" y=\"{5}\">{6}</text>\n",
        kLeft + pw + 10, ly, kLeft + pw + 30, colour, kLeft + pw + 36, ly + 4,
        escape(s.name));
  }
  os << "</svg>\n";
}

void save_line_plot(const std::string& path, const std::vector<double>& x,
                    const std::vector<Series>& series, const PlotSpec& spec) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_line_plot(out, x, series, spec);
}

}  // namespace nnid
