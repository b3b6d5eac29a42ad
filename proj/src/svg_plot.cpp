#include "qdsim/svg_plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "qdsim/error.hpp"

namespace qdsim::plot {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 30.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 60.0;

constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                              "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!(lo <= hi)) lo = 0.0, hi = 1.0;
    if (hi == lo) lo -= 0.5, hi += 0.5;
  }
};

struct Frame {
  Range x, y;
  double px(double v) const { return kLeft + (v - x.lo) / (x.hi - x.lo) * (kWidth - kLeft - kRight); }
  double py(double v) const { return kHeight - kBottom - (v - y.lo) / (y.hi - y.lo) * (kHeight - kTop - kBottom); }
};

std::string header(const io::Dataset& ds, const std::string& title) {
  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
       "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
  s += "<metadata>config_hash=" + escape(ds.meta("config_hash")) + " seed=" + escape(ds.meta("seed")) +
       "</metadata>\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(kWidth / 2) + "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"16\">" + escape(title) + "</text>\n";
  return s;
}

std::string axes(const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  std::string s;
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  s += "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n";
  s += "<rect x=\"" + num(x0) + "\" y=\"" + num(y1) + "\" width=\"" + num(x1 - x0) + "\" height=\"" +
       num(y0 - y1) + "\"/>\n";
  s += "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = f.x.lo + (f.x.hi - f.x.lo) * k / 4.0;
    const double yv = f.y.lo + (f.y.hi - f.y.lo) * k / 4.0;
    s += "<text x=\"" + num(f.px(xv)) + "\" y=\"" + num(y0 + 16) + "\" text-anchor=\"middle\">" + tick(xv) +
         "</text>\n";
    s += "<text x=\"" + num(x0 - 6) + "\" y=\"" + num(f.py(yv) + 4) + "\" text-anchor=\"end\">" + tick(yv) +
         "</text>\n";
  }
  s += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(kHeight - 18) + "\" text-anchor=\"middle\">" +
       escape(xlabel) + "</text>\n";
  s += "<text x=\"18\" y=\"" + num((y0 + y1) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       num((y0 + y1) / 2) + ")\">" + escape(ylabel) + "</text>\n";
  s += "</g>\n";
  return s;
}

std::string label(const io::Column& c) { return c.unit.empty() ? c.name : c.name + " [" + c.unit + "]"; }

// One polyline per group value (or a single series), optionally with markers.
std::string series_plot(const io::Dataset& ds, const std::string& title, const std::string& xname,
                        const std::string& yname, const std::string& group, bool markers) {
  const auto& xc = ds.column(xname);
  const auto& yc = ds.column(yname);
  const io::Column* gc = group.empty() || !ds.has_column(group) ? nullptr : &ds.column(group);

  std::map<double, std::vector<std::size_t>> groups;
  for (std::size_t r = 0; r < ds.rows(); ++r) groups[gc ? gc->values[r] : 0.0].push_back(r);

  Frame f;
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    f.x.add(xc.values[r]);
    f.y.add(yc.values[r]);
  }
  f.x.finish();
  f.y.finish();

  std::string s = header(ds, title) + axes(f, label(xc), label(yc));
  std::size_t g = 0;
  for (auto& [key, idx] : groups) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xc.values[a] < xc.values[b]; });
    const char* color = kPalette[g % kPalette.size()];
    s += "<polyline class=\"series\" fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t r : idx) {
      if (!std::isfinite(xc.values[r]) || !std::isfinite(yc.values[r])) continue;
      if (!first) s += ' ';
      s += num(f.px(xc.values[r])) + "," + num(f.py(yc.values[r]));
      first = false;
    }
    s += "\"/>\n";
    if (markers) {
      for (std::size_t r : idx) {
        if (!std::isfinite(xc.values[r]) || !std::isfinite(yc.values[r])) continue;
        s += "<circle cx=\"" + num(f.px(xc.values[r])) + "\" cy=\"" + num(f.py(yc.values[r])) + "\" r=\"3\" fill=\"" +
             color + "\"/>\n";
      }
    }
    ++g;
  }
  s += "</svg>\n";
  return s;
}

// Piecewise-linear approximation of a perceptually ordered colormap.
std::string colormap(double t) {
  static constexpr std::array<std::array<double, 3>, 5> stops{{{68, 1, 84}, {59, 82, 139}, {33, 145, 140},
                                                              {94, 201, 98}, {253, 231, 37}}};
  if (!std::isfinite(t)) return "#808080";
  t = std::clamp(t, 0.0, 1.0) * (stops.size() - 1);
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
  const double w = t - static_cast<double>(k);
  char buf[8];
  int rgb[3];
  for (int c = 0; c < 3; ++c) rgb[c] = static_cast<int>(std::lround(stops[k][c] * (1 - w) + stops[k + 1][c] * w));
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

std::vector<double> unique_sorted(const std::vector<double>& v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  return u;
}

std::string heatmap(const io::Dataset& ds) {
  const auto& pc = ds.column("sqrt_power");
  const auto& fc = ds.column("fine_delay_fs");
  const auto& vc = ds.has_column("counts") ? ds.column("counts") : ds.column("population");
  const auto powers = unique_sorted(pc.values);
  const auto delays = unique_sorted(fc.values);
  const std::size_t rows = powers.size(), cols = delays.size();
  if (rows < 2 || cols < 2 || rows * cols != ds.rows())
    throw DomainError("Su2Map dataset is not a complete power x delay grid");

  std::vector<double> grid(rows * cols, std::nan(""));
  Range z;
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    const auto i = static_cast<std::size_t>(std::lower_bound(powers.begin(), powers.end(), pc.values[r]) - powers.begin());
    const auto j = static_cast<std::size_t>(std::lower_bound(delays.begin(), delays.end(), fc.values[r]) - delays.begin());
    grid[i * cols + j] = vc.values[r];
    z.add(vc.values[r]);
  }
  z.finish();

  Frame f;
  f.x.add(delays.front());
  f.x.add(delays.back());
  f.y.add(powers.front());
  f.y.add(powers.back());
  f.x.finish();
  f.y.finish();
  const double cw = (kWidth - kLeft - kRight) / static_cast<double>(cols - 1);
  const double ch = (kHeight - kTop - kBottom) / static_cast<double>(rows - 1);

  std::string s = header(ds, "SU(2) map");
  s += "<g class=\"heatmap\" shape-rendering=\"crispEdges\">\n";
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double x = std::max(kLeft, f.px(delays[j]) - cw / 2);
      const double y = std::max(kTop, f.py(powers[i]) - ch / 2);
      const double w = std::min(kWidth - kRight, f.px(delays[j]) + cw / 2) - x;
      const double h = std::min(kHeight - kBottom, f.py(powers[i]) + ch / 2) - y;
      s += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
           "\" fill=\"" + colormap((grid[i * cols + j] - z.lo) / (z.hi - z.lo)) + "\"/>\n";
    }
  }
  s += "</g>\n";
  for (const auto& p : find_grid_maxima(rows, cols, grid, 0.5)) {
    s += "<circle class=\"lobe\" cx=\"" + num(f.px(delays[p.col])) + "\" cy=\"" + num(f.py(powers[p.row])) +
         "\" r=\"4\" fill=\"none\" stroke=\"white\" stroke-width=\"1.5\"/>\n";
  }
  s += axes(f, label(fc), label(pc));
  s += "</svg>\n";
  return s;
}

}  // namespace

std::vector<GridPeak> find_grid_maxima(std::size_t rows, std::size_t cols, std::span<const double> values,
                                       double rel_threshold) {
  if (values.size() != rows * cols) throw DomainError("grid shape does not match value count");
  double vmax = -std::numeric_limits<double>::infinity();
  for (double v : values)
    if (std::isfinite(v)) vmax = std::max(vmax, v);
  std::vector<GridPeak> cand;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double v = values[i * cols + j];
      if (!std::isfinite(v) || v < rel_threshold * vmax) continue;
      bool peak = true;
      for (int di = -1; di <= 1 && peak; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          if (!di && !dj) continue;
          const auto ii = static_cast<std::ptrdiff_t>(i) + di, jj = static_cast<std::ptrdiff_t>(j) + dj;
          if (ii < 0 || jj < 0 || ii >= static_cast<std::ptrdiff_t>(rows) || jj >= static_cast<std::ptrdiff_t>(cols))
            continue;
          const double n = values[static_cast<std::size_t>(ii) * cols + static_cast<std::size_t>(jj)];
          if (std::isfinite(n) && n > v) {
            peak = false;
            break;
          }
        }
      }
      if (peak) cand.push_back({i, j, v});
    }
  }
  std::stable_sort(cand.begin(), cand.end(), [](const GridPeak& a, const GridPeak& b) { return a.value > b.value; });
  std::vector<GridPeak> out;
  for (const auto& c : cand) {
    const bool near = std::any_of(out.begin(), out.end(), [&](const GridPeak& p) {
      return std::abs(static_cast<double>(p.row) - static_cast<double>(c.row)) < 2.0 &&
             std::abs(static_cast<double>(p.col) - static_cast<double>(c.col)) < 2.0;
    });
    if (!near) out.push_back(c);
  }
  std::sort(out.begin(), out.end(), [](const GridPeak& a, const GridPeak& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  return out;
}

std::string render_svg(const io::Dataset& ds) {
  if (ds.columns.empty() || ds.rows() == 0) throw DomainError("cannot plot an empty dataset");
  try {
    switch (ds.kind) {
      case io::DatasetKind::Spectrum:
        return series_plot(ds, "Zeeman fan", "field", ds.has_column("measured") ? "measured" : "energy", "line", true);
      case io::DatasetKind::Rabi:
        return series_plot(ds, "Rabi oscillation", "sqrt_power", "counts", "", true);
      case io::DatasetKind::Ramsey:
        return series_plot(ds, "Ramsey fringes", "fine_delay", "counts", "coarse_delay", false);
      case io::DatasetKind::Su2Map:
        return heatmap(ds);
      case io::DatasetKind::Polarimetry:
        return series_plot(ds, "Polarimetry", "alpha", "intensity", "line", false);
      case io::DatasetKind::HeNe:
        return series_plot(ds, "HeNe reference phase", "timestamp_s", "wrapped_phase", "", false);
    }
  } catch (const SchemaError& e) {
    throw DomainError(std::string("unsupported dataset layout: ") + e.what());
  }
  throw DomainError("unsupported dataset kind");
}

}  // namespace qdsim::plot
