#include "fracpath/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>

#include "fracpath/branch_io.hpp"
#include "fracpath/errors.hpp"

namespace fracpath {

namespace {

constexpr int kWidth = 760;
constexpr int kHeight = 520;
constexpr double kMarginL = 70, kMarginR = 20, kMarginT = 20, kMarginB = 50;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = 8;

struct Polyline {
  std::vector<double> x, y;
  bool thick = false;
  int color = 0;
};

struct Marker {
  double x, y;
  EventType type;
  int color;
};

struct Figure {
  std::vector<Polyline> lines;
  std::vector<Marker> markers;
  std::string xlabel, ylabel;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

Figure build_diagram(const std::vector<std::filesystem::path>& inputs) {
  Figure fig;
  fig.xlabel = "mu";
  fig.ylabel = "|u|_2";
  int color = 0;
  for (const auto& path : inputs) {
    Branch br = read_branch_csv(path);
    if (br.records.empty())
      throw EmptyBranch("no records in '" + path.string() + "'");
    Polyline cur;
    cur.color = color;
    cur.thick = br.records.front().stab.total == 0;
    for (const auto& r : br.records) {
      const bool thick = r.stab.total == 0;
      if (thick != cur.thick && !cur.x.empty()) {
        // close the segment at the style change and restart from it
        cur.x.push_back(r.mu);
        cur.y.push_back(r.norm2);
        fig.lines.push_back(cur);
        cur = Polyline{};
        cur.color = color;
        cur.thick = thick;
      }
      cur.x.push_back(r.mu);
      cur.y.push_back(r.norm2);
      if (r.event != EventType::none)
        fig.markers.push_back({r.mu, r.norm2, r.event, color});
    }
    if (cur.x.size() > 1 || fig.lines.empty()) fig.lines.push_back(cur);
    color = (color + 1) % kPaletteSize;
  }
  return fig;
}

Figure build_profile(const std::vector<std::filesystem::path>& inputs) {
  Figure fig;
  fig.xlabel = "x";
  fig.ylabel = "u";
  int color = 0;
  for (const auto& path : inputs) {
    Snapshot snap = read_snapshot_csv(path);
    if (snap.x.size() == 0)
      throw EmptyBranch("no samples in '" + path.string() + "'");
    for (int c = 0; c < snap.u.cols(); ++c) {
      Polyline line;
      line.color = color;
      line.thick = c == 0;
      for (int i = 0; i < snap.x.size(); ++i) {
        line.x.push_back(snap.x[i]);
        line.y.push_back(snap.u(i, c));
      }
      fig.lines.push_back(std::move(line));
      color = (color + 1) % kPaletteSize;
    }
  }
  return fig;
}

struct Box {
  double xlo, xhi, ylo, yhi;
  double sx(double x) const {
    return kMarginL + (x - xlo) / (xhi - xlo) * (kWidth - kMarginL - kMarginR);
  }
  double sy(double y) const {
    return kHeight - kMarginB -
           (y - ylo) / (yhi - ylo) * (kHeight - kMarginT - kMarginB);
  }
};

Box data_box(const Figure& fig) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const auto& l : fig.lines)
    for (size_t i = 0; i < l.x.size(); ++i) {
      xlo = std::min(xlo, l.x[i]);
      xhi = std::max(xhi, l.x[i]);
      ylo = std::min(ylo, l.y[i]);
      yhi = std::max(yhi, l.y[i]);
    }
  if (!std::isfinite(xlo)) throw EmptyBranch("nothing to plot");
  auto pad = [](double& lo, double& hi) {
    const double w = hi - lo;
    if (w <= 0) {
      lo -= 0.5 + std::abs(lo) * 0.05;
      hi += 0.5 + std::abs(hi) * 0.05;
    } else {
      lo -= 0.05 * w;
      hi += 0.05 * w;
    }
  };
  pad(xlo, xhi);
  pad(ylo, yhi);
  return {xlo, xhi, ylo, yhi};
}

void write_svg(const Figure& fig, const std::filesystem::path& out) {
  const Box box = data_box(fig);
  std::ofstream f(out);
  if (!f) throw IoError("cannot open '" + out.string() + "' for writing");
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
    << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
    << kHeight << "\">\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // axes, ticks and grid
  const int nticks = 6;
  for (int i = 0; i <= nticks; ++i) {
    const double tx = box.xlo + i * (box.xhi - box.xlo) / nticks;
    const double ty = box.ylo + i * (box.yhi - box.ylo) / nticks;
    f << "<line x1=\"" << box.sx(tx) << "\" y1=\"" << kMarginT << "\" x2=\""
      << box.sx(tx) << "\" y2=\"" << kHeight - kMarginB
      << "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
    f << "<line x1=\"" << kMarginL << "\" y1=\"" << box.sy(ty) << "\" x2=\""
      << kWidth - kMarginR << "\" y2=\"" << box.sy(ty)
      << "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
    f << "<text x=\"" << box.sx(tx) << "\" y=\"" << kHeight - kMarginB + 18
      << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt(tx)
      << "</text>\n";
    f << "<text x=\"" << kMarginL - 6 << "\" y=\"" << box.sy(ty) + 4
      << "\" font-size=\"11\" text-anchor=\"end\">" << fmt(ty) << "</text>\n";
  }
  f << "<rect x=\"" << kMarginL << "\" y=\"" << kMarginT << "\" width=\""
    << kWidth - kMarginL - kMarginR << "\" height=\""
    << kHeight - kMarginT - kMarginB
    << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
  f << "<text x=\"" << (kMarginL + kWidth - kMarginR) / 2 << "\" y=\""
    << kHeight - 12 << "\" font-size=\"13\" text-anchor=\"middle\">"
    << fig.xlabel << "</text>\n";
  f << "<text x=\"16\" y=\"" << (kMarginT + kHeight - kMarginB) / 2
    << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << (kMarginT + kHeight - kMarginB) / 2 << ")\">" << fig.ylabel
    << "</text>\n";

  for (const auto& l : fig.lines) {
    if (l.x.size() < 2) continue;
    f << "<polyline fill=\"none\" stroke=\"" << kPalette[l.color]
      << "\" stroke-width=\"" << (l.thick ? 2.6 : 1.0) << "\" points=\"";
    for (size_t i = 0; i < l.x.size(); ++i)
      f << box.sx(l.x[i]) << ',' << box.sy(l.y[i]) << ' ';
    f << "\"/>\n";
  }

  for (const auto& m : fig.markers) {
    const double cx = box.sx(m.x), cy = box.sy(m.y);
    const char* col = kPalette[m.color];
    switch (m.type) {
      case EventType::fold:  // circle
        f << "<circle cx=\"" << cx << "\" cy=\"" << cy
          << "\" r=\"4.5\" fill=\"white\" stroke=\"" << col
          << "\" stroke-width=\"1.5\"/>\n";
        break;
      case EventType::branch_point:  // cross
        f << "<path d=\"M" << cx - 4.5 << ' ' << cy - 4.5 << " L" << cx + 4.5
          << ' ' << cy + 4.5 << " M" << cx - 4.5 << ' ' << cy + 4.5 << " L"
          << cx + 4.5 << ' ' << cy - 4.5 << "\" stroke=\"" << col
          << "\" stroke-width=\"1.8\"/>\n";
        break;
      case EventType::hopf:  // diamond
        f << "<path d=\"M" << cx << ' ' << cy - 5.5 << " L" << cx + 5.5 << ' '
          << cy << " L" << cx << ' ' << cy + 5.5 << " L" << cx - 5.5 << ' '
          << cy << " Z\" fill=\"white\" stroke=\"" << col
          << "\" stroke-width=\"1.5\"/>\n";
        break;
      case EventType::none:
        break;
    }
  }
  f << "</svg>\n";
  if (!f.flush()) throw IoError("write to '" + out.string() + "' failed");
}

void write_gnuplot(const Figure& fig, const std::filesystem::path& out_svg,
                   const std::filesystem::path& out_gp) {
  std::ofstream f(out_gp);
  if (!f) throw IoError("cannot open '" + out_gp.string() + "' for writing");
  f << "# gnuplot equivalent of " << out_svg.filename().string() << "\n";
  f << "set terminal svg size " << kWidth << "," << kHeight << "\n";
  f << "set output '" << out_svg.stem().string() << ".gnuplot.svg'\n";
  f << "set xlabel '" << fig.xlabel << "'\nset ylabel '" << fig.ylabel
    << "'\n";
  int id = 0;
  for (const auto& l : fig.lines) {
    f << "$line" << id << " << EOD\n";
    for (size_t i = 0; i < l.x.size(); ++i)
      f << format_g17(l.x[i]) << ' ' << format_g17(l.y[i]) << "\n";
    f << "EOD\n";
    ++id;
  }
  std::vector<std::string> marker_blocks;
  const struct { EventType t; int pt; const char* name; } kinds[] = {
      {EventType::fold, 6, "fold"},
      {EventType::branch_point, 2, "branch_point"},
      {EventType::hopf, 12, "hopf"}};
  for (const auto& kind : kinds) {
    std::string block;
    for (const auto& m : fig.markers)
      if (m.type == kind.t)
        block += format_g17(m.x) + " " + format_g17(m.y) + "\n";
    if (!block.empty()) {
      f << "$mark_" << kind.name << " << EOD\n" << block << "EOD\n";
      marker_blocks.push_back(std::string("$mark_") + kind.name +
                              " using 1:2 with points pt " +
                              std::to_string(kind.pt) + " ps 1.4 title '" +
                              kind.name + "'");
    }
  }
  f << "plot ";
  for (int i = 0; i < id; ++i) {
    const auto& l = fig.lines[i];
    f << "$line" << i << " using 1:2 with lines lw "
      << (l.thick ? "2.6" : "1.0") << " lc rgb '" << kPalette[l.color]
      << "' notitle";
    if (i + 1 < id || !marker_blocks.empty()) f << ", \\\n     ";
  }
  for (size_t i = 0; i < marker_blocks.size(); ++i) {
    f << marker_blocks[i];
    if (i + 1 < marker_blocks.size()) f << ", \\\n     ";
  }
  f << "\n";
  if (!f.flush()) throw IoError("write to '" + out_gp.string() + "' failed");
}

}  // namespace

void emit_plot(const std::vector<std::filesystem::path>& inputs, PlotKind kind,
               const std::filesystem::path& out_svg) {
  if (inputs.empty()) throw EmptyBranch("no input files");
  const Figure fig =
      kind == PlotKind::diagram ? build_diagram(inputs) : build_profile(inputs);
  write_svg(fig, out_svg);
  std::filesystem::path gp = out_svg;
  gp.replace_extension(".gp");
  write_gnuplot(fig, out_svg, gp);
}

}  // namespace fracpath
