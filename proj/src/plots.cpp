#include "contre/plots.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "contre/csv.hpp"
#include "contre/error.hpp"
#include "contre/format.hpp"

namespace contre {
namespace {

constexpr double kWidth = 480;
constexpr double kHeight = 360;
constexpr double kLeft = 64;
constexpr double kRight = 24;
constexpr double kTop = 40;
constexpr double kBottom = 52;

std::optional<double> score_value(const CorrelationReport& report, const std::string& model_id,
                                  const std::string& vector) {
  if (vector.rfind("fisher_", 0) == 0) {
    const auto view = vector.substr(7);
    for (const auto& f : report.fisher) {
      if (f.model_id == model_id && f.view == view) return f.ratio;
    }
    return std::nullopt;
  }
  const auto* s = report.find_scores(model_id);
  if (!s) return std::nullopt;
  if (vector == "train_orig") return s->train_orig;
  if (vector == "train_contre") return s->train_contre;
  if (vector == "test_orig") return s->test_orig;
  if (vector == "test_contre") return s->test_contre;
  if (vector == "consistency") return s->consistency;
  if (vector == "generalization_gap" && s->train_orig && s->test_orig) return *s->train_orig - *s->test_orig;
  return std::nullopt;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string px(double v) { return format_fixed(v, 2); }

/// Range padded by 5% each side; a degenerate range is widened to +-0.5.
std::pair<double, double> axis_range(const std::vector<double>& values) {
  double lo = *std::min_element(values.begin(), values.end());
  double hi = *std::max_element(values.begin(), values.end());
  if (hi - lo <= 0) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

}  // namespace

std::vector<Figure> figures_for(const CorrelationReport& report) {
  std::vector<Figure> figures;
  for (const auto& c : report.correlations) {
    if (c.control) continue;
    Figure fig{c.name, c.y, c.x, c.value, {}};
    for (const auto& id : c.model_ids) {
      const auto x = score_value(report, id, c.y);
      const auto y = score_value(report, id, c.x);
      if (x && y) fig.points.push_back({id, *x, *y});
    }
    if (!fig.points.empty()) figures.push_back(std::move(fig));
  }
  return figures;
}

std::string figure_csv(const Figure& figure) {
  std::ostringstream out;
  csv::write_row(out, {"model_id", "x", "y"});
  for (const auto& p : figure.points) csv::write_row(out, {p.model_id, format_double(p.x), format_double(p.y)});
  return out.str();
}

std::string figure_svg(const Figure& figure) {
  std::vector<double> xs, ys;
  for (const auto& p : figure.points) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  const auto [x0, x1] = axis_range(xs);
  const auto [y0, y1] = axis_range(ys);
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * plot_w; };
  auto sy = [&](double y) { return kTop + plot_h - (y - y0) / (y1 - y0) * plot_h; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(kWidth) << "\" height=\"" << px(kHeight)
      << "\" viewBox=\"0 0 " << px(kWidth) << ' ' << px(kHeight) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << px(kWidth) << "\" height=\"" << px(kHeight) << "\" fill=\"white\"/>\n";
  std::string title = figure.name + " (rho = " + (figure.rho ? format_fixed(*figure.rho, 4) : std::string("n/a")) + ")";
  out << "<text x=\"" << px(kWidth / 2) << "\" y=\"20.00\" text-anchor=\"middle\" font-size=\"13\">"
      << escape_xml(title) << "</text>\n";
  out << "<rect x=\"" << px(kLeft) << "\" y=\"" << px(kTop) << "\" width=\"" << px(plot_w) << "\" height=\""
      << px(plot_h) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = x0 + (x1 - x0) * t / 4.0;
    const double fy = y0 + (y1 - y0) * t / 4.0;
    out << "<text x=\"" << px(sx(fx)) << "\" y=\"" << px(kTop + plot_h + 16) << "\" text-anchor=\"middle\">"
        << format_fixed(fx, 3) << "</text>\n";
    out << "<text x=\"" << px(kLeft - 6) << "\" y=\"" << px(sy(fy) + 4) << "\" text-anchor=\"end\">"
        << format_fixed(fy, 3) << "</text>\n";
  }
  out << "<text x=\"" << px(kLeft + plot_w / 2) << "\" y=\"" << px(kHeight - 10) << "\" text-anchor=\"middle\">"
      << escape_xml(figure.x_label) << "</text>\n";
  out << "<text x=\"14.00\" y=\"" << px(kTop + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 14.00 "
      << px(kTop + plot_h / 2) << ")\">" << escape_xml(figure.y_label) << "</text>\n";
  for (const auto& p : figure.points) {
    out << "<circle cx=\"" << px(sx(p.x)) << "\" cy=\"" << px(sy(p.y)) << "\" r=\"4.00\" fill=\"#1f5fa8\">"
        << "<title>" << escape_xml(p.model_id) << "</title></circle>\n";
    out << "<text x=\"" << px(sx(p.x) + 6) << "\" y=\"" << px(sy(p.y) - 6) << "\" font-size=\"9\">"
        << escape_xml(p.model_id) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::vector<std::filesystem::path> emit_plots(const CorrelationReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create '" + dir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> written;
  for (const auto& fig : figures_for(report)) {
    for (const auto& [ext, text] : {std::pair{".csv", figure_csv(fig)}, std::pair{".svg", figure_svg(fig)}}) {
      const auto path = dir / (fig.name + ext);
      std::ofstream out(path, std::ios::binary);
      if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
      out << text;
      if (!out) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
      written.push_back(path);
    }
  }
  return written;
}

}  // namespace contre
