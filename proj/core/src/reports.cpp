#include "ipixmatch/reports.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ipixmatch/checkpoint.hpp"
#include "ipixmatch/config.hpp"
#include "ipixmatch/dataset.hpp"
#include "ipixmatch/errors.hpp"
#include "ipixmatch/pseudo.hpp"

namespace ipix::harness {

namespace {

struct Series {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};

// Minimal polyline plot; enough for loss and metric curves.
std::string render_svg(const std::vector<Series>& series, const std::string& title,
                       const std::string& x_label) {
  const double width = 900, height = 520;
  const double ml = 70, mr = 30, mt = 45, mb = 50;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool first = true;
  for (const Series& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        xmin = xmax = s.x[i];
        ymin = ymax = s.y[i];
        first = false;
      }
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  ymin = std::min(ymin, 0.0);
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr); };
  auto py = [&](double y) {
    return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb);
  };

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='"
      << height << "' viewBox='0 0 " << width << " " << height << "'>\n"
      << "<rect width='100%' height='100%' fill='white'/>\n"
      << "<text x='" << width / 2 << "' y='25' text-anchor='middle' font-size='16'>"
      << title << "</text>\n";
  // axes
  svg << "<line x1='" << ml << "' y1='" << height - mb << "' x2='" << width - mr
      << "' y2='" << height - mb << "' stroke='black'/>\n"
      << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='"
      << height - mb << "' stroke='black'/>\n";
  char buf[64];
  for (int i = 0; i <= 4; ++i) {
    const double yv = ymin + (ymax - ymin) * i / 4.0;
    const double xv = xmin + (xmax - xmin) * i / 4.0;
    std::snprintf(buf, sizeof(buf), "%.4g", yv);
    svg << "<text x='" << ml - 6 << "' y='" << py(yv) + 4
        << "' text-anchor='end' font-size='11'>" << buf << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%.4g", xv);
    svg << "<text x='" << px(xv) << "' y='" << height - mb + 18
        << "' text-anchor='middle' font-size='11'>" << buf << "</text>\n";
  }
  svg << "<text x='" << width / 2 << "' y='" << height - 10
      << "' text-anchor='middle' font-size='12'>" << x_label << "</text>\n";
  double legend_y = mt + 10;
  for (const Series& s : series) {
    svg << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1.5' points='";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      svg << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    svg << "'/>\n";
    svg << "<line x1='" << width - mr - 150 << "' y1='" << legend_y << "' x2='"
        << width - mr - 120 << "' y2='" << legend_y << "' stroke='" << s.color
        << "' stroke-width='2'/>\n"
        << "<text x='" << width - mr - 112 << "' y='" << legend_y + 4
        << "' font-size='12'>" << s.label << "</text>\n";
    legend_y += 18;
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

void write_ppm(const std::filesystem::path& path, std::size_t h, std::size_t w,
               const std::vector<std::uint8_t>& rgb) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P6\n" << w << " " << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(rgb.data()),
            static_cast<std::streamsize>(rgb.size()));
}

struct LogRow {
  std::int64_t iter = 0;
  std::int64_t epoch = 0;
  double l_ipix = 0, alpha = 0, l_sum = 0;
  double miou = -1.0;  // -1 = no eval on this row
};

std::vector<LogRow> parse_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<LogRow> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    while (cells.size() < 10) cells.emplace_back();
    LogRow row;
    row.iter = std::stoll(cells[0]);
    row.epoch = std::stoll(cells[1]);
    row.l_ipix = std::stod(cells[4]);
    row.alpha = std::stod(cells[5]);
    row.l_sum = std::stod(cells[7]);
    if (!cells[8].empty()) row.miou = std::stod(cells[8]);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

void palette_color(std::size_t class_id, std::uint8_t rgb[3]) {
  static const std::uint8_t kPalette[][3] = {
      {40, 40, 40},    {225, 70, 70},   {70, 200, 90},   {70, 110, 235},
      {235, 220, 60},  {200, 80, 220},  {60, 220, 220},  {240, 150, 50},
      {140, 90, 40},   {160, 160, 160}, {100, 40, 120},  {40, 120, 100},
  };
  constexpr std::size_t n = sizeof(kPalette) / sizeof(kPalette[0]);
  if (class_id < n) {
    for (int i = 0; i < 3; ++i) rgb[i] = kPalette[class_id][i];
  } else {
    // keep ids bijective past the table
    rgb[0] = static_cast<std::uint8_t>(37 * class_id % 256);
    rgb[1] = static_cast<std::uint8_t>(101 * class_id % 256);
    rgb[2] = static_cast<std::uint8_t>(197 * class_id % 256);
  }
}

ReportResult emit_reports(const std::filesystem::path& run_dir,
                          const std::filesystem::path& out_dir) {
  ReportResult result;
  std::filesystem::create_directories(out_dir);

  std::vector<LogRow> rows;
  if (std::filesystem::exists(run_dir / "metrics.csv")) {
    rows = parse_metrics_csv(run_dir / "metrics.csv");
  } else {
    result.warnings.push_back("metrics.csv missing; no curves emitted");
  }

  if (!rows.empty()) {
    Series l_sum{"l_sum", "#d62728", {}, {}};
    Series l_ipix{"l_ipix", "#1f77b4", {}, {}};
    Series alpha{"alpha", "#2ca02c", {}, {}};
    for (const LogRow& r : rows) {
      const double it = static_cast<double>(r.iter);
      l_sum.x.push_back(it);
      l_sum.y.push_back(r.l_sum);
      l_ipix.x.push_back(it);
      l_ipix.y.push_back(r.l_ipix);
      alpha.x.push_back(it);
      alpha.y.push_back(r.alpha);
    }
    const auto path = out_dir / "loss_curve.svg";
    write_text(path, render_svg({l_sum, l_ipix, alpha}, "Training losses", "iteration"));
    result.written.push_back(path);

    Series miou{"mIoU", "#9467bd", {}, {}};
    for (const LogRow& r : rows) {
      if (r.miou >= 0.0) {
        miou.x.push_back(static_cast<double>(r.epoch));
        miou.y.push_back(r.miou);
      }
    }
    if (miou.x.empty()) {
      result.warnings.push_back("run has no evaluation points; no mIoU curve");
    } else {
      const auto mpath = out_dir / "miou_curve.svg";
      write_text(mpath, render_svg({miou}, "Evaluation mIoU", "epoch"));
      result.written.push_back(mpath);
    }
  }

  // qualitative dumps need the checkpoint and the dataset
  if (!std::filesystem::exists(run_dir / "checkpoint.json") ||
      !std::filesystem::exists(run_dir / "config.txt")) {
    result.warnings.push_back("checkpoint or config missing; no prediction dumps");
    return result;
  }
  const Checkpoint ckpt = load_checkpoint(run_dir / "checkpoint.json");
  std::ifstream cf(run_dir / "config.txt");
  std::ostringstream cbuf;
  cbuf << cf.rdbuf();
  const RunConfig cfg = parse_run_config_text(cbuf.str());
  if (!std::filesystem::exists(cfg.dataset)) {
    result.warnings.push_back("dataset not found at " + cfg.dataset +
                              "; no prediction dumps");
    return result;
  }
  const data::Dataset dataset = data::load_dataset(cfg.dataset);
  std::vector<bool> labeled(dataset.manifest.count, false);
  for (std::size_t i : dataset.manifest.labeled_indices) labeled[i] = true;

  const std::size_t h = dataset.manifest.height;
  const std::size_t w = dataset.manifest.width;
  std::size_t dumped = 0;
  for (std::size_t i = 0; i < dataset.manifest.count && dumped < 4; ++i) {
    if (labeled[i]) continue;
    const Tensor logits = model::forward(ckpt.student, dataset.samples[i].image);
    const pseudo::PseudoLabelMap pred = pseudo::hard_pseudo_label(logits);

    std::vector<std::uint8_t> img_rgb(h * w * 3), pred_rgb(h * w * 3), gt_rgb(h * w * 3);
    for (std::size_t j = 0; j < h * w; ++j) {
      for (std::size_t ch = 0; ch < 3; ++ch) {
        img_rgb[j * 3 + ch] = static_cast<std::uint8_t>(
            std::clamp(dataset.samples[i].image.data[ch * h * w + j], 0.0, 1.0) * 255.0);
      }
      palette_color(pred.labels[j], &pred_rgb[j * 3]);
      palette_color(dataset.eval_labels[i][j], &gt_rgb[j * 3]);
    }
    const std::string stem = "sample_" + std::to_string(i);
    write_ppm(out_dir / (stem + "_image.ppm"), h, w, img_rgb);
    write_ppm(out_dir / (stem + "_pred.ppm"), h, w, pred_rgb);
    write_ppm(out_dir / (stem + "_truth.ppm"), h, w, gt_rgb);
    result.written.push_back(out_dir / (stem + "_pred.ppm"));
    ++dumped;
  }
  return result;
}

}  // namespace ipix::harness
