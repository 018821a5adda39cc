// License: Apache 2.0. See LICENSE file in root directory.

#include "fstack/metrics.hpp"

#include "fstack/filters.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

namespace fstack {

namespace {

void check_pair(const RgbImage& a, const RgbImage& b, int ignore_border) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "image dimensions differ");
  require(ignore_border >= 0, "negative border");
  require(2 * Index{ignore_border} < std::min(a.rows(), a.cols()),
          "ignore_border leaves no interior");
}

PlaneD to_double(const PlaneF& p, int crop) {
  return p.block(crop, crop, p.rows() - 2 * crop, p.cols() - 2 * crop)
      .cast<double>();
}

constexpr int kSsimRadius = 5;  // 11x11 window

std::vector<double> ssim_window() {
  std::vector<double> k(2 * kSsimRadius + 1);
  const double sigma = 1.5;
  double sum = 0;
  for (int i = 0; i < static_cast<int>(k.size()); ++i) {
    const double d = i - kSsimRadius;
    k[i] = std::exp(-d * d / (2 * sigma * sigma));
    sum += k[i];
  }
  for (auto& v : k) v /= sum;
  return k;
}

double ssim_channel(const PlaneD& a, const PlaneD& b) {
  static const std::vector<double> win = ssim_window();
  const PlaneD mu_a = filter_separable(a, win);
  const PlaneD mu_b = filter_separable(b, win);
  const PlaneD mu_aa = filter_separable(PlaneD(a * a), win);
  const PlaneD mu_bb = filter_separable(PlaneD(b * b), win);
  const PlaneD mu_ab = filter_separable(PlaneD(a * b), win);

  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  double total = 0;
  long count = 0;
  // Only positions where the full window fits, so the replicated border taps
  // never contribute.
  for (Index y = kSsimRadius; y < a.rows() - kSsimRadius; ++y)
    for (Index x = kSsimRadius; x < a.cols() - kSsimRadius; ++x) {
      const double ma = mu_a(y, x), mb = mu_b(y, x);
      const double va = mu_aa(y, x) - ma * ma;
      const double vb = mu_bb(y, x) - mb * mb;
      const double cov = mu_ab(y, x) - ma * mb;
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) /
               ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  return total / count;
}

nlohmann::json metric_value(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double parse_metric(const nlohmann::json& v) {
  if (v.is_string())
    return v.get<std::string>() == "-inf" ? -std::numeric_limits<double>::infinity()
                                          : std::numeric_limits<double>::infinity();
  return v.get<double>();
}

}  // namespace

double psnr(const RgbImage& a, const RgbImage& b, double peak, int ignore_border) {
  check_pair(a, b, ignore_border);
  require(peak > 0, "peak must be positive");
  const Index ib = ignore_border;
  const Index rows = a.rows() - 2 * ib, cols = a.cols() - 2 * ib;
  double se = 0;
  for (int c = 0; c < 3; ++c)
    for (Index y = 0; y < rows; ++y)
      for (Index x = 0; x < cols; ++x) {
        const double d = double(a.ch[c](y + ib, x + ib)) - double(b.ch[c](y + ib, x + ib));
        se += d * d;
      }
  const double mse = se / (3.0 * rows * cols);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const RgbImage& a, const RgbImage& b, int ignore_border) {
  check_pair(a, b, ignore_border);
  require(std::min(a.rows(), a.cols()) - 2 * Index{ignore_border} >= 2 * kSsimRadius + 1,
          "image smaller than the SSIM window");
  double total = 0;
  for (int c = 0; c < 3; ++c)
    total += ssim_channel(to_double(a.ch[c], ignore_border),
                          to_double(b.ch[c], ignore_border));
  return total / 3.0;
}

QualityReport evaluate(const std::vector<std::pair<std::string, RgbImage>>& outputs,
                       const std::vector<std::pair<std::string, RgbImage>>& ground_truths,
                       int ignore_border) {
  require(!outputs.empty(), "no items");
  require(outputs.size() == ground_truths.size(), "id mismatch");
  std::map<std::string, const RgbImage*> gt;
  for (const auto& [id, im] : ground_truths) gt[id] = &im;

  QualityReport report;
  report.ignore_border = ignore_border;
  for (const auto& [id, im] : outputs) {
    auto it = gt.find(id);
    require(it != gt.end(), "id mismatch: " + id);
    QualityItem item;
    item.id = id;
    item.psnr = psnr(im, *it->second, 1.0, ignore_border);
    item.ssim = ssim(im, *it->second, ignore_border);
    report.items.push_back(std::move(item));
  }
  std::sort(report.items.begin(), report.items.end(),
            [](const QualityItem& a, const QualityItem& b) { return a.id < b.id; });
  double psum = 0, ssum = 0;
  for (const auto& item : report.items) {
    psum += item.psnr;
    ssum += item.ssim;
  }
  report.mean_psnr = psum / report.items.size();
  report.mean_ssim = ssum / report.items.size();
  return report;
}

void save_report(const std::filesystem::path& path, const QualityReport& report) {
  nlohmann::json root;
  root["ignore_border"] = report.ignore_border;
  auto& items = root["items"] = nlohmann::json::array();
  for (const auto& item : report.items) {
    items.push_back({{"id", item.id},
                     {"psnr", metric_value(item.psnr)},
                     {"ssim", metric_value(item.ssim)}});
  }
  root["mean_psnr"] = metric_value(report.mean_psnr);
  root["mean_ssim"] = metric_value(report.mean_ssim);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << root.dump(2) << "\n";
}

QualityReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  nlohmann::json root;
  try {
    in >> root;
    QualityReport report;
    report.ignore_border = root.at("ignore_border").get<int>();
    for (const auto& j : root.at("items"))
      report.items.push_back({j.at("id").get<std::string>(),
                              parse_metric(j.at("psnr")), parse_metric(j.at("ssim"))});
    report.mean_psnr = parse_metric(root.at("mean_psnr"));
    report.mean_ssim = parse_metric(root.at("mean_ssim"));
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad report " + path.string() + ": " + e.what());
  }
}

}  // namespace fstack
