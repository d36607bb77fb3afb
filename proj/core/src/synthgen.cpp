#include "sdcn/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>

#include "sdcn/errors.hpp"
#include "sdcn/rng.hpp"

namespace sdcn {

namespace {

using nlohmann::json;

VecF load_template_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("dictionary: cannot open template CSV '" + path.string() + "'");
  std::vector<float> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    // accept either bare values or "channel,value" rows; skip a header line
    const auto comma = line.find(',');
    const std::string cell = comma == std::string::npos ? line : line.substr(comma + 1);
    try {
      values.push_back(std::stof(cell));
    } catch (const std::logic_error&) {
      if (values.empty()) continue;  // header
      throw FormatError("dictionary: malformed template CSV '" + path.string() + "'");
    }
  }
  VecF out(static_cast<Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i)
    out(static_cast<Index>(i)) = values[i];
  return out;
}

void validate_dictionary(const SpectralDictionary& dict) {
  if (dict.entries.empty())
    throw InvalidArgumentError("dictionary: needs at least one entry");
  if (dict.depth < 1) throw InvalidArgumentError("dictionary: depth must be positive");
  std::set<std::string> labels;
  for (const auto& e : dict.entries) {
    if (e.template_spectrum.size() != dict.depth)
      throw InvalidArgumentError("dictionary: entry '" + e.label +
                                 "' template length does not match depth");
    if ((e.template_spectrum.array() < 0.0f).any())
      throw InvalidArgumentError("dictionary: entry '" + e.label +
                                 "' template has negative values");
    if (!labels.insert(e.label).second)
      throw InvalidArgumentError("dictionary: duplicate label '" + e.label + "'");
  }
}

}  // namespace

SpectralDictionary load_dictionary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_dictionary: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError(std::string("dictionary: JSON parse error: ") + e.what());
  }
  SpectralDictionary dict;
  try {
    dict.depth = j.at("depth").get<Index>();
    dict.axis.unit = j.value("channel_unit", std::string("channel"));
    dict.axis.start = j.value("channel_start", 0.0);
    dict.axis.step = j.value("channel_step", 1.0);
    for (const auto& je : j.at("entries")) {
      DictionaryEntry entry;
      entry.label = je.at("label").get<std::string>();
      const auto rgb = je.at("rgb");
      if (!rgb.is_array() || rgb.size() != 3)
        throw FormatError("dictionary: rgb must be [r,g,b]");
      for (int c = 0; c < 3; ++c)
        entry.rgb[static_cast<std::size_t>(c)] =
            static_cast<std::uint8_t>(rgb.at(c).get<int>());
      if (je.contains("template")) {
        const auto& t = je.at("template");
        entry.template_spectrum.resize(static_cast<Index>(t.size()));
        for (std::size_t i = 0; i < t.size(); ++i)
          entry.template_spectrum(static_cast<Index>(i)) = t.at(i).get<float>();
      } else if (je.contains("template_csv_path")) {
        const std::filesystem::path base = std::filesystem::path(path).parent_path();
        entry.template_spectrum =
            load_template_csv(base / je.at("template_csv_path").get<std::string>());
      } else {
        throw FormatError("dictionary: entry '" + entry.label +
                          "' needs template or template_csv_path");
      }
      dict.entries.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("dictionary: field error: ") + e.what());
  }
  validate_dictionary(dict);
  return dict;
}

void save_dictionary(const SpectralDictionary& dict, const std::string& path) {
  validate_dictionary(dict);
  json j;
  j["depth"] = dict.depth;
  j["channel_unit"] = dict.axis.unit;
  j["channel_start"] = dict.axis.start;
  j["channel_step"] = dict.axis.step;
  json entries = json::array();
  for (const auto& e : dict.entries) {
    json je;
    je["label"] = e.label;
    je["rgb"] = {e.rgb[0], e.rgb[1], e.rgb[2]};
    std::vector<float> tmpl(e.template_spectrum.data(),
                            e.template_spectrum.data() + e.template_spectrum.size());
    je["template"] = tmpl;
    entries.push_back(std::move(je));
  }
  j["entries"] = std::move(entries);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("save_dictionary: cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
}

VecF synth_line_spectrum(const LineList& list, std::uint64_t seed) {
  if (list.depth < 1)
    throw InvalidArgumentError("synth_line_spectrum: depth must be positive");
  if (list.sigma_physical_hi < list.sigma_physical_lo || list.sigma_physical_lo < 0.0)
    throw InvalidArgumentError("synth_line_spectrum: invalid physical width range");
  const double lo = list.grid.start;
  const double hi = list.grid.start + list.grid.step * static_cast<double>(list.depth - 1);
  for (const auto& line : list.lines) {
    if (line.center < lo || line.center > hi)
      throw InvalidArgumentError("synth_line_spectrum: line at " +
                                 std::to_string(line.center) +
                                 " lies outside the grid span [" +
                                 std::to_string(lo) + ", " + std::to_string(hi) + "]");
    if (line.flux < 0.0)
      throw InvalidArgumentError("synth_line_spectrum: negative line flux");
  }

  Rng rng(seed);
  VecD acc = VecD::Zero(list.depth);
  for (const auto& line : list.lines) {
    const double sigma_phys =
        rng.uniform(list.sigma_physical_lo, list.sigma_physical_hi);
    const double sigma2 = list.sigma_instrumental * list.sigma_instrumental +
                          sigma_phys * sigma_phys;
    const double sigma = std::sqrt(sigma2);
    if (!(sigma > 0.0))
      throw InvalidArgumentError("synth_line_spectrum: zero line width");
    const double amp = line.flux / (sigma * std::sqrt(2.0 * std::numbers::pi));
    for (Index e = 0; e < list.depth; ++e) {
      const double x = list.grid.start + list.grid.step * static_cast<double>(e);
      const double d = (x - line.center) / sigma;
      acc(e) += amp * std::exp(-0.5 * d * d);
    }
  }
  if (list.noise_std > 0.0)
    for (Index e = 0; e < list.depth; ++e) acc(e) += rng.normal(0.0, list.noise_std);
  return acc.cast<float>();
}

VecF mix_models(const VecF& a, const VecF& b, double w) {
  if (a.size() != b.size()) throw ShapeError("mix_models: grid mismatch");
  return (w * a.cast<double>() + (1.0 - w) * b.cast<double>()).cast<float>();
}

VecF mix_models(const VecF& a, const VecF& b, std::uint64_t seed) {
  Rng rng(seed);
  return mix_models(a, b, rng.uniform());
}

namespace {

double rgb_distance(const Eigen::RowVector3d& a, const Eigen::RowVector3d& b) {
  return (a - b).norm();
}

// max possible RGB distance; normalizes distances into [0,1]
const double kRgbNorm = 255.0 * std::sqrt(3.0);

}  // namespace

LabeledCube generate_cube(const RgbImage& rgb, const SpectralDictionary& dict,
                          const GenConfig& cfg) {
  validate_dictionary(dict);
  if (rgb.width < 1 || rgb.height < 1)
    throw InvalidArgumentError("generate_cube: empty seed image");
  if (cfg.rgb_threshold <= 0.0 || cfg.rgb_threshold > 1.0)
    throw InvalidArgumentError("generate_cube: rgb_threshold must be in (0,1]");
  if (cfg.counts_scale <= 0.0)
    throw InvalidArgumentError("generate_cube: counts_scale must be positive");
  if (cfg.noise == NoiseKind::kGaussian && cfg.gaussian_noise_std < 0.0)
    throw InvalidArgumentError("generate_cube: negative noise std");

  const Index n = rgb.width * rgb.height;
  MatD points(n, 3);
  for (Index p = 0; p < n; ++p)
    for (int c = 0; c < 3; ++c)
      points(p, c) = static_cast<double>(rgb.pixels[static_cast<std::size_t>(3 * p + c)]);

  // 1) iterative K-Means in RGB space
  KRange krange = cfg.rgb_krange;
  krange.n_f = static_cast<int>(std::min<Index>(krange.n_f, n - 1));
  krange.n_i = std::min(krange.n_i, krange.n_f);
  const ClusteringResult rgb_clusters = iterative_kmeans(
      points, krange, KmeansInit::kPlusPlus, Rng::mix(cfg.seed, 0xC1));

  // 2) merge near-identical centroids under the normalized threshold
  const int k = rgb_clusters.k;
  std::vector<int> parent(static_cast<std::size_t>(k));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[static_cast<std::size_t>(a)] != a) a = parent[static_cast<std::size_t>(a)];
    return a;
  };
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b)
      if (rgb_distance(rgb_clusters.centroids.row(a), rgb_clusters.centroids.row(b)) /
              kRgbNorm <
          cfg.rgb_threshold) {
        const int ra = find(a), rb = find(b);
        if (ra != rb) parent[static_cast<std::size_t>(std::max(ra, rb))] = std::min(ra, rb);
      }

  std::vector<Index> counts(static_cast<std::size_t>(k), 0);
  for (int label : rgb_clusters.assignments) ++counts[static_cast<std::size_t>(label)];
  std::vector<int> group_of(static_cast<std::size_t>(k));
  std::vector<int> group_ids;
  for (int c = 0; c < k; ++c) {
    const int root = find(c);
    auto it = std::find(group_ids.begin(), group_ids.end(), root);
    if (it == group_ids.end()) {
      group_of[static_cast<std::size_t>(c)] = static_cast<int>(group_ids.size());
      group_ids.push_back(root);
    } else {
      group_of[static_cast<std::size_t>(c)] =
          static_cast<int>(std::distance(group_ids.begin(), it));
    }
  }
  const int n_groups = static_cast<int>(group_ids.size());
  MatD group_centroid = MatD::Zero(n_groups, 3);
  VecD group_weight = VecD::Zero(n_groups);
  for (int c = 0; c < k; ++c) {
    const int g = group_of[static_cast<std::size_t>(c)];
    group_centroid.row(g) +=
        rgb_clusters.centroids.row(c) * static_cast<double>(counts[static_cast<std::size_t>(c)]);
    group_weight(g) += static_cast<double>(counts[static_cast<std::size_t>(c)]);
  }
  for (int g = 0; g < n_groups; ++g) group_centroid.row(g) /= group_weight(g);

  // 3) nearest dictionary entry per merged group; beyond-threshold groups
  // fall back to the background class
  const int background_id = static_cast<int>(dict.entries.size());
  std::vector<int> group_label(static_cast<std::size_t>(n_groups), background_id);
  for (int g = 0; g < n_groups; ++g) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < dict.entries.size(); ++e) {
      Eigen::RowVector3d ergb(static_cast<double>(dict.entries[e].rgb[0]),
                              static_cast<double>(dict.entries[e].rgb[1]),
                              static_cast<double>(dict.entries[e].rgb[2]));
      const double d = rgb_distance(group_centroid.row(g), ergb);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(e);
      }
    }
    if (best >= 0 && best_d / kRgbNorm <= cfg.rgb_threshold)
      group_label[static_cast<std::size_t>(g)] = best;
  }

  LabeledCube out;
  out.cube = DataCube::zeros(rgb.width, rgb.height, dict.depth, dict.axis);
  out.labels.resize(static_cast<std::size_t>(n));
  for (std::size_t e = 0; e < dict.entries.size(); ++e)
    out.legend.push_back({static_cast<int>(e), dict.entries[e].label,
                          dict.entries[e].rgb, static_cast<int>(e)});
  out.legend.push_back({background_id, "background", {0, 0, 0}, -1});

  const std::uint64_t pixel_stream = Rng::mix(cfg.seed, 0x9B1E15);
  for (Index p = 0; p < n; ++p) {
    const int g =
        group_of[static_cast<std::size_t>(rgb_clusters.assignments[static_cast<std::size_t>(p)])];
    const int label = group_label[static_cast<std::size_t>(g)];
    out.labels[static_cast<std::size_t>(p)] = label;
    Rng rng(Rng::mix(pixel_stream, static_cast<std::uint64_t>(p)));
    float* spec = out.cube.spectrum(p);
    if (label == background_id) {
      if (cfg.noise == NoiseKind::kPoisson) {
        for (Index e = 0; e < dict.depth; ++e)
          spec[e] = static_cast<float>(rng.poisson(cfg.background_rate));
      } else {
        for (Index e = 0; e < dict.depth; ++e)
          spec[e] = static_cast<float>(rng.normal(0.0, cfg.gaussian_noise_std));
      }
    } else {
      const VecF& tmpl = dict.entries[static_cast<std::size_t>(label)].template_spectrum;
      if (cfg.noise == NoiseKind::kPoisson) {
        for (Index e = 0; e < dict.depth; ++e)
          spec[e] = static_cast<float>(
              rng.poisson(static_cast<double>(tmpl(e)) * cfg.counts_scale));
      } else {
        for (Index e = 0; e < dict.depth; ++e)
          spec[e] = static_cast<float>(static_cast<double>(tmpl(e)) * cfg.counts_scale +
                                       rng.normal(0.0, cfg.gaussian_noise_std));
      }
    }
  }
  return out;
}

double purity(const std::vector<int>& labels_true,
              const std::vector<std::vector<std::uint8_t>>& masks) {
  if (masks.empty()) throw InvalidArgumentError("purity: no masks");
  const std::size_t n = labels_true.size();
  for (const auto& mask : masks)
    if (mask.size() != n)
      throw ShapeError("purity: mask size does not match the label map");
  int max_label = 0;
  for (int label : labels_true) max_label = std::max(max_label, label);

  std::size_t agree = 0;
  for (const auto& mask : masks) {
    std::vector<std::size_t> hist(static_cast<std::size_t>(max_label + 1), 0);
    for (std::size_t p = 0; p < n; ++p)
      if (mask[p]) ++hist[static_cast<std::size_t>(labels_true[p])];
    agree += *std::max_element(hist.begin(), hist.end());
  }
  return static_cast<double>(agree) / static_cast<double>(n);
}

void save_legend(const std::vector<LegendEntry>& legend, const std::string& path) {
  json j = json::array();
  for (const auto& e : legend) {
    json je;
    je["id"] = e.id;
    je["label"] = e.label;
    je["rgb"] = {e.rgb[0], e.rgb[1], e.rgb[2]};
    je["dictionary_index"] = e.dictionary_index;
    j.push_back(std::move(je));
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("save_legend: cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
}

std::vector<LegendEntry> load_legend(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_legend: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError(std::string("legend: JSON parse error: ") + e.what());
  }
  std::vector<LegendEntry> legend;
  try {
    for (const auto& je : j) {
      LegendEntry e;
      e.id = je.at("id").get<int>();
      e.label = je.at("label").get<std::string>();
      for (int c = 0; c < 3; ++c)
        e.rgb[static_cast<std::size_t>(c)] =
            static_cast<std::uint8_t>(je.at("rgb").at(c).get<int>());
      e.dictionary_index = je.at("dictionary_index").get<int>();
      legend.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("legend: field error: ") + e.what());
  }
  return legend;
}

}  // namespace sdcn
