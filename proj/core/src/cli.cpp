#include "sdcn/cli.hpp"

#include <Eigen/Core>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <set>
#include <vector>

#include "sdcn/clustering.hpp"
#include "sdcn/datacube.hpp"
#include "sdcn/deep_cluster.hpp"
#include "sdcn/errors.hpp"
#include "sdcn/image.hpp"
#include "sdcn/model_io.hpp"
#include "sdcn/synthgen.hpp"

namespace sdcn {
namespace cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  try {
    json j;
    in >> j;
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    return j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }
}

// anti-typo contract: every key must be known
void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::string& context) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key))
      throw ConfigError("config: unknown key '" + key + "' in " + context);
}

template <typename T>
T require(const json& obj, const std::string& key, const std::string& context) {
  if (!obj.contains(key))
    throw ConfigError("config: missing key '" + key + "' in " + context);
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: key '" + key + "' in " + context + " has the wrong type");
  }
}

template <typename T>
T value_or(const json& obj, const std::string& key, const std::string& context, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: key '" + key + "' in " + context + " has the wrong type");
  }
}

std::string require_path(const json& obj, const std::string& key,
                         const std::string& context) {
  const std::string path = require<std::string>(obj, key, context);
  if (!fs::exists(path))
    throw ConfigError("config: key '" + key + "' points to missing path '" + path + "'");
  return path;
}

KRange parse_krange(const json& obj, const std::string& key,
                    const std::string& context, KRange fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& arr = obj.at(key);
  if (!arr.is_array() || arr.size() != 2)
    throw ConfigError("config: key '" + key + "' in " + context + " must be [n_i, n_f]");
  KRange range;
  range.n_i = arr.at(0).get<int>();
  range.n_f = arr.at(1).get<int>();
  if (range.n_i < 2 || range.n_f < range.n_i)
    throw ConfigError("config: key '" + key + "' in " + context +
                      " must satisfy 2 <= n_i <= n_f");
  return range;
}

KmeansInit parse_init(const json& obj, const std::string& context) {
  const std::string init = value_or<std::string>(obj, "init", context, "kpp");
  if (init == "kpp") return KmeansInit::kPlusPlus;
  if (init == "random") return KmeansInit::kRandom;
  throw ConfigError("config: init must be 'kpp' or 'random' in " + context);
}

Schedule parse_schedule(const json& obj, const std::string& key,
                        const std::string& context, Schedule fallback) {
  if (!obj.contains(key)) return fallback;
  const json& s = obj.at(key);
  if (s.is_number()) return Schedule::constant(s.get<double>());
  if (!s.is_object())
    throw ConfigError("config: schedule '" + key + "' must be a number or object");
  require_keys(s, {"kind", "value", "start_epoch", "points"}, context + "." + key);
  const std::string kind = require<std::string>(s, "kind", context + "." + key);
  if (kind == "constant")
    return Schedule::constant(require<double>(s, "value", context + "." + key));
  if (kind == "step")
    return Schedule::step(require<double>(s, "value", context + "." + key),
                          require<int>(s, "start_epoch", context + "." + key));
  if (kind == "table") {
    std::vector<std::pair<int, double>> pts;
    for (const auto& p : s.at("points"))
      pts.emplace_back(p.at(0).get<int>(), p.at(1).get<double>());
    return Schedule::piecewise(std::move(pts));
  }
  throw ConfigError("config: schedule kind must be constant|step|table in " + context);
}

ArchitectureSpec parse_arch(const json& obj, const std::string& context) {
  require_keys(obj,
               {"input_dim", "latent_dim", "sizing_rule", "hidden_layers",
                "encoder_sizes", "decoder_sizes", "variant", "dropout_p"},
               context);
  ArchitectureSpec spec;
  spec.input_dim = require<Index>(obj, "input_dim", context);
  spec.latent_dim = require<Index>(obj, "latent_dim", context);
  const std::string rule = value_or<std::string>(obj, "sizing_rule", context, "pow2");
  if (rule == "explicit")
    spec.sizing_rule = SizingRule::kExplicit;
  else if (rule == "half_k")
    spec.sizing_rule = SizingRule::kHalfK;
  else if (rule == "pow2")
    spec.sizing_rule = SizingRule::kPow2;
  else
    throw ConfigError("config: sizing_rule must be explicit|half_k|pow2 in " + context);
  spec.hidden_layers = value_or<int>(obj, "hidden_layers", context, 2);
  spec.encoder_sizes = value_or<std::vector<Index>>(obj, "encoder_sizes", context, {});
  spec.decoder_sizes = value_or<std::vector<Index>>(obj, "decoder_sizes", context, {});
  const std::string variant = value_or<std::string>(obj, "variant", context, "snn");
  if (variant == "snn")
    spec.variant = Variant::kSnn;
  else if (variant == "mlp")
    spec.variant = Variant::kMlp;
  else
    throw ConfigError("config: variant must be snn|mlp in " + context);
  spec.dropout_p = value_or<double>(obj, "dropout_p", context, 0.0);
  // surface architecture problems at validation time, not mid-run
  try {
    plan_layer_sizes(spec);
    plan_decoder_sizes(spec);
    detail::validate_build_spec(spec);
  } catch (const InvalidArgumentError& e) {
    throw ConfigError(std::string("config: invalid architecture: ") + e.what());
  }
  return spec;
}

void info(const Overrides& overrides, const std::string& message) {
  if (!overrides.quiet) std::cout << message << '\n';
}

int guard(const Overrides& overrides, const char* command,
          int (*body)(const json&, const Overrides&), const std::string& config_path) {
  try {
    const json cfg = load_config(config_path);
    return body(cfg, overrides);
  } catch (const ConfigError& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return kExitRuntime;
  }
}

std::string format_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void write_map_csv(const MatD& map, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  for (Index j = 0; j < map.rows(); ++j) {
    for (Index i = 0; i < map.cols(); ++i) {
      if (i) out << ',';
      out << format_g9(map(j, i));
    }
    out << '\n';
  }
}

int generate_body(const json& cfg, const Overrides& overrides) {
  require_keys(cfg,
               {"seed", "rgb_image", "dictionary", "out_dir", "cube_name",
                "rgb_threshold", "counts_scale", "noise", "gaussian_noise_std",
                "background_rate", "rgb_krange"},
               "generate");
  GenConfig gen;
  gen.seed = overrides.seed ? *overrides.seed
                            : require<std::uint64_t>(cfg, "seed", "generate");
  const std::string image_path = require_path(cfg, "rgb_image", "generate");
  const std::string dict_path = require_path(cfg, "dictionary", "generate");
  const std::string out_dir = overrides.out_dir
                                  ? *overrides.out_dir
                                  : require<std::string>(cfg, "out_dir", "generate");
  const std::string name = value_or<std::string>(cfg, "cube_name", "generate", "cube");
  gen.rgb_threshold = value_or<double>(cfg, "rgb_threshold", "generate", 0.2);
  gen.counts_scale = value_or<double>(cfg, "counts_scale", "generate", 1.0);
  const std::string noise = value_or<std::string>(cfg, "noise", "generate", "poisson");
  if (noise == "poisson")
    gen.noise = NoiseKind::kPoisson;
  else if (noise == "gaussian")
    gen.noise = NoiseKind::kGaussian;
  else
    throw ConfigError("config: noise must be poisson|gaussian in generate");
  gen.gaussian_noise_std = value_or<double>(cfg, "gaussian_noise_std", "generate", 0.0);
  gen.background_rate = value_or<double>(cfg, "background_rate", "generate", 0.0);
  gen.rgb_krange = parse_krange(cfg, "rgb_krange", "generate", KRange{2, 10});

  const RgbImage seed_image = read_ppm(image_path);
  const SpectralDictionary dict = load_dictionary(dict_path);
  const LabeledCube labeled = generate_cube(seed_image, dict, gen);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  save_cube(labeled.cube, (dir / (name + ".dcube")).string());
  GrayImage labels;
  labels.width = labeled.cube.width;
  labels.height = labeled.cube.height;
  labels.pixels.resize(labeled.labels.size());
  for (std::size_t p = 0; p < labeled.labels.size(); ++p)
    labels.pixels[p] = static_cast<std::uint8_t>(labeled.labels[p]);
  write_pgm(labels, (dir / (name + "_labels.pgm")).string());
  save_legend(labeled.legend, (dir / (name + "_legend.json")).string());
  info(overrides, "generate: wrote " + (dir / (name + ".dcube")).string());
  return kExitOk;
}

int train_body(const json& cfg, const Overrides& overrides) {
  require_keys(cfg, {"seed", "dataset", "out_dir", "model_name", "arch", "train"},
               "train");
  TrainConfig tc;
  tc.seed =
      overrides.seed ? *overrides.seed : require<std::uint64_t>(cfg, "seed", "train");

  std::vector<std::string> dataset_paths;
  if (cfg.contains("dataset") && cfg.at("dataset").is_array())
    for (const auto& p : cfg.at("dataset"))
      dataset_paths.push_back(p.get<std::string>());
  else
    dataset_paths.push_back(require<std::string>(cfg, "dataset", "train"));
  for (const auto& p : dataset_paths)
    if (!fs::exists(p))
      throw ConfigError("config: key 'dataset' points to missing path '" + p + "'");

  const std::string out_dir = overrides.out_dir
                                  ? *overrides.out_dir
                                  : require<std::string>(cfg, "out_dir", "train");
  const std::string model_name =
      value_or<std::string>(cfg, "model_name", "train", "model.sdcn");
  if (!cfg.contains("arch"))
    throw ConfigError("config: missing key 'arch' in train");
  const ArchitectureSpec arch = parse_arch(cfg.at("arch"), "train.arch");

  const json tj = cfg.contains("train") ? cfg.at("train") : json::object();
  require_keys(tj,
               {"epochs", "batch_size", "val_fraction", "learning_rate", "variant",
                "gamma", "beta", "krange", "init", "silhouette_cap", "mmd"},
               "train.train");
  tc.epochs = value_or<int>(tj, "epochs", "train.train", 30);
  tc.batch_size = value_or<Index>(tj, "batch_size", "train.train", 256);
  tc.val_fraction = value_or<double>(tj, "val_fraction", "train.train", 0.2);
  tc.adam.learning_rate =
      static_cast<float>(value_or<double>(tj, "learning_rate", "train.train", 1e-3));
  const std::string variant = value_or<std::string>(tj, "variant", "train.train", "plain");
  if (variant == "plain")
    tc.variant = DcVariant::kPlainDcn;
  else if (variant == "vade_mmd")
    tc.variant = DcVariant::kVadeMmd;
  else
    throw ConfigError("config: variant must be plain|vade_mmd in train.train");
  tc.gamma = parse_schedule(tj, "gamma", "train.train", Schedule::constant(0.0));
  tc.beta = parse_schedule(tj, "beta", "train.train", Schedule::constant(0.0));
  tc.krange = parse_krange(tj, "krange", "train.train", KRange{2, 8});
  tc.init = parse_init(tj, "train.train");
  tc.silhouette_cap = value_or<Index>(tj, "silhouette_cap", "train.train", 1024);
  if (tj.contains("mmd")) {
    const json& mj = tj.at("mmd");
    require_keys(mj, {"bandwidth_sq", "median_heuristic", "prior_samples"}, "train.train.mmd");
    tc.mmd.bandwidth_sq = value_or<double>(mj, "bandwidth_sq", "train.train.mmd", 0.0);
    tc.mmd.median_heuristic =
        value_or<bool>(mj, "median_heuristic", "train.train.mmd", false);
    tc.mmd.prior_samples = value_or<Index>(mj, "prior_samples", "train.train.mmd", 0);
  }

  // stack the flattened spectra of every dataset cube
  Index total_rows = 0;
  Index depth = 0;
  std::vector<DataCube> cubes;
  for (const auto& p : dataset_paths) {
    cubes.push_back(load_cube(p));
    if (depth == 0)
      depth = cubes.back().depth;
    else if (cubes.back().depth != depth)
      throw DataError("train: dataset cubes disagree on depth");
    total_rows += cubes.back().pixels();
  }
  MatF spectra(total_rows, depth);
  Index at = 0;
  for (const auto& cube : cubes) {
    spectra.middleRows(at, cube.pixels()) = cube.as_matrix();
    at += cube.pixels();
  }
  cubes.clear();

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  tc.log_path = (dir / "training_log.ndjson").string();

  const TrainResult result = train(spectra, arch, tc);

  json meta;
  meta["epochs"] = tc.epochs;
  meta["batch_size"] = tc.batch_size;
  meta["seed"] = tc.seed;
  meta["variant"] = variant;
  meta["best_epoch"] = result.best_epoch;
  meta["best_val_l_rec"] = result.best_val_l_rec;
  save_model(result.model, (dir / model_name).string(), meta.dump());
  info(overrides, "train: best epoch " + std::to_string(result.best_epoch) +
                      ", wrote " + (dir / model_name).string());
  return kExitOk;
}

int segment_body(const json& cfg, const Overrides& overrides) {
  require_keys(cfg, {"seed", "cube", "model", "out_dir", "krange", "init", "integrated"},
               "segment");
  const std::uint64_t seed = overrides.seed
                                 ? *overrides.seed
                                 : require<std::uint64_t>(cfg, "seed", "segment");
  const std::string cube_path = require_path(cfg, "cube", "segment");
  const std::string model_path = require_path(cfg, "model", "segment");
  const std::string out_dir = overrides.out_dir
                                  ? *overrides.out_dir
                                  : require<std::string>(cfg, "out_dir", "segment");
  const KRange krange = parse_krange(cfg, "krange", "segment", KRange{2, 8});
  const KmeansInit init = parse_init(cfg, "segment");
  const bool integrated =
      overrides.integrated || value_or<bool>(cfg, "integrated", "segment", false);

  const DataCube cube = load_cube(cube_path);
  const AutoEncoder<float> model = load_model(model_path);
  const SegmentationResult result = segment(cube, model, krange, init, seed);
  export_result(result, out_dir);
  if (integrated) {
    const IntegratedMaps maps = integrated_maps(cube, model);
    const fs::path dir(out_dir);
    write_map_csv(maps.true_map, (dir / "integrated_true.csv").string());
    write_map_csv(maps.decoded_map, (dir / "integrated_decoded.csv").string());
    write_map_csv(maps.embedded_map, (dir / "integrated_embedded.csv").string());
  }
  info(overrides, "segment: k = " + std::to_string(result.k) + ", silhouette = " +
                      format_g9(result.silhouette) + ", wrote " + out_dir);
  return kExitOk;
}

int eval_body(const json& cfg, const Overrides& overrides) {
  require_keys(cfg, {"labels", "segmentation_dir", "out"}, "eval");
  const std::string labels_path = require_path(cfg, "labels", "eval");
  const std::string seg_dir = require_path(cfg, "segmentation_dir", "eval");
  const std::string out_path =
      overrides.out_dir.has_value()
          ? (fs::path(*overrides.out_dir) / "metrics.json").string()
          : require<std::string>(cfg, "out", "eval");

  const GrayImage labels_img = read_pgm(labels_path);
  std::vector<int> labels(labels_img.pixels.begin(), labels_img.pixels.end());

  const fs::path dir(seg_dir);
  std::ifstream sj(dir / "summary.json");
  if (!sj) throw ConfigError("config: segmentation_dir has no summary.json");
  json summary;
  try {
    sj >> summary;
  } catch (const json::exception& e) {
    throw FormatError(std::string("eval: summary.json parse error: ") + e.what());
  }
  const int k = summary.at("k").get<int>();
  const double silhouette = summary.at("silhouette").get<double>();

  std::vector<std::vector<std::uint8_t>> masks;
  for (int c = 0; c < k; ++c) {
    const GrayImage mask = read_pgm((dir / ("mask_" + std::to_string(c) + ".pgm")).string());
    if (mask.width != labels_img.width || mask.height != labels_img.height)
      throw ShapeError("eval: mask dimensions do not match the label map");
    std::vector<std::uint8_t> bits(mask.pixels.size());
    for (std::size_t p = 0; p < bits.size(); ++p) bits[p] = mask.pixels[p] ? 1 : 0;
    masks.push_back(std::move(bits));
  }

  json metrics;
  metrics["k"] = k;
  metrics["pixels"] = labels_img.width * labels_img.height;
  metrics["purity"] = purity(labels, masks);
  metrics["silhouette"] = silhouette;
  if (const auto parent = fs::path(out_path).parent_path(); !parent.empty())
    fs::create_directories(parent);
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw IoError("eval: cannot write '" + out_path + "'");
  out << metrics.dump(2) << '\n';
  info(overrides, "eval: purity = " + format_g9(metrics["purity"].get<double>()) +
                      ", wrote " + out_path);
  return kExitOk;
}

}  // namespace

int run_generate(const std::string& config_path, const Overrides& overrides) {
  return guard(overrides, "generate", generate_body, config_path);
}

int run_train(const std::string& config_path, const Overrides& overrides) {
  return guard(overrides, "train", train_body, config_path);
}

int run_segment(const std::string& config_path, const Overrides& overrides) {
  return guard(overrides, "segment", segment_body, config_path);
}

int run_eval(const std::string& config_path, const Overrides& overrides) {
  return guard(overrides, "eval", eval_body, config_path);
}

void apply_thread_cap() {
  if (const char* env = std::getenv("SDCN_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) Eigen::setNbThreads(cap);
  }
}

}  // namespace cli
}  // namespace sdcn
