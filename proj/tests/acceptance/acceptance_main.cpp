// Acceptance suite: runs every criterion in order, prints one pass/fail line
// each, and exits with the number of failures. End-to-end artifacts (trained
// models, segmentations) are produced once and reused by later criteria;
// the determinism criterion reruns the trainings from scratch.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sdcn/cli.hpp"
#include "sdcn/clustering.hpp"
#include "sdcn/datacube.hpp"
#include "sdcn/deep_cluster.hpp"
#include "sdcn/model_io.hpp"
#include "sdcn/presets.hpp"
#include "sdcn/synthgen.hpp"

using namespace sdcn;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

int g_failures = 0;

void run_criterion(int id, const std::string& name,
                   const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome outcome;
  try {
    outcome = body();
  } catch (const std::exception& e) {
    outcome.passed = false;
    outcome.detail = std::string("exception: ") + e.what();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", seconds);
  std::cout << (outcome.passed ? "[PASS]" : "[FAIL]") << " criterion " << id << ": "
            << name << " (" << outcome.detail << "; " << buf << " s)" << std::endl;
  if (!outcome.passed) ++g_failures;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(f)), {});
}

// ---------------------------------------------------------------------------
// end-to-end pipeline helpers shared by criteria 5, 6, 8, 10

struct PipelineArtifacts {
  LabeledCube test_cube;
  TrainResult training;
  SegmentationResult segmentation;
  double purity_value = 0.0;
  fs::path dir;
};

struct PipelineSetup {
  SpectralDictionary dict;
  RgbImage train_seed;
  RgbImage test_seed;
  GenConfig gen_train;
  GenConfig gen_test;
  ArchitectureSpec arch;
  TrainConfig train_cfg;
  std::uint64_t segment_seed = 0;
};

PipelineSetup astro_setup() {
  PipelineSetup s;
  s.dict = presets::astro_dictionary();
  s.train_seed = presets::astro_seed_image(144, 144);  // ~20k spectra
  s.test_seed = presets::astro_seed_image(64, 64);
  s.gen_train = presets::astro_gen_config(1001);
  s.gen_test = presets::astro_gen_config(1002);
  s.arch = presets::astro_architecture();
  s.train_cfg = presets::astro_train_config(2024);
  s.segment_seed = 3003;
  return s;
}

PipelineSetup xrf_setup() {
  PipelineSetup s;
  s.dict = presets::xrf_dictionary();
  s.train_seed = presets::xrf_seed_image(128, 128);
  s.test_seed = presets::xrf_seed_image(96, 96);
  s.gen_train = presets::xrf_gen_config(4001);
  s.gen_test = presets::xrf_gen_config(4002);
  s.arch = presets::xrf_architecture();
  s.train_cfg = presets::xrf_train_config(5025);
  s.segment_seed = 6006;
  return s;
}

PipelineArtifacts run_pipeline(const PipelineSetup& s, const fs::path& dir) {
  fs::create_directories(dir);
  PipelineArtifacts art;
  art.dir = dir;

  const LabeledCube train_cube = generate_cube(s.train_seed, s.dict, s.gen_train);
  art.test_cube = generate_cube(s.test_seed, s.dict, s.gen_test);
  save_cube(art.test_cube.cube, (dir / "test.dcube").string());

  const MatF spectra = train_cube.cube.as_matrix();
  TrainConfig cfg = s.train_cfg;
  cfg.log_path = (dir / "training_log.ndjson").string();
  art.training = train(spectra, s.arch, cfg);

  json meta;
  meta["seed"] = cfg.seed;
  meta["epochs"] = cfg.epochs;
  meta["best_epoch"] = art.training.best_epoch;
  save_model(art.training.model, (dir / "model.sdcn").string(), meta.dump());

  art.segmentation = segment(art.test_cube.cube, art.training.model, {2, 8},
                             KmeansInit::kPlusPlus, s.segment_seed);
  export_result(art.segmentation, (dir / "seg").string());
  art.purity_value = purity(art.test_cube.labels, art.segmentation.masks);

  json metrics;
  metrics["k"] = art.segmentation.k;
  metrics["purity"] = art.purity_value;
  metrics["silhouette"] = art.segmentation.silhouette;
  std::ofstream mf(dir / "metrics.json", std::ios::trunc);
  mf << metrics.dump(2) << '\n';
  return art;
}

fs::path work_root() {
  const fs::path root = fs::current_path() / "sdcn_acceptance_work";
  return root;
}

}  // namespace

// ---------------------------------------------------------------------------

int main() {
  fs::remove_all(work_root());
  fs::create_directories(work_root());

  // shared end-to-end artifacts, filled by criteria 5 and 6
  PipelineArtifacts astro, xrf;

  run_criterion(1, "silhouette matches the brute-force oracle", [] {
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
      Rng rng(Rng::mix(0xACC1, trial));
      const Index n = 20 + static_cast<Index>(rng.uniform_int(181));  // <= 200
      const Index dim = 1 + static_cast<Index>(rng.uniform_int(8));
      const int k = 2 + static_cast<int>(rng.uniform_int(5));  // [2, 6]
      const MatD points = oracles::random_points(n, dim, 10.0, trial + 17);
      std::vector<int> labels(static_cast<std::size_t>(n));
      for (Index i = 0; i < n; ++i)
        labels[static_cast<std::size_t>(i)] =
            i < k ? static_cast<int>(i) : static_cast<int>(rng.uniform_int(k));
      const double lib = silhouette_score(points, labels);
      const double oracle = oracles::silhouette_bruteforce(points, labels);
      worst = std::max(worst, std::abs(lib - oracle));
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    Outcome out;
    out.passed = worst < 1e-9 && seconds < 10.0;
    out.detail = "max |lib - oracle| = " + fmt(worst) + " over 100 instances";
    return out;
  });

  run_criterion(2, "backprop matches finite differences for every loss term", [] {
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (int net = 0; net < 20; ++net) {
      Rng rng(Rng::mix(0xACC2, static_cast<std::uint64_t>(net)));
      // random small architecture: dims <= 16, up to 3 encoder layers
      const Index input = 6 + static_cast<Index>(rng.uniform_int(11));
      const Index latent = 2 + static_cast<Index>(rng.uniform_int(2));
      const int hidden = static_cast<int>(rng.uniform_int(2));  // 0 or 1 hidden

      std::vector<DenseLayer<double>> encoder, decoder;
      Index mid = (input + latent) / 2;
      if (hidden && mid > latent) {
        encoder.push_back(kaiming_init<double>(input, mid, rng.next_u64()));
        encoder.back().activation = net % 2 ? Activation::kSelu : Activation::kRelu;
        encoder.push_back(kaiming_init<double>(mid, latent, rng.next_u64()));
        decoder.push_back(kaiming_init<double>(latent, mid, rng.next_u64()));
        decoder.back().activation = Activation::kSelu;
        decoder.push_back(kaiming_init<double>(mid, input, rng.next_u64()));
      } else {
        encoder.push_back(kaiming_init<double>(input, latent, rng.next_u64()));
        decoder.push_back(kaiming_init<double>(latent, input, rng.next_u64()));
        decoder.back().activation = Activation::kSelu;
      }

      // draw a batch whose preactivations sit clear of the ReLU/SELU kinks;
      // central differences would otherwise straddle a non-differentiable
      // point and stop being a valid oracle
      const Index batch = 8 + static_cast<Index>(rng.uniform_int(5));
      MatD x(batch, input);
      for (int attempt = 0; attempt < 50; ++attempt) {
        for (Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
        std::vector<LayerCache<double>> ec, dc;
        const MatD z_try = stack_forward(encoder, x, false, nullptr, &ec);
        stack_forward(decoder, z_try, false, nullptr, &dc);
        double margin = std::numeric_limits<double>::infinity();
        for (const auto* caches : {&ec, &dc})
          for (const auto& c : *caches)
            margin = std::min(margin, c.preact.cwiseAbs().minCoeff());
        if (margin > 2e-3) break;
      }

      // loss weight combinations across the nets
      const double gamma = (net % 4 == 1 || net % 4 == 3) ? 0.4 : 0.0;
      const double beta = (net % 4 == 2 || net % 4 == 3) ? 0.7 : 0.0;
      const MatD prior = sample_prior<double>(batch + 2, latent, rng.next_u64());
      const double h2 = static_cast<double>(latent);

      // base evaluation freezes the cluster assignments
      std::vector<int> labels;
      {
        std::vector<LayerCache<double>> ec;
        const MatD latent_pts = stack_forward(encoder, x, false, nullptr, &ec);
        labels = silhouette_loss(latent_pts, {2, 4}, KmeansInit::kPlusPlus, 9)
                     .clustering.assignments;
      }

      auto loss_at = [&]() {
        const MatD z = stack_forward(encoder, x);
        double loss = static_cast<double>(mse_loss(x, stack_forward(decoder, z)));
        if (beta != 0.0) loss += beta * mmd_vstat(z, prior, h2);
        if (gamma != 0.0) loss += gamma * (1.0 - silhouette_score(z, labels)) / 2.0;
        return loss;
      };

      // analytic gradients
      std::vector<LayerCache<double>> enc_caches, dec_caches;
      const MatD z = stack_forward(encoder, x, false, nullptr, &enc_caches);
      const MatD recon = stack_forward(decoder, z, false, nullptr, &dec_caches);
      GradientTape<double> enc_tape = GradientTape<double>::zeros_like(encoder);
      GradientTape<double> dec_tape = GradientTape<double>::zeros_like(decoder);
      MatD dz = stack_backward(decoder, dec_caches, mse_loss_grad(x, recon), dec_tape);
      if (beta != 0.0) dz += beta * mmd_vstat_grad_q(z, prior, h2);
      if (gamma != 0.0) dz += gamma * silhouette_loss_grad(z, labels);
      stack_backward(encoder, enc_caches, dz, enc_tape);

      auto check_stack = [&](std::vector<DenseLayer<double>>& stack,
                             const GradientTape<double>& tape) {
        for (std::size_t li = 0; li < stack.size(); ++li) {
          for (Index idx = 0; idx < stack[li].weights.size(); idx += 3) {
            const double fd = oracles::central_diff(
                [&](double v) {
                  const double saved = stack[li].weights.data()[idx];
                  stack[li].weights.data()[idx] = v;
                  const double l = loss_at();
                  stack[li].weights.data()[idx] = saved;
                  return l;
                },
                stack[li].weights.data()[idx]);
            worst = std::max(worst,
                             oracles::grad_rel_err(fd, tape.layers[li].weights.data()[idx]));
          }
          for (Index idx = 0; idx < stack[li].bias.size(); ++idx) {
            const double fd = oracles::central_diff(
                [&](double v) {
                  const double saved = stack[li].bias(idx);
                  stack[li].bias(idx) = v;
                  const double l = loss_at();
                  stack[li].bias(idx) = saved;
                  return l;
                },
                stack[li].bias(idx));
            worst = std::max(worst, oracles::grad_rel_err(fd, tape.layers[li].bias(idx)));
          }
        }
      };
      check_stack(encoder, enc_tape);
      check_stack(decoder, dec_tape);
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    Outcome out;
    out.passed = worst < 1e-4 && seconds < 60.0;
    out.detail = "max relative gradient error = " + fmt(worst) + " over 20 networks";
    return out;
  });

  run_criterion(3, "Lloyd monotonicity and k-means++ selection statistics", [] {
    int monotone_violations = 0;
    for (std::uint64_t trial = 0; trial < 1000; ++trial) {
      Rng rng(Rng::mix(0xACC3, trial));
      const Index n = 30 + static_cast<Index>(rng.uniform_int(120));
      const Index dim = 1 + static_cast<Index>(rng.uniform_int(5));
      const int k = 2 + static_cast<int>(rng.uniform_int(5));
      const MatD points = oracles::random_points(n, dim, 10.0, trial + 99);
      const auto res = kmeans(points, k,
                              trial % 2 ? KmeansInit::kRandom : KmeansInit::kPlusPlus,
                              trial);
      for (std::size_t t = 1; t < res.inertia_history.size(); ++t)
        if (res.inertia_history[t] >
            res.inertia_history[t - 1] * (1.0 + 1e-12) + 1e-12)
          ++monotone_violations;
    }

    // 99 duplicates at 0 and one far point: D^2 weighting must place the far
    // point among the two seeds every time
    MatD points(100, 1);
    points.setZero();
    points(99, 0) = 100.0;
    int hits = 0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
      const auto res = kmeans(points, 2, KmeansInit::kPlusPlus,
                              static_cast<std::uint64_t>(t), 0);
      if (res.centroids(0, 0) == 100.0 || res.centroids(1, 0) == 100.0) ++hits;
    }
    const double rate = static_cast<double>(hits) / trials;

    Outcome out;
    out.passed = monotone_violations == 0 && rate > 0.99;
    out.detail = std::to_string(monotone_violations) +
                 " monotonicity violations over 1000 runs; far-point rate = " +
                 fmt(rate);
    return out;
  });

  run_criterion(4, "iterative K-Means recovers the planted k", [] {
    const auto start = std::chrono::steady_clock::now();
    std::string found;
    bool all_match = true;
    for (const int true_k : {3, 4, 5}) {
      Rng rng(Rng::mix(0xACC4, static_cast<std::uint64_t>(true_k)));
      MatD centers(true_k, 2);
      for (int c = 0; c < true_k; ++c) {
        centers(c, 0) = 40.0 * std::cos(2.0 * 3.14159265 * c / true_k);
        centers(c, 1) = 40.0 * std::sin(2.0 * 3.14159265 * c / true_k);
      }
      const MatD points =
          oracles::make_blobs(centers, 40, 1.0, static_cast<std::uint64_t>(true_k) + 5);
      const auto res = iterative_kmeans(points, {2, 8}, KmeansInit::kPlusPlus, 77);
      if (!found.empty()) found += ", ";
      found += std::to_string(true_k) + "->" + std::to_string(res.k);
      all_match = all_match && res.k == true_k;
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    Outcome out;
    out.passed = all_match && seconds < 30.0;
    out.detail = "true->selected: " + found;
    return out;
  });

  run_criterion(5, "end-to-end nebular reproduction at desk scale", [&astro] {
    const PipelineSetup setup = astro_setup();
    astro = run_pipeline(setup, work_root() / "astro");
    Outcome out;
    out.passed = astro.segmentation.k == 4 && astro.purity_value >= 0.95 &&
                 astro.segmentation.silhouette >= 0.85 &&
                 setup.train_cfg.epochs <= 50;
    out.detail = "k = " + std::to_string(astro.segmentation.k) +
                 ", purity = " + fmt(astro.purity_value) +
                 ", silhouette = " + fmt(astro.segmentation.silhouette);
    return out;
  });

  run_criterion(6, "VaDE-MMD reproduction with the stepped MMD weight", [&xrf] {
    const PipelineSetup setup = xrf_setup();
    xrf = run_pipeline(setup, work_root() / "xrf");

    bool schedule_ok = !xrf.training.log.empty();
    for (const auto& rec : xrf.training.log) {
      const double expected = rec.epoch >= 30 ? 0.01 : 0.0;
      if (rec.beta != expected) schedule_ok = false;
      if (rec.gamma != 0.01) schedule_ok = false;
    }
    // the NDJSON log shows the transition at exactly epoch 30
    std::ifstream log(xrf.dir / "training_log.ndjson");
    std::string line;
    int first_nonzero_beta_epoch = -1;
    while (std::getline(log, line)) {
      const json rec = json::parse(line);
      if (rec.at("beta").get<double>() != 0.0 && first_nonzero_beta_epoch < 0)
        first_nonzero_beta_epoch = rec.at("epoch").get<int>();
    }
    schedule_ok = schedule_ok && first_nonzero_beta_epoch == 30;

    Outcome out;
    out.passed =
        xrf.segmentation.k == 4 && xrf.purity_value >= 0.90 && schedule_ok;
    out.detail = "k = " + std::to_string(xrf.segmentation.k) +
                 ", purity = " + fmt(xrf.purity_value) +
                 ", beta steps at epoch " + std::to_string(first_nonzero_beta_epoch);
    return out;
  });

  run_criterion(7, "decoder nonlinearity separates the two cluster averages", [&xrf] {
    Outcome out;
    if (xrf.segmentation.k == 0) {
      out.detail = "skipped: criterion 6 artifacts missing";
      return out;
    }
    double max_gap = 0.0;
    for (int c = 0; c < xrf.segmentation.k; ++c)
      max_gap = std::max<double>(
          max_gap, (xrf.segmentation.cluster_mean_reconstructed.row(c) -
                    xrf.segmentation.decoded_latent_mean.row(c))
                       .cwiseAbs()
                       .maxCoeff());

    // all-linear toy autoencoder in double: the two averages coincide
    ArchitectureSpec spec;
    spec.input_dim = 12;
    spec.latent_dim = 3;
    spec.sizing_rule = SizingRule::kPow2;
    spec.hidden_layers = 1;
    AutoEncoder<double> linear = build_autoencoder<double>(spec, 21);
    for (auto* stack : {&linear.encoder, &linear.decoder})
      for (auto& layer : *stack) layer.activation = Activation::kIdentity;

    const MatD x = oracles::random_points(60, 12, 2.0, 33);
    const MatD z = linear.encode(x);
    Rng rng(44);
    std::vector<int> labels(60);
    for (auto& l : labels) l = static_cast<int>(rng.uniform_int(3));
    double linear_gap = 0.0;
    for (int c = 0; c < 3; ++c) {
      MatD members(0, 3);
      std::vector<Index> rows;
      for (Index i = 0; i < 60; ++i)
        if (labels[static_cast<std::size_t>(i)] == c) rows.push_back(i);
      MatD zc(static_cast<Index>(rows.size()), 3);
      for (std::size_t r = 0; r < rows.size(); ++r) zc.row(static_cast<Index>(r)) = z.row(rows[r]);
      const MatD decoded = linear.decode(zc);
      const Eigen::RowVectorXd mean_decoded = decoded.colwise().mean();
      const MatD mean_latent = zc.colwise().mean();
      const MatD decoded_mean = linear.decode(mean_latent);
      linear_gap = std::max(
          linear_gap, (mean_decoded - decoded_mean.row(0)).cwiseAbs().maxCoeff());
    }

    out.passed = max_gap > 1e-3 && linear_gap <= 1e-9;
    out.detail = "trained max |h_bar - <h>| = " + fmt(max_gap) +
                 ", linear toy gap = " + fmt(linear_gap);
    return out;
  });

  run_criterion(8, "decoded integrated map reduces background variance", [&astro] {
    Outcome out;
    if (astro.segmentation.k == 0) {
      out.detail = "skipped: criterion 5 artifacts missing";
      return out;
    }
    const AutoEncoder<float> model =
        load_model((astro.dir / "model.sdcn").string());
    const IntegratedMaps maps = integrated_maps(astro.test_cube.cube, model);

    const int background_id = static_cast<int>(astro.test_cube.legend.size()) - 1;
    double sum_i = 0.0, sum2_i = 0.0, sum_d = 0.0, sum2_d = 0.0;
    Index count = 0;
    const DataCube& cube = astro.test_cube.cube;
    for (Index j = 0; j < cube.height; ++j)
      for (Index i = 0; i < cube.width; ++i) {
        if (astro.test_cube.labels[static_cast<std::size_t>(cube.flat_id(i, j))] !=
            background_id)
          continue;
        ++count;
        sum_i += maps.true_map(j, i);
        sum2_i += maps.true_map(j, i) * maps.true_map(j, i);
        sum_d += maps.decoded_map(j, i);
        sum2_d += maps.decoded_map(j, i) * maps.decoded_map(j, i);
      }
    const double var_i = sum2_i / count - (sum_i / count) * (sum_i / count);
    const double var_d = sum2_d / count - (sum_d / count) * (sum_d / count);
    const double ratio = var_d / var_i;

    Outcome result;
    result.passed = count > 100 && ratio < 1.0;
    result.detail = "var(decoded)/var(true) = " + fmt(ratio) + " over " +
                    std::to_string(count) + " background pixels";
    return result;
  });

  run_criterion(9, "containers round-trip bit-exactly and reject corruption", [&astro] {
    Outcome out;
    const fs::path dir = work_root() / "io";
    fs::create_directories(dir);

    DataCube cube = DataCube::zeros(9, 7, 5, {"keV", 1.0, 0.5});
    Rng rng(3);
    for (auto& v : cube.data) v = static_cast<float>(rng.uniform(0.0, 9.0));
    const fs::path cube_path = dir / "io.dcube";
    save_cube(cube, cube_path.string());
    const DataCube loaded = load_cube(cube_path.string());
    bool ok = loaded.data == cube.data && loaded.width == cube.width &&
              loaded.axis.step == cube.axis.step;

    const fs::path model_path = astro.segmentation.k != 0
                                    ? astro.dir / "model.sdcn"
                                    : dir / "fresh.sdcn";
    if (astro.segmentation.k == 0) {
      ArchitectureSpec spec;
      spec.input_dim = 16;
      spec.latent_dim = 3;
      spec.sizing_rule = SizingRule::kPow2;
      spec.hidden_layers = 1;
      save_model(build_autoencoder<float>(spec, 1), model_path.string());
    }
    {
      const AutoEncoder<float> m1 = load_model(model_path.string());
      const fs::path resaved = dir / "resaved.sdcn";
      const std::string meta = load_model_training_meta(model_path.string());
      save_model(m1, resaved.string(), meta);
      ok = ok && slurp(model_path) == slurp(resaved);
    }

    // corruption matrix: each failure mode must raise its own error type
    auto write_variant = [&](const fs::path& src, const char* name,
                             const std::function<void(std::string&)>& mutate) {
      std::string bytes = slurp(src);
      mutate(bytes);
      const fs::path p = dir / name;
      std::ofstream f(p, std::ios::binary | std::ios::trunc);
      f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
      return p;
    };
    int distinct = 0;
    try {
      load_cube(write_variant(cube_path, "crc.dcube",
                              [](std::string& b) { b[b.size() / 2] ^= 1; })
                    .string());
    } catch (const ChecksumError&) {
      ++distinct;
    } catch (const std::exception&) {
    }
    try {
      load_cube(write_variant(cube_path, "trunc.dcube",
                              [](std::string& b) { b.resize(b.size() - 25); })
                    .string());
    } catch (const TruncatedError&) {
      ++distinct;
    } catch (const std::exception&) {
    }
    try {
      load_model(write_variant(model_path, "ver.sdcn",
                               [](std::string& b) { b[4] = 9; })
                     .string());
    } catch (const VersionError&) {
      ++distinct;
    } catch (const std::exception&) {
    }
    try {
      load_model(write_variant(model_path, "magic.sdcn",
                               [](std::string& b) { b[0] = 'Z'; })
                     .string());
    } catch (const FormatError&) {
      ++distinct;
    } catch (const std::exception&) {
    }

    out.passed = ok && distinct == 4;
    out.detail = std::string("round trips ") + (ok ? "exact" : "NOT exact") + ", " +
                 std::to_string(distinct) + "/4 distinct corruption errors";
    return out;
  });

  run_criterion(10, "identical seeds reproduce models, masks and metrics", [&astro, &xrf] {
    Outcome out;
    if (astro.segmentation.k == 0 || xrf.segmentation.k == 0) {
      out.detail = "skipped: earlier artifacts missing";
      return out;
    }
    bool identical = true;
    std::string what;
    for (const auto& [setup, first_dir, rerun_name] :
         {std::tuple{astro_setup(), astro.dir, "astro_rerun"},
          std::tuple{xrf_setup(), xrf.dir, "xrf_rerun"}}) {
      const fs::path rerun_dir = work_root() / rerun_name;
      run_pipeline(setup, rerun_dir);
      for (const char* file : {"model.sdcn", "metrics.json", "test.dcube"}) {
        if (slurp(first_dir / file) != slurp(rerun_dir / file)) {
          identical = false;
          what += std::string(file) + " ";
        }
      }
      for (int c = 0; c < 8; ++c) {
        const std::string mask = "seg/mask_" + std::to_string(c) + ".pgm";
        if (!fs::exists(first_dir / mask) && !fs::exists(rerun_dir / mask)) break;
        if (slurp(first_dir / mask) != slurp(rerun_dir / mask)) {
          identical = false;
          what += mask + " ";
        }
      }
      if (slurp(first_dir / "seg/summary.json") != slurp(rerun_dir / "seg/summary.json")) {
        identical = false;
        what += "summary.json ";
      }
    }
    out.passed = identical;
    out.detail = identical ? "all artifact bytes identical across reruns"
                           : "differences in: " + what;
    return out;
  });

  std::cout << (g_failures == 0 ? "ACCEPTANCE: all criteria passed"
                                : "ACCEPTANCE: " + std::to_string(g_failures) +
                                      " criterion(s) failed")
            << std::endl;
  return g_failures;
}
