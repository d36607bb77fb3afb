#include "sdcn/deep_cluster.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numeric>

namespace sdcn {

namespace {

using nlohmann::json;

json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

std::string epoch_record_to_json(const EpochRecord& rec) {
  json j;
  j["epoch"] = rec.epoch;
  j["l_rec"] = number_or_null(rec.l_rec);
  j["l_sil"] = number_or_null(rec.l_sil);
  j["l_mmd"] = number_or_null(rec.l_mmd);
  j["beta"] = rec.beta;
  j["gamma"] = rec.gamma;
  j["val_l_rec"] = number_or_null(rec.val_l_rec);
  j["val_silhouette"] = number_or_null(rec.val_silhouette);
  j["wall_ms"] = rec.wall_ms;
  return j.dump();
}

TrainResult train(const MatF& spectra, const ArchitectureSpec& arch,
                  const TrainConfig& cfg) {
  if (cfg.batch_size < 2)
    throw InvalidArgumentError("train: batch_size must be >= 2");
  if (cfg.epochs < 1) throw InvalidArgumentError("train: epochs must be >= 1");
  if (cfg.val_fraction <= 0.0 || cfg.val_fraction >= 1.0)
    throw InvalidArgumentError("train: val_fraction must be in (0,1)");
  if (spectra.cols() != arch.input_dim)
    throw ShapeError("train: spectra have " + std::to_string(spectra.cols()) +
                     " channels, architecture expects " +
                     std::to_string(arch.input_dim));
  if (!spectra.allFinite())
    throw DataError("train: dataset contains non-finite values");
  const Index n = spectra.rows();
  if (n < 4) throw InvalidArgumentError("train: dataset too small");

  AutoEncoder<float> model = build_autoencoder<float>(arch, cfg.seed);

  // seeded split: tail of one shuffled permutation is the validation set
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  {
    Rng split_rng(Rng::mix(cfg.seed, 0x5B117));
    for (Index i = n - 1; i > 0; --i) {
      const Index j = static_cast<Index>(
          split_rng.uniform_int(static_cast<std::uint64_t>(i + 1)));
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
  }
  Index n_val = static_cast<Index>(std::llround(cfg.val_fraction * static_cast<double>(n)));
  n_val = std::max<Index>(1, std::min(n_val, n - 2));
  const Index n_train = n - n_val;
  std::vector<Index> train_idx(perm.begin(), perm.begin() + n_train);
  std::vector<Index> val_idx(perm.begin() + n_train, perm.end());

  MatF val_x(n_val, spectra.cols());
  for (Index i = 0; i < n_val; ++i)
    val_x.row(i) = spectra.row(val_idx[static_cast<std::size_t>(i)]);

  AdamState<float> enc_opt = AdamState<float>::init(model.encoder, cfg.adam);
  AdamState<float> dec_opt = AdamState<float>::init(model.decoder, cfg.adam);
  GradientTape<float> enc_tape = GradientTape<float>::zeros_like(model.encoder);
  GradientTape<float> dec_tape = GradientTape<float>::zeros_like(model.decoder);

  Rng shuffle_rng(Rng::mix(cfg.seed, 0x5F0FF1E));
  Rng dropout_rng(Rng::mix(cfg.seed, 0xD50));
  const std::uint64_t loss_seed_base = Rng::mix(cfg.seed, 0x10C);
  const std::uint64_t prior_seed_base = Rng::mix(cfg.seed, 0x9A1);
  const std::uint64_t val_seed_base = Rng::mix(cfg.seed, 0x7A1);

  std::ofstream log_file;
  if (!cfg.log_path.empty()) {
    log_file.open(cfg.log_path, std::ios::trunc);
    if (!log_file)
      throw IoError("train: cannot open log file '" + cfg.log_path + "'");
  }

  TrainResult result;
  result.best_val_l_rec = std::numeric_limits<double>::infinity();
  auto checkpoint = std::make_shared<AutoEncoder<float>>(model);
  int checkpoint_epoch = -1;

  const Index chunk = 4096;  // validation forward in bounded slabs
  auto validation_rec_loss = [&]() {
    double acc = 0.0;
    for (Index start = 0; start < n_val; start += chunk) {
      const Index rows = std::min(chunk, n_val - start);
      const MatF block = val_x.middleRows(start, rows);
      acc += static_cast<double>(mse_loss(block, model.reconstruct(block))) *
             static_cast<double>(rows);
    }
    return acc / static_cast<double>(n_val);
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto epoch_start = std::chrono::steady_clock::now();
    const double gamma_e = cfg.gamma.at(epoch);
    const double beta_e =
        cfg.variant == DcVariant::kPlainDcn ? 0.0 : cfg.beta.at(epoch);

    for (Index i = n_train - 1; i > 0; --i) {
      const Index j = static_cast<Index>(
          shuffle_rng.uniform_int(static_cast<std::uint64_t>(i + 1)));
      std::swap(train_idx[static_cast<std::size_t>(i)],
                train_idx[static_cast<std::size_t>(j)]);
    }

    double sum_rec = 0.0, sum_sil = 0.0, sum_mmd = 0.0;
    Index seen = 0;
    std::int64_t step = 0;

    for (Index start = 0; start + 1 < n_train; start += cfg.batch_size, ++step) {
      const Index rows = std::min(cfg.batch_size, n_train - start);
      if (rows < 2) break;  // a trailing single sample cannot feed sil/mmd
      MatF x(rows, spectra.cols());
      for (Index r = 0; r < rows; ++r)
        x.row(r) = spectra.row(train_idx[static_cast<std::size_t>(start + r)]);

      std::vector<LayerCache<float>> enc_caches, dec_caches;
      const MatF latent =
          stack_forward(model.encoder, x, true, &dropout_rng, &enc_caches);
      const MatF recon =
          stack_forward(model.decoder, latent, true, &dropout_rng, &dec_caches);
      if (!latent.allFinite() || !recon.allFinite())
        throw TrainAbortError(
            "train: non-finite activations at epoch " + std::to_string(epoch) +
                "; last good epoch " + std::to_string(checkpoint_epoch),
            checkpoint, checkpoint_epoch);

      const double l_rec = static_cast<double>(mse_loss(x, recon));
      MatF d_latent =
          stack_backward(model.decoder, dec_caches, mse_loss_grad(x, recon), dec_tape);

      const std::uint64_t step_tag =
          static_cast<std::uint64_t>(epoch) * 0x100000ull + static_cast<std::uint64_t>(step);

      double l_sil = 0.0;
      if (latent.rows() >= static_cast<Index>(cfg.krange.n_i) + 1) {
        const SilhouetteLossResult sil = silhouette_loss(
            latent, cfg.krange, cfg.init, Rng::mix(loss_seed_base, step_tag));
        l_sil = sil.loss;
        if (gamma_e != 0.0)
          d_latent += static_cast<float>(gamma_e) *
                      silhouette_loss_grad(latent, sil.clustering.assignments);
      }

      MmdConfig mmd_cfg = cfg.mmd;
      mmd_cfg.seed = Rng::mix(prior_seed_base, step_tag);
      const Index m = mmd_cfg.prior_samples > 0 ? mmd_cfg.prior_samples : rows;
      const MatF prior = sample_prior<float>(m, latent.cols(), mmd_cfg.seed);
      const double h2 = detail::resolve_bandwidth_sq(latent, prior, mmd_cfg);
      const double l_mmd = mmd_vstat(latent, prior, h2);
      if (beta_e != 0.0)
        d_latent += static_cast<float>(beta_e) * mmd_vstat_grad_q(latent, prior, h2);

      if (!std::isfinite(l_rec) || !std::isfinite(l_sil) || !std::isfinite(l_mmd))
        throw TrainAbortError(
            "train: non-finite loss at epoch " + std::to_string(epoch) +
                " (rec=" + std::to_string(l_rec) + ", sil=" + std::to_string(l_sil) +
                ", mmd=" + std::to_string(l_mmd) + "); last good epoch " +
                std::to_string(checkpoint_epoch),
            checkpoint, checkpoint_epoch);

      stack_backward(model.encoder, enc_caches, d_latent, enc_tape);
      try {
        adam_step(model.encoder, enc_tape, enc_opt, "encoder");
        adam_step(model.decoder, dec_tape, dec_opt, "decoder");
      } catch (const StateError& e) {
        throw TrainAbortError(std::string("train: ") + e.what() +
                                  "; last good epoch " + std::to_string(checkpoint_epoch),
                              checkpoint, checkpoint_epoch);
      }

      sum_rec += l_rec * static_cast<double>(rows);
      sum_sil += l_sil * static_cast<double>(rows);
      sum_mmd += l_mmd * static_cast<double>(rows);
      seen += rows;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.gamma = gamma_e;
    rec.beta = beta_e;
    rec.l_rec = sum_rec / static_cast<double>(seen);
    rec.l_sil = sum_sil / static_cast<double>(seen);
    rec.l_mmd = sum_mmd / static_cast<double>(seen);
    rec.val_l_rec = validation_rec_loss();

    rec.val_silhouette = std::numeric_limits<double>::quiet_NaN();
    if (n_val >= static_cast<Index>(cfg.krange.n_i) + 1) {
      MatD val_latent(n_val, model.latent_dim());
      for (Index start = 0; start < n_val; start += chunk) {
        const Index rows = std::min(chunk, n_val - start);
        val_latent.middleRows(start, rows) =
            model.encode(val_x.middleRows(start, rows)).cast<double>();
      }
      const std::uint64_t vseed = Rng::mix(val_seed_base, static_cast<std::uint64_t>(epoch));
      const std::vector<Index> sub =
          subsample_for_silhouette(val_latent, cfg.silhouette_cap, vseed);
      const MatD val_sub = gather_rows(val_latent, sub);
      if (val_sub.rows() > static_cast<Index>(cfg.krange.n_i)) {
        KRange vrange = cfg.krange;
        vrange.n_f = static_cast<int>(std::min<Index>(vrange.n_f, val_sub.rows() - 1));
        rec.val_silhouette =
            iterative_kmeans(val_sub, vrange, cfg.init, vseed).silhouette;
      }
    }

    if (!std::isfinite(rec.val_l_rec))
      throw TrainAbortError("train: non-finite validation loss at epoch " +
                                std::to_string(epoch) + "; last good epoch " +
                                std::to_string(checkpoint_epoch),
                            checkpoint, checkpoint_epoch);

    rec.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - epoch_start)
                      .count();
    result.log.push_back(rec);
    if (log_file) {
      log_file << epoch_record_to_json(rec) << '\n';
      log_file.flush();
    }

    checkpoint = std::make_shared<AutoEncoder<float>>(model);
    checkpoint_epoch = epoch;

    if (rec.val_l_rec < result.best_val_l_rec) {
      result.best_val_l_rec = rec.val_l_rec;
      result.best_epoch = epoch;
      result.model = model;
    }
  }

  return result;
}

}  // namespace sdcn
