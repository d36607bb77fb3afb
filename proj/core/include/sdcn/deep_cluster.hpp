#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "sdcn/autoencoder.hpp"
#include "sdcn/clustering.hpp"
#include "sdcn/errors.hpp"
#include "sdcn/nn.hpp"
#include "sdcn/rng.hpp"
#include "sdcn/types.hpp"

namespace sdcn {

/// Epoch-dependent loss weight. The step kind is value * heaviside(i - i0)
/// with heaviside(0) = 1, so the weight switches on at start_epoch exactly.
struct Schedule {
  enum class Kind { kConstant, kStep, kTable };

  Kind kind = Kind::kConstant;
  double value = 0.0;
  int start_epoch = 0;
  std::vector<std::pair<int, double>> table;  // (from_epoch, value), sorted

  double at(int epoch) const {
    switch (kind) {
      case Kind::kConstant:
        return value;
      case Kind::kStep:
        return epoch >= start_epoch ? value : 0.0;
      case Kind::kTable: {
        double v = 0.0;
        for (const auto& [from, val] : table) {
          if (epoch < from) break;
          v = val;
        }
        return v;
      }
    }
    return 0.0;
  }

  static Schedule constant(double v) {
    Schedule s;
    s.kind = Kind::kConstant;
    s.value = v;
    return s;
  }
  static Schedule step(double v, int start) {
    Schedule s;
    s.kind = Kind::kStep;
    s.value = v;
    s.start_epoch = start;
    return s;
  }
  static Schedule piecewise(std::vector<std::pair<int, double>> pts) {
    Schedule s;
    s.kind = Kind::kTable;
    s.table = std::move(pts);
    return s;
  }
};

/// Gaussian-RBF MMD settings. bandwidth_sq <= 0 selects the default
/// (latent dimension); the median heuristic overrides both.
struct MmdConfig {
  double bandwidth_sq = 0.0;
  bool median_heuristic = false;
  Index prior_samples = 0;  // 0: match the batch size
  std::uint64_t seed = 0;
};

/// n x dim standard-normal draws, the latent prior sample.
template <typename T>
Mat<T> sample_prior(Index n, Index dim, std::uint64_t seed) {
  Rng rng(seed);
  Mat<T> z(n, dim);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < dim; ++c) z(r, c) = static_cast<T>(rng.normal());
  return z;
}

namespace detail {

template <typename T>
double resolve_bandwidth_sq(const Mat<T>& q, const Mat<T>& p, const MmdConfig& cfg) {
  if (cfg.median_heuristic) {
    std::vector<double> d2;
    const Index n = q.rows(), m = p.rows();
    d2.reserve(static_cast<std::size_t>((n + m) * (n + m - 1) / 2));
    auto row = [&](Index i) {
      return i < n ? q.row(i).template cast<double>() : p.row(i - n).template cast<double>();
    };
    for (Index i = 0; i < n + m; ++i)
      for (Index j = i + 1; j < n + m; ++j)
        d2.push_back((row(i) - row(j)).squaredNorm());
    if (d2.empty()) return static_cast<double>(q.cols());
    std::nth_element(d2.begin(), d2.begin() + static_cast<std::ptrdiff_t>(d2.size() / 2),
                     d2.end());
    const double med = d2[d2.size() / 2];
    return med > 0.0 ? med / 2.0 : static_cast<double>(q.cols());
  }
  return cfg.bandwidth_sq > 0.0 ? cfg.bandwidth_sq : static_cast<double>(q.cols());
}

}  // namespace detail

/// Biased (V-statistic) MMD^2 between sample q and sample p under the
/// Gaussian kernel k(x,y) = exp(-|x-y|^2 / (2 h^2)). Non-negative up to
/// rounding; exactly zero when q and p are the same point set.
template <typename T>
double mmd_vstat(const Mat<T>& q, const Mat<T>& p, double bandwidth_sq) {
  if (q.cols() != p.cols()) throw ShapeError("mmd_vstat: dimension mismatch");
  if (q.rows() < 1 || p.rows() < 1)
    throw InvalidArgumentError("mmd_vstat: empty sample");
  const double inv_two_h2 = 1.0 / (2.0 * bandwidth_sq);
  auto mean_kernel = [&](const Mat<T>& a, const Mat<T>& b) {
    double acc = 0.0;
    for (Index i = 0; i < a.rows(); ++i)
      for (Index j = 0; j < b.rows(); ++j) {
        const double d2 =
            (a.row(i).template cast<double>() - b.row(j).template cast<double>())
                .squaredNorm();
        acc += std::exp(-d2 * inv_two_h2);
      }
    return acc / (static_cast<double>(a.rows()) * static_cast<double>(b.rows()));
  };
  return mean_kernel(p, p) - 2.0 * mean_kernel(q, p) + mean_kernel(q, q);
}

/// d mmd_vstat / d q.
template <typename T>
Mat<T> mmd_vstat_grad_q(const Mat<T>& q, const Mat<T>& p, double bandwidth_sq) {
  if (q.cols() != p.cols()) throw ShapeError("mmd_vstat_grad_q: dimension mismatch");
  const double inv_h2 = 1.0 / bandwidth_sq;
  const double inv_two_h2 = 0.5 * inv_h2;
  const Index n = q.rows(), m = p.rows();
  MatD grad = MatD::Zero(n, q.cols());
  const MatD qd = q.template cast<double>();
  const MatD pd = p.template cast<double>();
  // qq term: (1/n^2) sum_ab k(q_a, q_b); diagonal has zero gradient
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto diff = qd.row(i) - qd.row(j);
      const double kij = std::exp(-diff.squaredNorm() * inv_two_h2);
      grad.row(i) -= (2.0 / (static_cast<double>(n) * n)) * kij * inv_h2 * diff;
    }
  // qp term: -(2/(n m)) sum_ab k(q_a, p_b)
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j) {
      const auto diff = qd.row(i) - pd.row(j);
      const double kij = std::exp(-diff.squaredNorm() * inv_two_h2);
      grad.row(i) += (2.0 / (static_cast<double>(n) * m)) * kij * inv_h2 * diff;
    }
  return grad.cast<T>();
}

/// MMD between the latent batch and fresh standard-normal prior draws.
template <typename T>
double mmd_loss(const Mat<T>& latent, const MmdConfig& cfg) {
  if (latent.rows() < 2)
    throw InvalidArgumentError("mmd_loss: need at least 2 latent points");
  const Index m = cfg.prior_samples > 0 ? cfg.prior_samples : latent.rows();
  if (m < 2) throw InvalidArgumentError("mmd_loss: need at least 2 prior samples");
  const Mat<T> prior = sample_prior<T>(m, latent.cols(), cfg.seed);
  return mmd_vstat(latent, prior, detail::resolve_bandwidth_sq(latent, prior, cfg));
}

struct SilhouetteLossResult {
  double loss = 0.0;  // (1 - silhouette)/2, in [0, 1]
  ClusteringResult clustering;
};

/// Clustering loss of a latent batch: runs the iterative K-Means scan on the
/// batch and maps the winning silhouette s to (1-s)/2. The scan's upper k is
/// clamped to batch-1 so any batch with at least n_i+1 points is valid.
template <typename T>
SilhouetteLossResult silhouette_loss(const Mat<T>& latent, KRange krange,
                                     KmeansInit init, std::uint64_t seed) {
  if (latent.rows() < static_cast<Index>(krange.n_i) + 1)
    throw InvalidArgumentError("silhouette_loss: batch of " +
                               std::to_string(latent.rows()) +
                               " points is too small for k >= " +
                               std::to_string(krange.n_i));
  KRange clamped = krange;
  clamped.n_f = static_cast<int>(
      std::min<Index>(static_cast<Index>(krange.n_f), latent.rows() - 1));
  SilhouetteLossResult out;
  out.clustering =
      iterative_kmeans(latent.template cast<double>(), clamped, init, seed);
  out.loss = (1.0 - out.clustering.silhouette) / 2.0;
  return out;
}

/// Gradient of (1 - silhouette)/2 with respect to the latent points, holding
/// the cluster assignments fixed (the k selection and memberships are
/// piecewise constant; gradients flow through the pairwise distances in the
/// a and b terms only).
template <typename T>
Mat<T> silhouette_loss_grad(const Mat<T>& latent,
                            const std::vector<int>& assignments) {
  const Index n = latent.rows();
  if (static_cast<Index>(assignments.size()) != n)
    throw InvalidArgumentError("silhouette_loss_grad: one label per point");
  const MatD x = latent.template cast<double>();

  int k = 0;
  for (int label : assignments) k = std::max(k, label + 1);
  std::vector<Index> counts(static_cast<std::size_t>(k), 0);
  for (int label : assignments) ++counts[static_cast<std::size_t>(label)];

  MatD grad = MatD::Zero(n, x.cols());
  std::vector<double> cluster_sums(static_cast<std::size_t>(k));

  for (Index i = 0; i < n; ++i) {
    const int ci = assignments[static_cast<std::size_t>(i)];
    const Index nc = counts[static_cast<std::size_t>(ci)];
    if (nc == 1) continue;  // singleton contributes a constant 0

    std::fill(cluster_sums.begin(), cluster_sums.end(), 0.0);
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      cluster_sums[static_cast<std::size_t>(assignments[static_cast<std::size_t>(j)])] +=
          (x.row(i) - x.row(j)).norm();
    }
    const double a = cluster_sums[static_cast<std::size_t>(ci)] / static_cast<double>(nc - 1);
    double b = std::numeric_limits<double>::infinity();
    int jstar = -1;
    for (int c = 0; c < k; ++c) {
      if (c == ci) continue;
      const double mean_c = cluster_sums[static_cast<std::size_t>(c)] /
                            static_cast<double>(counts[static_cast<std::size_t>(c)]);
      if (mean_c < b) {
        b = mean_c;
        jstar = c;
      }
    }
    const double m = std::max(a, b);
    if (m <= 0.0 || jstar < 0) continue;  // 0/0 convention: constant 0

    // s_i = (b-a)/max(a,b); dL/ds_i = -w/2 with w = 1/(k * nc)
    const double dL_ds = -0.5 / (static_cast<double>(k) * static_cast<double>(nc));
    double ds_da, ds_db;
    if (b >= a) {
      ds_da = -1.0 / b;
      ds_db = a / (b * b);
    } else {
      ds_db = 1.0 / a;
      ds_da = -b / (a * a);
    }
    const double coeff_a = dL_ds * ds_da / static_cast<double>(nc - 1);
    const double coeff_b =
        dL_ds * ds_db / static_cast<double>(counts[static_cast<std::size_t>(jstar)]);

    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const int cj = assignments[static_cast<std::size_t>(j)];
      double coeff;
      if (cj == ci)
        coeff = coeff_a;
      else if (cj == jstar)
        coeff = coeff_b;
      else
        continue;
      const Eigen::RowVectorXd diff = x.row(i) - x.row(j);
      const double dist = diff.norm();
      if (dist <= 0.0) continue;
      const Eigen::RowVectorXd unit = diff / dist;
      grad.row(i) += coeff * unit;
      grad.row(j) -= coeff * unit;
    }
  }
  return grad.cast<T>();
}

enum class DcVariant { kPlainDcn, kVadeMmd };

/// Everything the composite objective needs besides the model itself.
struct DeepClusterObjective {
  Schedule gamma = Schedule::constant(0.0);
  Schedule beta = Schedule::constant(0.0);
  MmdConfig mmd;
  KRange krange{2, 8};
  KmeansInit init = KmeansInit::kPlusPlus;
  DcVariant variant = DcVariant::kVadeMmd;
  std::uint64_t seed = 0;
};

struct LossBreakdown {
  double total = 0.0;
  double rec = 0.0;
  double sil = 0.0;
  double mmd = 0.0;
  double gamma = 0.0;
  double beta = 0.0;
};

/// total = rec + beta(epoch) * mmd + gamma(epoch) * sil, evaluated in
/// inference mode. The plain variant forces beta to 0. Terms whose weight is
/// zero and whose preconditions the batch cannot meet are reported as 0.
template <typename T>
LossBreakdown total_loss(const Mat<T>& x, const AutoEncoder<T>& model,
                         const DeepClusterObjective& obj, int epoch) {
  LossBreakdown out;
  out.gamma = obj.gamma.at(epoch);
  out.beta = obj.variant == DcVariant::kPlainDcn ? 0.0 : obj.beta.at(epoch);

  const Mat<T> latent = model.encode(x);
  out.rec = static_cast<double>(mse_loss(x, model.decode(latent)));

  const bool sil_possible = latent.rows() >= static_cast<Index>(obj.krange.n_i) + 1;
  if (sil_possible)
    out.sil = silhouette_loss(latent, obj.krange, obj.init, Rng::mix(obj.seed, 0x51)).loss;
  else if (out.gamma != 0.0)
    throw InvalidArgumentError("total_loss: batch too small for the silhouette term");

  const bool mmd_possible = latent.rows() >= 2;
  if (mmd_possible) {
    MmdConfig cfg = obj.mmd;
    cfg.seed = Rng::mix(obj.seed, 0x3D);
    out.mmd = mmd_loss(latent, cfg);
  } else if (out.beta != 0.0) {
    throw InvalidArgumentError("total_loss: batch too small for the MMD term");
  }

  out.total = out.rec + out.beta * out.mmd + out.gamma * out.sil;
  return out;
}

struct TrainConfig {
  int epochs = 30;
  Index batch_size = 256;
  std::uint64_t seed = 0;
  AdamConfig<float> adam;
  double val_fraction = 0.2;
  Index silhouette_cap = 1024;  // validation-time silhouette subsample cap
  KRange krange{2, 8};
  KmeansInit init = KmeansInit::kPlusPlus;
  DcVariant variant = DcVariant::kPlainDcn;
  Schedule gamma = Schedule::constant(0.0);
  Schedule beta = Schedule::constant(0.0);
  MmdConfig mmd;
  std::string log_path;  // when set, NDJSON records are appended per epoch
};

struct EpochRecord {
  int epoch = 0;
  double l_rec = 0.0;
  double l_sil = 0.0;
  double l_mmd = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double val_l_rec = 0.0;
  double val_silhouette = 0.0;  // NaN when the validation split is too small
  std::int64_t wall_ms = 0;
};

struct TrainResult {
  AutoEncoder<float> model;  // best-validation snapshot
  std::vector<EpochRecord> log;
  int best_epoch = -1;
  double best_val_l_rec = 0.0;
};

/// Thrown when a loss goes non-finite; carries the last epoch checkpoint.
class TrainAbortError : public StateError {
 public:
  TrainAbortError(const std::string& what,
                  std::shared_ptr<AutoEncoder<float>> checkpoint, int epoch)
      : StateError(what), last_good(std::move(checkpoint)), last_good_epoch(epoch) {}

  std::shared_ptr<AutoEncoder<float>> last_good;
  int last_good_epoch = -1;
};

/// Self-supervised training loop over a spectra matrix (one spectrum per
/// row). Splits off a validation set, iterates seeded shuffled mini-batches,
/// and returns the model with the best validation reconstruction loss.
TrainResult train(const MatF& spectra, const ArchitectureSpec& arch,
                  const TrainConfig& cfg);

std::string epoch_record_to_json(const EpochRecord& rec);

}  // namespace sdcn
