#include "sdcn/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sdcn/errors.hpp"
#include "sdcn/rng.hpp"

namespace sdcn {

namespace {

void require_finite(const MatD& points, const char* who) {
  if (!points.allFinite())
    throw DataError(std::string(who) + ": input contains non-finite values");
}

// k distinct row indices, uniform, via partial Fisher-Yates.
std::vector<Index> distinct_rows(Index n, int k, Rng& rng) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  for (int i = 0; i < k; ++i) {
    const Index j = static_cast<Index>(i) +
                    static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

MatD init_random(const MatD& points, int k, Rng& rng) {
  const std::vector<Index> rows = distinct_rows(points.rows(), k, rng);
  MatD centroids(k, points.cols());
  for (int c = 0; c < k; ++c) centroids.row(c) = points.row(rows[static_cast<std::size_t>(c)]);
  return centroids;
}

// k-means++: each next seed is a data point drawn with probability
// proportional to its squared distance from the nearest chosen seed.
MatD init_kpp(const MatD& points, int k, Rng& rng) {
  const Index n = points.rows();
  MatD centroids(k, points.cols());
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);

  const Index first = static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(n)));
  centroids.row(0) = points.row(first);
  chosen[static_cast<std::size_t>(first)] = 1;

  VecD d2(n);
  for (Index i = 0; i < n; ++i)
    d2(i) = (points.row(i) - centroids.row(0)).squaredNorm();

  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Index pick = -1;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double acc = 0.0;
      for (Index i = 0; i < n; ++i) {
        acc += d2(i);
        if (acc > r) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {  // r landed on the accumulated rounding tail
        for (Index i = n; i-- > 0;)
          if (d2(i) > 0.0) {
            pick = i;
            break;
          }
      }
    }
    if (pick < 0) {
      // all remaining distances are zero (duplicate points): uniform unchosen
      std::vector<Index> pool;
      for (Index i = 0; i < n; ++i)
        if (!chosen[static_cast<std::size_t>(i)]) pool.push_back(i);
      pick = pool[static_cast<std::size_t>(
          rng.uniform_int(static_cast<std::uint64_t>(pool.size())))];
    }
    centroids.row(c) = points.row(pick);
    chosen[static_cast<std::size_t>(pick)] = 1;
    for (Index i = 0; i < n; ++i)
      d2(i) = std::min(d2(i), (points.row(i) - centroids.row(c)).squaredNorm());
  }
  return centroids;
}

}  // namespace

ClusteringResult kmeans(const MatD& points, int k, KmeansInit init,
                        std::uint64_t seed, int max_iters, double tol) {
  const Index n = points.rows();
  if (k < 1) throw InvalidArgumentError("kmeans: k must be >= 1");
  if (n < 1) throw InvalidArgumentError("kmeans: no points");
  if (static_cast<Index>(k) > n)
    throw InvalidArgumentError("kmeans: k = " + std::to_string(k) +
                               " exceeds point count " + std::to_string(n));
  require_finite(points, "kmeans");

  Rng rng(seed);
  MatD centroids = init == KmeansInit::kRandom ? init_random(points, k, rng)
                                               : init_kpp(points, k, rng);

  // convergence scale: rms point norm, so tol acts as a relative shift
  const double scale =
      std::max(std::sqrt(points.squaredNorm() / static_cast<double>(n)), 1e-12);

  ClusteringResult result;
  result.k = k;
  result.assignments.assign(static_cast<std::size_t>(n), 0);
  std::vector<Index> counts(static_cast<std::size_t>(k), 0);

  auto assign_pass = [&]() {
    std::fill(counts.begin(), counts.end(), Index{0});
    for (Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d2 = (points.row(i) - centroids.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double d2 = (points.row(i) - centroids.row(c)).squaredNorm();
        if (d2 < best_d2) {
          best_d2 = d2;
          best = c;
        }
      }
      result.assignments[static_cast<std::size_t>(i)] = best;
      ++counts[static_cast<std::size_t>(best)];
    }
    // repair: reseed each empty cluster on the point farthest from its
    // centroid, claiming that point for the cluster
    for (int rounds = 0; rounds < k; ++rounds) {
      int empty = -1;
      for (int c = 0; c < k; ++c)
        if (counts[static_cast<std::size_t>(c)] == 0) {
          empty = c;
          break;
        }
      if (empty < 0) break;
      Index far = -1;
      double far_d2 = -1.0;
      for (Index i = 0; i < n; ++i) {
        const int c = result.assignments[static_cast<std::size_t>(i)];
        if (counts[static_cast<std::size_t>(c)] <= 1) continue;  // keep donors non-empty
        const double d2 = (points.row(i) - centroids.row(c)).squaredNorm();
        if (d2 > far_d2) {
          far_d2 = d2;
          far = i;
        }
      }
      if (far < 0) break;
      const int donor = result.assignments[static_cast<std::size_t>(far)];
      --counts[static_cast<std::size_t>(donor)];
      result.assignments[static_cast<std::size_t>(far)] = empty;
      ++counts[static_cast<std::size_t>(empty)];
      centroids.row(empty) = points.row(far);
    }
    double inertia = 0.0;
    for (Index i = 0; i < n; ++i)
      inertia += (points.row(i) -
                  centroids.row(result.assignments[static_cast<std::size_t>(i)]))
                     .squaredNorm();
    return inertia;
  };

  result.inertia = assign_pass();
  result.inertia_history.push_back(result.inertia);

  for (int iter = 0; iter < max_iters; ++iter) {
    MatD means = MatD::Zero(k, points.cols());
    for (Index i = 0; i < n; ++i)
      means.row(result.assignments[static_cast<std::size_t>(i)]) += points.row(i);
    for (int c = 0; c < k; ++c)
      means.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);

    double shift = 0.0;
    for (int c = 0; c < k; ++c)
      shift = std::max(shift, (means.row(c) - centroids.row(c)).norm());
    if (shift <= tol * scale) break;  // assignments already match current centroids

    centroids = means;
    result.inertia = assign_pass();
    result.inertia_history.push_back(result.inertia);
  }

  result.centroids = centroids;
  return result;
}

double silhouette_score(const MatD& points, const std::vector<int>& assignments) {
  const Index n = points.rows();
  if (static_cast<Index>(assignments.size()) != n)
    throw InvalidArgumentError("silhouette_score: one label per point required");
  if (n < 2) throw InvalidArgumentError("silhouette_score: need at least 2 points");
  require_finite(points, "silhouette_score");

  int k = 0;
  for (int label : assignments) {
    if (label < 0) throw InvalidArgumentError("silhouette_score: negative label");
    k = std::max(k, label + 1);
  }
  if (k < 2)
    throw InvalidArgumentError("silhouette_score: need at least 2 clusters");
  std::vector<Index> counts(static_cast<std::size_t>(k), 0);
  for (int label : assignments) ++counts[static_cast<std::size_t>(label)];
  for (int c = 0; c < k; ++c)
    if (counts[static_cast<std::size_t>(c)] == 0)
      throw InvalidArgumentError("silhouette_score: cluster " + std::to_string(c) +
                                 " is empty");

  std::vector<double> cluster_sums(static_cast<std::size_t>(k));
  std::vector<double> per_cluster_mean(static_cast<std::size_t>(k), 0.0);
  for (Index i = 0; i < n; ++i) {
    const int ci = assignments[static_cast<std::size_t>(i)];
    if (counts[static_cast<std::size_t>(ci)] == 1) continue;  // singleton: s = 0
    std::fill(cluster_sums.begin(), cluster_sums.end(), 0.0);
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      cluster_sums[static_cast<std::size_t>(assignments[static_cast<std::size_t>(j)])] +=
          (points.row(i) - points.row(j)).norm();
    }
    const double a = cluster_sums[static_cast<std::size_t>(ci)] /
                     static_cast<double>(counts[static_cast<std::size_t>(ci)] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c == ci) continue;
      b = std::min(b, cluster_sums[static_cast<std::size_t>(c)] /
                          static_cast<double>(counts[static_cast<std::size_t>(c)]));
    }
    const double m = std::max(a, b);
    const double s = m > 0.0 ? (b - a) / m : 0.0;
    per_cluster_mean[static_cast<std::size_t>(ci)] += s;
  }

  double total = 0.0;
  for (int c = 0; c < k; ++c)
    total += per_cluster_mean[static_cast<std::size_t>(c)] /
             static_cast<double>(counts[static_cast<std::size_t>(c)]);
  return total / static_cast<double>(k);
}

ClusteringResult iterative_kmeans(const MatD& points, KRange krange,
                                  KmeansInit init, std::uint64_t seed) {
  if (krange.n_i < 2)
    throw InvalidArgumentError("iterative_kmeans: k range must start at >= 2");
  if (krange.n_f < krange.n_i)
    throw InvalidArgumentError("iterative_kmeans: empty k range");
  if (points.rows() <= static_cast<Index>(krange.n_f))
    throw InvalidArgumentError("iterative_kmeans: need more points than the "
                               "largest k (" + std::to_string(krange.n_f) + ")");

  ClusteringResult best;
  bool have_best = false;
  for (int k = krange.n_i; k <= krange.n_f; ++k) {
    ClusteringResult res = kmeans(points, k, init, Rng::mix(seed, static_cast<std::uint64_t>(k)));
    res.silhouette = silhouette_score(points, res.assignments);
    if (!have_best || res.silhouette > best.silhouette) {  // ties keep smaller k
      best = std::move(res);
      have_best = true;
    }
  }
  return best;
}

std::vector<Index> subsample_for_silhouette(const MatD& points, Index cap,
                                            std::uint64_t seed) {
  if (cap < 2) throw InvalidArgumentError("subsample_for_silhouette: cap must be >= 2");
  const Index n = points.rows();
  const Index m = std::min(cap, n);
  Rng rng(seed);
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  for (Index i = 0; i < m; ++i) {
    const Index j =
        i + static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(m));
  std::sort(idx.begin(), idx.end());
  return idx;
}

MatD gather_rows(const MatD& points, const std::vector<Index>& rows) {
  MatD out(static_cast<Index>(rows.size()), points.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Index>(i)) = points.row(rows[i]);
  return out;
}

}  // namespace sdcn
