#pragma once

#include <cstdint>
#include <vector>

#include "sdcn/types.hpp"

namespace sdcn {

/// Inclusive range of cluster counts to scan.
struct KRange {
  int n_i = 2;
  int n_f = 8;
};

enum class KmeansInit { kRandom, kPlusPlus };

struct ClusteringResult {
  std::vector<int> assignments;  // one label in [0,k) per point
  MatD centroids;                // k x dim
  int k = 0;
  double inertia = 0.0;
  double silhouette = 0.0;  // filled by iterative_kmeans
  std::vector<double> inertia_history;  // inertia after each assignment pass
};

/// Lloyd's algorithm. Converges when the largest centroid shift drops below
/// tol relative to the data scale, or after max_iters passes. Empty clusters
/// are repaired by reseeding them on the point currently farthest from its
/// centroid, which keeps the per-iteration inertia non-increasing.
ClusteringResult kmeans(const MatD& points, int k, KmeansInit init,
                        std::uint64_t seed, int max_iters = 300,
                        double tol = 1e-4);

/// Exact O(N^2) silhouette, macro-averaged: mean over clusters of the mean
/// over members of (b-a)/max(a,b). Singletons score 0; 0/0 guards to 0.
/// Requires at least two clusters, each non-empty.
double silhouette_score(const MatD& points, const std::vector<int>& assignments);

/// Runs kmeans for every k in the range, scores each clustering with the
/// exact silhouette, and returns the best one (ties break toward smaller k).
ClusteringResult iterative_kmeans(const MatD& points, KRange krange,
                                  KmeansInit init, std::uint64_t seed);

/// Uniform subset without replacement of size min(cap, N); returns sorted
/// row indices. Deterministic under the seed.
std::vector<Index> subsample_for_silhouette(const MatD& points, Index cap,
                                            std::uint64_t seed);

/// Convenience: gathers the listed rows into a new matrix.
MatD gather_rows(const MatD& points, const std::vector<Index>& rows);

}  // namespace sdcn
