#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdcn/autoencoder.hpp"
#include "sdcn/clustering.hpp"
#include "sdcn/image.hpp"
#include "sdcn/types.hpp"

namespace sdcn {

struct ChannelAxis {
  std::string unit = "channel";
  double start = 0.0;
  double step = 1.0;
};

/// (width x height x depth) spectral cube. Storage is pixel-major with the
/// channel axis fastest-varying, so the flat pixel id i + j*width indexes a
/// contiguous depth-long spectrum and flattening is a reinterpretation.
struct DataCube {
  Index width = 0;
  Index height = 0;
  Index depth = 0;
  ChannelAxis axis;
  std::vector<float> data;  // width*height*depth

  static DataCube zeros(Index width, Index height, Index depth,
                        ChannelAxis axis = {});

  Index pixels() const { return width * height; }
  Index flat_id(Index i, Index j) const { return i + j * width; }

  float* spectrum(Index flat) { return data.data() + flat * depth; }
  const float* spectrum(Index flat) const { return data.data() + flat * depth; }

  /// Zero-copy (pixels x depth) batch view; row a is the spectrum of the
  /// pixel with flat id a.
  Eigen::Map<const MatF> as_matrix() const {
    return Eigen::Map<const MatF>(data.data(), pixels(), depth);
  }
};

// Cube container: magic "DCUB", u16 LE version, u32 LE header length +
// UTF-8 JSON header, width*height*depth little-endian f32, CRC32 over
// header + payload bytes. Bit-exact round trips.
inline constexpr std::uint16_t kCubeFormatVersion = 1;

DataCube load_cube(const std::string& path);
void save_cube(const DataCube& cube, const std::string& path);

/// Copying flatten (use DataCube::as_matrix for the zero-copy view).
MatF flatten(const DataCube& cube);
/// Rebuilds a cube from a (pixels x depth) batch in flat-id row order.
DataCube unflatten(const MatF& batch, Index width, Index height,
                   ChannelAxis axis = {});

struct SegmentationResult {
  int k = 0;
  Index width = 0;
  Index height = 0;
  ChannelAxis axis;
  std::vector<int> assignments;            // per pixel, relabeled by size
  std::vector<std::vector<std::uint8_t>> masks;  // k binary maps, width*height
  std::vector<Index> member_counts;        // per cluster
  MatD barycenters;                        // k x latent: member latent means
  MatF decoded_barycenters;                // k x depth: Dec[barycenter]
  MatF cluster_mean_reconstructed;         // k x depth: mean of Dec[latent]
  MatF cluster_mean_true;                  // k x depth: mean of input spectra
  MatF decoded_latent_mean;                // k x depth: == decoded_barycenters
  double silhouette = 0.0;
};

/// Full pipeline: encode every pixel, iterative K-Means in latent space,
/// then per-cluster barycenters, decoded spectra, averages and binary masks.
/// Cluster labels are ordered by descending member count.
SegmentationResult segment(const DataCube& cube, const AutoEncoder<float>& model,
                           KRange krange, KmeansInit init, std::uint64_t seed);

struct IntegratedMaps {
  MatD true_map;      // height x width: sum of channels
  MatD decoded_map;   // height x width: sum of reconstructed channels
  MatD embedded_map;  // height x width: sum of latent coordinates
};

IntegratedMaps integrated_maps(const DataCube& cube, const AutoEncoder<float>& model);

/// Keeps pixels where the mask is set, black elsewhere; one image per mask.
std::vector<RgbImage> masked_rgb(const std::vector<std::vector<std::uint8_t>>& masks,
                                 const RgbImage& rgb);

/// Writes masks (P5, 0/255), one spectra CSV per cluster and summary.json
/// into out_dir. Deterministic formatting: re-export is byte-identical.
void export_result(const SegmentationResult& result, const std::string& out_dir);

}  // namespace sdcn
