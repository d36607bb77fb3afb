#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sdcn/clustering.hpp"
#include "sdcn/datacube.hpp"
#include "sdcn/image.hpp"
#include "sdcn/types.hpp"

namespace sdcn {

struct DictionaryEntry {
  std::string label;
  std::array<std::uint8_t, 3> rgb{0, 0, 0};
  VecF template_spectrum;  // non-negative, depth channels
};

/// RGB color -> spectral template mapping used to synthesize cubes from a
/// seed image.
struct SpectralDictionary {
  Index depth = 0;
  ChannelAxis axis;
  std::vector<DictionaryEntry> entries;
};

// Dictionary file: JSON {depth, channel_*, entries:[{label, rgb:[r,g,b],
// template:[...] | template_csv_path}]}. CSV templates hold one value per
// line (optionally "channel,value" rows), resolved relative to the file.
SpectralDictionary load_dictionary(const std::string& path);
void save_dictionary(const SpectralDictionary& dict, const std::string& path);

struct SpectralLine {
  double center = 0.0;  // in channel-axis units
  double flux = 0.0;    // integrated line flux, >= 0
};

/// Emission-line model for one synthetic spectrum: Gaussian profiles with a
/// fixed instrumental width plus a physical width drawn uniformly from a
/// range, and additive Gaussian channel noise.
struct LineList {
  std::vector<SpectralLine> lines;
  double sigma_instrumental = 0.0;
  double sigma_physical_lo = 0.0;
  double sigma_physical_hi = 0.0;
  double noise_std = 0.0;
  ChannelAxis grid;
  Index depth = 0;
};

/// Samples the line model on its channel grid. Every line center must lie
/// inside the grid span.
VecF synth_line_spectrum(const LineList& list, std::uint64_t seed);

/// Convex combination w*a + (1-w)*b.
VecF mix_models(const VecF& a, const VecF& b, double w);
/// Same with w drawn uniformly from (0,1) under the seed.
VecF mix_models(const VecF& a, const VecF& b, std::uint64_t seed);

enum class NoiseKind { kPoisson, kGaussian };

struct GenConfig {
  double rgb_threshold = 0.2;  // normalized RGB distance in (0,1]
  double counts_scale = 1.0;   // template -> expected counts scaling, > 0
  std::uint64_t seed = 0;
  KRange rgb_krange{2, 10};
  NoiseKind noise = NoiseKind::kPoisson;
  double gaussian_noise_std = 0.0;  // kGaussian: additive channel noise
  double background_rate = 0.0;     // kPoisson: per-channel lambda off-palette
};

struct LegendEntry {
  int id = 0;
  std::string label;
  std::array<std::uint8_t, 3> rgb{0, 0, 0};
  int dictionary_index = -1;  // -1 marks the background class
};

struct LabeledCube {
  DataCube cube;
  std::vector<int> labels;  // width*height ground-truth legend ids
  std::vector<LegendEntry> legend;
};

/// ganX-style generation: iterative K-Means over the seed image's RGB pixels,
/// centroid merging under the normalized distance threshold, nearest-entry
/// lookup (clusters beyond the threshold become background), then per-pixel
/// spectra sampled from the matched template. Per-pixel RNG streams are
/// derived from (seed, pixel id), so any evaluation order gives the same cube.
LabeledCube generate_cube(const RgbImage& rgb, const SpectralDictionary& dict,
                          const GenConfig& cfg);

/// Fraction of pixels covered by their mask's majority ground-truth label.
double purity(const std::vector<int>& labels_true,
              const std::vector<std::vector<std::uint8_t>>& masks);

void save_legend(const std::vector<LegendEntry>& legend, const std::string& path);
std::vector<LegendEntry> load_legend(const std::string& path);

}  // namespace sdcn
