#include "sdcn/presets.hpp"

#include <cmath>
#include <numbers>

namespace sdcn {
namespace presets {

namespace {

// MUSE-like optical grid, angstrom
const ChannelAxis kAstroAxis{"angstrom", 4750.0, 4.5};
constexpr Index kAstroDepth = 1024;

// XRF energy grid, keV
const ChannelAxis kXrfAxis{"keV", 0.0, 0.04};
constexpr Index kXrfDepth = 512;

LineList astro_base() {
  LineList list;
  list.grid = kAstroAxis;
  list.depth = kAstroDepth;
  list.sigma_instrumental = 2.6;
  list.sigma_physical_lo = 1.5;
  list.sigma_physical_hi = 5.5;
  list.noise_std = 0.0;  // noise is added at cube-generation time
  return list;
}

void add_scaled(LineList& list, double center, double ratio, double scale) {
  list.lines.push_back({center, ratio * scale});
}

}  // namespace

LineList astro_lines(AstroClass cls) {
  LineList list = astro_base();
  const double hbeta = 12.0;  // overall flux scale
  switch (cls) {
    case AstroClass::kHii:
      add_scaled(list, 4861.3, 1.00, hbeta);   // H-beta
      add_scaled(list, 4958.9, 0.35, hbeta);   // [OIII]
      add_scaled(list, 5006.8, 1.05, hbeta);   // [OIII]
      add_scaled(list, 5875.6, 0.12, hbeta);   // HeI
      add_scaled(list, 6300.3, 0.03, hbeta);   // [OI]
      add_scaled(list, 6562.8, 2.86, hbeta);   // H-alpha
      add_scaled(list, 6548.0, 0.12, hbeta);   // [NII]
      add_scaled(list, 6583.4, 0.35, hbeta);   // [NII]
      add_scaled(list, 6716.4, 0.30, hbeta);   // [SII]
      add_scaled(list, 6730.8, 0.21, hbeta);   // [SII]
      add_scaled(list, 9068.6, 0.25, hbeta);   // [SIII]
      break;
    case AstroClass::kPlanetaryNebula:
      add_scaled(list, 4861.3, 1.00, hbeta);
      add_scaled(list, 4958.9, 3.60, hbeta);
      add_scaled(list, 5006.8, 10.80, hbeta);
      add_scaled(list, 5875.6, 0.14, hbeta);
      add_scaled(list, 6300.3, 0.12, hbeta);
      add_scaled(list, 6562.8, 2.80, hbeta);
      add_scaled(list, 6548.0, 0.30, hbeta);
      add_scaled(list, 6583.4, 0.95, hbeta);
      add_scaled(list, 6716.4, 0.08, hbeta);
      add_scaled(list, 6730.8, 0.07, hbeta);
      add_scaled(list, 7065.2, 0.10, hbeta);   // HeI
      add_scaled(list, 7135.8, 0.35, hbeta);   // [ArIII]
      break;
    case AstroClass::kShock:
      add_scaled(list, 4861.3, 1.00, hbeta);
      add_scaled(list, 4958.9, 0.30, hbeta);
      add_scaled(list, 5006.8, 0.95, hbeta);
      add_scaled(list, 6300.3, 0.75, hbeta);   // strong [OI]
      add_scaled(list, 6363.8, 0.25, hbeta);
      add_scaled(list, 6562.8, 3.00, hbeta);
      add_scaled(list, 6548.0, 0.50, hbeta);
      add_scaled(list, 6583.4, 1.50, hbeta);
      add_scaled(list, 6716.4, 1.10, hbeta);   // strong [SII]
      add_scaled(list, 6730.8, 0.85, hbeta);
      add_scaled(list, 7319.9, 0.35, hbeta);   // [OII]
      add_scaled(list, 7330.2, 0.30, hbeta);
      break;
  }
  return list;
}

SpectralDictionary astro_dictionary() {
  SpectralDictionary dict;
  dict.depth = kAstroDepth;
  dict.axis = kAstroAxis;
  dict.entries.push_back(
      {"hii_region", {255, 0, 0}, synth_line_spectrum(astro_lines(AstroClass::kHii), 11)});
  dict.entries.push_back({"planetary_nebula",
                          {0, 255, 0},
                          synth_line_spectrum(astro_lines(AstroClass::kPlanetaryNebula), 12)});
  dict.entries.push_back(
      {"shock_region", {0, 0, 255}, synth_line_spectrum(astro_lines(AstroClass::kShock), 13)});
  return dict;
}

namespace {

// one pigment template: fluorescence peaks (center keV, peak height) plus a
// weak decaying continuum
VecF pigment_template(std::initializer_list<std::pair<double, double>> peaks) {
  LineList list;
  list.grid = kXrfAxis;
  list.depth = kXrfDepth;
  list.sigma_instrumental = 0.10;
  list.sigma_physical_lo = 0.0;
  list.sigma_physical_hi = 0.0;
  list.noise_std = 0.0;
  const double sqrt_2pi = std::sqrt(2.0 * std::numbers::pi);
  for (const auto& [center, height] : peaks)
    list.lines.push_back({center, height * list.sigma_instrumental * sqrt_2pi});
  VecF tmpl = synth_line_spectrum(list, 0);
  for (Index e = 0; e < kXrfDepth; ++e) {
    const double kev = kXrfAxis.start + kXrfAxis.step * static_cast<double>(e);
    tmpl(e) += static_cast<float>(0.04 * std::exp(-kev / 6.0));
  }
  return tmpl;
}

}  // namespace

SpectralDictionary xrf_dictionary() {
  SpectralDictionary dict;
  dict.depth = kXrfDepth;
  dict.axis = kXrfAxis;
  dict.entries.push_back({"lead_white",
                          {255, 255, 255},
                          pigment_template({{2.35, 0.45},
                                            {3.69, 0.12},
                                            {10.55, 1.00},
                                            {12.61, 0.85},
                                            {14.76, 0.25}})});
  dict.entries.push_back({"vermilion",
                          {255, 0, 0},
                          pigment_template({{2.31, 0.25},
                                            {9.99, 1.00},
                                            {11.82, 0.80},
                                            {13.83, 0.20}})});
  dict.entries.push_back(
      {"azurite", {0, 0, 255}, pigment_template({{8.05, 1.00}, {8.90, 0.20}})});
  dict.entries.push_back({"green_earth",
                          {0, 255, 0},
                          pigment_template({{3.31, 0.15},
                                            {3.69, 0.10},
                                            {6.40, 1.00},
                                            {7.06, 0.17}})});
  return dict;
}

namespace {

void fill(RgbImage& img, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  for (std::size_t p = 0; p + 2 < img.pixels.size(); p += 3) {
    img.pixels[p] = r;
    img.pixels[p + 1] = g;
    img.pixels[p + 2] = b;
  }
}

void disc(RgbImage& img, double cx, double cy, double radius, std::uint8_t r,
          std::uint8_t g, std::uint8_t b) {
  for (Index j = 0; j < img.height; ++j)
    for (Index i = 0; i < img.width; ++i) {
      const double dx = static_cast<double>(i) - cx;
      const double dy = static_cast<double>(j) - cy;
      if (dx * dx + dy * dy <= radius * radius) {
        std::uint8_t* px = img.at(i, j);
        px[0] = r;
        px[1] = g;
        px[2] = b;
      }
    }
}

void rect(RgbImage& img, double x0, double y0, double x1, double y1,
          std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  for (Index j = 0; j < img.height; ++j)
    for (Index i = 0; i < img.width; ++i) {
      const double u = static_cast<double>(i) / static_cast<double>(img.width);
      const double v = static_cast<double>(j) / static_cast<double>(img.height);
      if (u >= x0 && u < x1 && v >= y0 && v < y1) {
        std::uint8_t* px = img.at(i, j);
        px[0] = r;
        px[1] = g;
        px[2] = b;
      }
    }
}

}  // namespace

RgbImage astro_seed_image(Index width, Index height) {
  RgbImage img;
  img.width = width;
  img.height = height;
  img.pixels.assign(static_cast<std::size_t>(3 * width * height), 0);
  fill(img, 18, 18, 18);  // dark sky, beyond the RGB threshold of every class
  const double m = static_cast<double>(std::min(width, height));
  disc(img, 0.30 * width, 0.32 * height, 0.24 * m, 255, 0, 0);
  disc(img, 0.72 * width, 0.35 * height, 0.22 * m, 0, 255, 0);
  disc(img, 0.50 * width, 0.74 * height, 0.25 * m, 0, 0, 255);
  return img;
}

RgbImage xrf_seed_image(Index width, Index height) {
  RgbImage img;
  img.width = width;
  img.height = height;
  img.pixels.assign(static_cast<std::size_t>(3 * width * height), 0);
  fill(img, 255, 255, 255);  // lead-white ground
  rect(img, 0.10, 0.10, 0.45, 0.52, 255, 0, 0);    // vermilion initial
  rect(img, 0.55, 0.14, 0.90, 0.60, 0, 0, 255);    // azurite panel
  rect(img, 0.10, 0.70, 0.90, 0.90, 0, 255, 0);    // green-earth border
  return img;
}

GenConfig astro_gen_config(std::uint64_t seed) {
  GenConfig cfg;
  cfg.seed = seed;
  cfg.rgb_threshold = 0.2;
  cfg.counts_scale = 1.0;
  cfg.noise = NoiseKind::kGaussian;
  cfg.gaussian_noise_std = 0.15;
  cfg.rgb_krange = {2, 10};
  return cfg;
}

GenConfig xrf_gen_config(std::uint64_t seed) {
  GenConfig cfg;
  cfg.seed = seed;
  cfg.rgb_threshold = 0.6;
  cfg.counts_scale = 50.0;
  cfg.noise = NoiseKind::kPoisson;
  cfg.background_rate = 0.05;
  cfg.rgb_krange = {2, 10};
  return cfg;
}

ArchitectureSpec astro_architecture() {
  ArchitectureSpec spec;
  spec.input_dim = 1024;
  spec.latent_dim = 3;
  spec.sizing_rule = SizingRule::kExplicit;
  spec.encoder_sizes = {1024, 512, 256, 32};
  spec.decoder_sizes = {3, 128, 256, 1024};
  spec.variant = Variant::kSnn;
  spec.dropout_p = 0.0;
  return spec;
}

ArchitectureSpec xrf_architecture() {
  ArchitectureSpec spec;
  spec.input_dim = 512;
  spec.latent_dim = 3;
  spec.sizing_rule = SizingRule::kExplicit;
  spec.encoder_sizes = {512, 256, 128, 64, 32};
  spec.decoder_sizes = {3, 64, 128, 256, 512};
  spec.variant = Variant::kSnn;
  spec.dropout_p = 0.0;
  return spec;
}

TrainConfig astro_train_config(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.seed = seed;
  cfg.epochs = 30;
  cfg.batch_size = 256;
  cfg.variant = DcVariant::kPlainDcn;
  cfg.gamma = Schedule::constant(0.0);
  cfg.beta = Schedule::constant(0.0);
  return cfg;
}

TrainConfig xrf_train_config(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.seed = seed;
  cfg.epochs = 36;
  cfg.batch_size = 256;
  cfg.variant = DcVariant::kVadeMmd;
  cfg.gamma = Schedule::constant(0.01);
  cfg.beta = Schedule::step(0.01, 30);
  return cfg;
}

}  // namespace presets
}  // namespace sdcn
