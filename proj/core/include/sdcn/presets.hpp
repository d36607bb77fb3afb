#pragma once

#include <cstdint>

#include "sdcn/autoencoder.hpp"
#include "sdcn/deep_cluster.hpp"
#include "sdcn/image.hpp"
#include "sdcn/synthgen.hpp"

namespace sdcn {
namespace presets {

// Desk-scale reproduction presets: a synthetic nebular-spectra use case
// (emission-line classes on a MUSE-like wavelength grid, Gaussian noise)
// and a synthetic MA-XRF use case (pigment fluorescence lines on a keV
// grid, Poisson counts).

enum class AstroClass { kHii, kPlanetaryNebula, kShock };

/// Emission-line model of one nebular class; line ratios distinguish the
/// classes, widths combine an instrumental and a physical component.
LineList astro_lines(AstroClass cls);

/// Three-entry dictionary (pure red = HII, pure green = planetary nebula,
/// pure blue = shock) with templates synthesized from the line lists.
SpectralDictionary astro_dictionary();

/// Four-pigment dictionary (lead white, vermilion, azurite, green earth)
/// with characteristic fluorescence peaks plus a weak continuum.
SpectralDictionary xrf_dictionary();

/// Tricolor discs on a dark background; the dark background sits beyond the
/// astro RGB threshold and becomes the noise-only class.
RgbImage astro_seed_image(Index width, Index height);

/// Four-color panel layout; every color matches a dictionary entry.
RgbImage xrf_seed_image(Index width, Index height);

GenConfig astro_gen_config(std::uint64_t seed);
GenConfig xrf_gen_config(std::uint64_t seed);

/// Encoder 1024-512-256-32-3, decoder 3-128-256-1024, SELU hidden layers.
ArchitectureSpec astro_architecture();
/// Encoder 512-256-128-64-32-3, decoder 3-64-128-256-512, SELU hidden layers.
ArchitectureSpec xrf_architecture();

/// Plain autoencoder training (no clustering or MMD weight).
TrainConfig astro_train_config(std::uint64_t seed);
/// Variational deep embedding: gamma = 0.01, beta = 0.01 switched on at
/// epoch 30.
TrainConfig xrf_train_config(std::uint64_t seed);

}  // namespace presets
}  // namespace sdcn
