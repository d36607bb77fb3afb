#include "sdcn/autoencoder.hpp"

#include <algorithm>
#include <string>

#include "sdcn/errors.hpp"

namespace sdcn {

namespace {

std::string chain_to_string(const std::vector<Index>& chain) {
  std::string s = "[";
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(chain[i]);
  }
  return s + "]";
}

void require_strictly_decreasing(const std::vector<Index>& chain,
                                 const char* what) {
  for (std::size_t i = 0; i + 1 < chain.size(); ++i)
    if (chain[i] <= chain[i + 1])
      throw InvalidArchitectureError(std::string(what) +
                                     " chain is not strictly decreasing: " +
                                     chain_to_string(chain));
}

}  // namespace

std::vector<Index> plan_layer_sizes(const ArchitectureSpec& spec) {
  if (spec.input_dim < 1 || spec.latent_dim < 1)
    throw InvalidArchitectureError("plan_layer_sizes: dimensions must be positive");
  if (spec.latent_dim >= spec.input_dim)
    throw InvalidArchitectureError(
        "plan_layer_sizes: latent_dim must be smaller than input_dim");

  std::vector<Index> chain;
  switch (spec.sizing_rule) {
    case SizingRule::kExplicit: {
      if (spec.encoder_sizes.empty())
        throw InvalidArchitectureError(
            "plan_layer_sizes: explicit mode needs encoder_sizes");
      if (spec.encoder_sizes.front() != spec.input_dim)
        throw InvalidArchitectureError(
            "plan_layer_sizes: encoder_sizes must start at input_dim");
      chain = spec.encoder_sizes;
      break;
    }
    case SizingRule::kHalfK:
    case SizingRule::kPow2: {
      if (spec.hidden_layers < 0)
        throw InvalidArchitectureError("plan_layer_sizes: negative layer count");
      chain.push_back(spec.input_dim);
      for (int k = 1; k <= spec.hidden_layers; ++k) {
        Index h = spec.sizing_rule == SizingRule::kHalfK
                      ? spec.input_dim / (2 * static_cast<Index>(k))
                      : spec.input_dim >> k;
        h = std::max<Index>(h, 2 * spec.latent_dim);
        chain.push_back(h);
      }
      break;
    }
  }
  chain.push_back(spec.latent_dim);
  require_strictly_decreasing(chain, "encoder");
  return chain;
}

std::vector<Index> plan_decoder_sizes(const ArchitectureSpec& spec) {
  if (!spec.decoder_sizes.empty()) {
    std::vector<Index> chain = spec.decoder_sizes;
    if (chain.front() != spec.latent_dim)
      throw InvalidArchitectureError(
          "plan_decoder_sizes: decoder_sizes must start at latent_dim");
    if (chain.back() != spec.input_dim)
      throw InvalidArchitectureError(
          "plan_decoder_sizes: decoder_sizes must end at input_dim");
    std::vector<Index> reversed(chain.rbegin(), chain.rend());
    require_strictly_decreasing(reversed, "decoder (reversed)");
    return chain;
  }
  std::vector<Index> chain = plan_layer_sizes(spec);
  std::reverse(chain.begin(), chain.end());
  return chain;
}

namespace detail {

void validate_build_spec(const ArchitectureSpec& spec) {
  if (spec.dropout_p < 0.0 || spec.dropout_p >= 1.0)
    throw InvalidArchitectureError("build_autoencoder: dropout_p must be in [0,1)");
  if (spec.variant == Variant::kSnn && spec.dropout_p != 0.0)
    throw InvalidArchitectureError(
        "build_autoencoder: dropout is not supported on SELU layers; "
        "use the MLP variant or dropout_p = 0");
}

}  // namespace detail

}  // namespace sdcn
