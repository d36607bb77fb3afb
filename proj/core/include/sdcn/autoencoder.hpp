#pragma once

#include <cstdint>
#include <vector>

#include "sdcn/nn.hpp"
#include "sdcn/types.hpp"

namespace sdcn {

enum class SizingRule { kHalfK, kPow2, kExplicit };
enum class Variant { kMlp, kSnn };

/// Architecture descriptor. The divide-by rules size hidden layers from the
/// input dimension; explicit mode carries literal size chains (which is how
/// the reproduction configs express their encoders/decoders).
struct ArchitectureSpec {
  Index input_dim = 0;
  Index latent_dim = 0;
  SizingRule sizing_rule = SizingRule::kPow2;
  int hidden_layers = 2;             // used by kHalfK / kPow2
  std::vector<Index> encoder_sizes;  // kExplicit: [input, h1, ..., hL]
  std::vector<Index> decoder_sizes;  // optional: [latent, d1, ..., input]
  Variant variant = Variant::kSnn;
  double dropout_p = 0.0;
};

/// Encoder size chain [input, h1, ..., hL, latent].
/// kHalfK: h_k = input/(2k); kPow2: h_k = input/2^k (integer division,
/// clamped to at least 2*latent_dim); kExplicit passes the listed sizes
/// through. Throws InvalidArchitectureError when the chain is not strictly
/// decreasing.
std::vector<Index> plan_layer_sizes(const ArchitectureSpec& spec);

/// Decoder size chain [latent, ..., input]; the mirror of the encoder chain
/// unless decoder_sizes lists an asymmetric chain explicitly.
std::vector<Index> plan_decoder_sizes(const ArchitectureSpec& spec);

template <typename T = float>
struct AutoEncoder {
  std::vector<DenseLayer<T>> encoder;
  std::vector<DenseLayer<T>> decoder;
  ArchitectureSpec spec;
  std::uint64_t init_seed = 0;

  /// Deterministic latent coordinates (inference mode, no dropout).
  Mat<T> encode(const Mat<T>& x) const { return stack_forward(encoder, x); }
  /// Reconstructed spectra from latent points.
  Mat<T> decode(const Mat<T>& z) const { return stack_forward(decoder, z); }
  Mat<T> reconstruct(const Mat<T>& x) const { return decode(encode(x)); }

  Index input_dim() const { return encoder.empty() ? 0 : encoder.front().in_dim(); }
  Index latent_dim() const { return encoder.empty() ? 0 : encoder.back().out_dim(); }
};

namespace detail {
void validate_build_spec(const ArchitectureSpec& spec);
}

/// Builds the mirrored pair with Kaiming-initialized layers. Hidden layers
/// take the variant's activation (ReLU with dropout for kMlp, SELU for kSnn);
/// the latent and output heads are linear.
template <typename T = float>
AutoEncoder<T> build_autoencoder(const ArchitectureSpec& spec, std::uint64_t seed) {
  detail::validate_build_spec(spec);
  const std::vector<Index> enc_chain = plan_layer_sizes(spec);
  const std::vector<Index> dec_chain = plan_decoder_sizes(spec);

  AutoEncoder<T> model;
  model.spec = spec;
  model.init_seed = seed;
  Rng seeder(seed);

  auto build_stack = [&](const std::vector<Index>& chain) {
    std::vector<DenseLayer<T>> stack;
    stack.reserve(chain.size() - 1);
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
      DenseLayer<T> layer =
          kaiming_init<T>(chain[i], chain[i + 1], seeder.next_u64());
      const bool head = (i + 2 == chain.size());
      if (head) {
        layer.activation = Activation::kIdentity;
        layer.dropout_p = T(0);
      } else if (spec.variant == Variant::kSnn) {
        layer.activation = Activation::kSelu;
        layer.dropout_p = T(0);
      } else {
        layer.activation = Activation::kRelu;
        layer.dropout_p = static_cast<T>(spec.dropout_p);
      }
      stack.push_back(std::move(layer));
    }
    return stack;
  };

  model.encoder = build_stack(enc_chain);
  model.decoder = build_stack(dec_chain);
  return model;
}

}  // namespace sdcn
