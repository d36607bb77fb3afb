#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "sdcn/autoencoder.hpp"
#include "sdcn/model_io.hpp"
#include "sdcn/rng.hpp"

using namespace sdcn;

namespace {

ArchitectureSpec explicit_spec(std::vector<Index> enc, std::vector<Index> dec,
                               Index latent) {
  ArchitectureSpec spec;
  spec.input_dim = enc.front();
  spec.latent_dim = latent;
  spec.sizing_rule = SizingRule::kExplicit;
  spec.encoder_sizes = std::move(enc);
  spec.decoder_sizes = std::move(dec);
  return spec;
}

std::filesystem::path temp_file(const char* name) {
  const auto dir = std::filesystem::temp_directory_path() / "sdcn_ae_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("layer size chains: explicit reproduction architectures") {
  const auto a = explicit_spec({1024, 512, 256, 32}, {}, 3);
  CHECK(plan_layer_sizes(a) == std::vector<Index>{1024, 512, 256, 32, 3});

  const auto b = explicit_spec({512, 256, 128, 64, 32}, {}, 3);
  CHECK(plan_layer_sizes(b) == std::vector<Index>{512, 256, 128, 64, 32, 3});
}

TEST_CASE("layer size chains: divide-by rules") {
  ArchitectureSpec pow2;
  pow2.input_dim = 64;
  pow2.latent_dim = 4;
  pow2.sizing_rule = SizingRule::kPow2;
  pow2.hidden_layers = 2;
  CHECK(plan_layer_sizes(pow2) == std::vector<Index>{64, 32, 16, 4});

  ArchitectureSpec halfk;
  halfk.input_dim = 120;
  halfk.latent_dim = 5;
  halfk.sizing_rule = SizingRule::kHalfK;
  halfk.hidden_layers = 2;
  // h_k = input/(2k): 60, 30
  CHECK(plan_layer_sizes(halfk) == std::vector<Index>{120, 60, 30, 5});
}

TEST_CASE("layer size chains: clamp and monotonicity violations throw") {
  ArchitectureSpec spec;
  spec.input_dim = 64;
  spec.latent_dim = 16;
  spec.sizing_rule = SizingRule::kPow2;
  spec.hidden_layers = 3;  // 32, 32 (clamped), ... not strictly decreasing
  CHECK_THROWS_AS(plan_layer_sizes(spec), InvalidArchitectureError);

  auto bad = explicit_spec({64, 64, 16}, {}, 3);
  CHECK_THROWS_AS(plan_layer_sizes(bad), InvalidArchitectureError);

  auto ends_low = explicit_spec({64, 32, 2}, {}, 3);  // ends below latent
  CHECK_THROWS_AS(plan_layer_sizes(ends_low), InvalidArchitectureError);

  ArchitectureSpec inverted;
  inverted.input_dim = 8;
  inverted.latent_dim = 8;
  CHECK_THROWS_AS(plan_layer_sizes(inverted), InvalidArchitectureError);
}

TEST_CASE("decoder chains: asymmetric and mirrored") {
  const auto astro = explicit_spec({1024, 512, 256, 32}, {3, 128, 256, 1024}, 3);
  CHECK(plan_decoder_sizes(astro) == std::vector<Index>{3, 128, 256, 1024});

  const auto xrf =
      explicit_spec({512, 256, 128, 64, 32}, {3, 64, 128, 256, 512}, 3);
  CHECK(plan_decoder_sizes(xrf) == std::vector<Index>{3, 64, 128, 256, 512});

  ArchitectureSpec sym;
  sym.input_dim = 8;
  sym.latent_dim = 2;
  sym.sizing_rule = SizingRule::kPow2;
  sym.hidden_layers = 1;
  CHECK(plan_layer_sizes(sym) == std::vector<Index>{8, 4, 2});
  CHECK(plan_decoder_sizes(sym) == std::vector<Index>{2, 4, 8});

  auto bad = explicit_spec({8, 4}, {3, 8}, 2);  // decoder must start at latent
  CHECK_THROWS_AS(plan_decoder_sizes(bad), InvalidArchitectureError);
}

TEST_CASE("mirror property holds for rule-sized specs") {
  for (const auto rule : {SizingRule::kPow2, SizingRule::kHalfK}) {
    for (int hidden = 1; hidden <= 3; ++hidden) {
      ArchitectureSpec spec;
      spec.input_dim = 256;
      spec.latent_dim = 3;
      spec.sizing_rule = rule;
      spec.hidden_layers = hidden;
      auto enc = plan_layer_sizes(spec);
      auto dec = plan_decoder_sizes(spec);
      std::reverse(dec.begin(), dec.end());
      CHECK(enc == dec);
    }
  }
}

TEST_CASE("build: layer shapes, head activations, variant rules") {
  const auto spec = explicit_spec({1024, 512, 256, 32}, {3, 128, 256, 1024}, 3);
  const auto model = build_autoencoder<float>(spec, 99);
  REQUIRE(model.encoder.size() == 4);
  REQUIRE(model.decoder.size() == 3);
  CHECK(model.encoder[0].in_dim() == 1024);
  CHECK(model.encoder[0].out_dim() == 512);
  CHECK(model.encoder[3].out_dim() == 3);
  CHECK(model.decoder[0].in_dim() == 3);
  CHECK(model.decoder[0].out_dim() == 128);
  CHECK(model.decoder[2].out_dim() == 1024);

  for (std::size_t i = 0; i + 1 < model.encoder.size(); ++i)
    CHECK(model.encoder[i].activation == Activation::kSelu);
  CHECK(model.encoder.back().activation == Activation::kIdentity);
  CHECK(model.decoder.back().activation == Activation::kIdentity);

  ArchitectureSpec snn_dropout = spec;
  snn_dropout.dropout_p = 0.1;
  CHECK_THROWS_AS(build_autoencoder<float>(snn_dropout, 1), InvalidArchitectureError);

  ArchitectureSpec mlp = spec;
  mlp.variant = Variant::kMlp;
  mlp.dropout_p = 0.2;
  const auto mlp_model = build_autoencoder<float>(mlp, 1);
  CHECK(mlp_model.encoder[0].activation == Activation::kRelu);
  CHECK(mlp_model.encoder[0].dropout_p == doctest::Approx(0.2f));
  CHECK(mlp_model.encoder.back().dropout_p == 0.0f);
}

TEST_CASE("encode: identity-padded toy model picks leading coordinates") {
  ArchitectureSpec spec = explicit_spec({4, 3}, {2, 3, 4}, 2);
  AutoEncoder<float> model = build_autoencoder<float>(spec, 5);
  // overwrite with identity-padded weights and identity activations
  for (auto& layer : model.encoder) {
    layer.weights = MatF::Identity(layer.out_dim(), layer.in_dim());
    layer.bias.setZero();
    layer.activation = Activation::kIdentity;
  }
  MatF x(2, 4);
  x << 1, 2, 3, 4, 5, 6, 7, 8;
  const MatF z = model.encode(x);
  CHECK(z(0, 0) == 1.0f);
  CHECK(z(0, 1) == 2.0f);
  CHECK(z(1, 0) == 5.0f);
  CHECK(z(1, 1) == 6.0f);

  // pointwise map: duplicated row in, duplicated latent out
  MatF dup(2, 4);
  dup.row(0) = x.row(0);
  dup.row(1) = x.row(0);
  const MatF zdup = model.encode(dup);
  CHECK(zdup.row(0) == zdup.row(1));

  MatF wrong(1, 3);
  wrong.setZero();
  CHECK_THROWS_AS(model.encode(wrong), ShapeError);
}

TEST_CASE("decode mirrors encode's contracts") {
  ArchitectureSpec spec = explicit_spec({4, 3}, {2, 3, 4}, 2);
  AutoEncoder<float> model = build_autoencoder<float>(spec, 6);
  MatF z(2, 2);
  z << 0.5f, -0.5f, 1.0f, 2.0f;
  const MatF x = model.decode(z);
  CHECK(x.rows() == 2);
  CHECK(x.cols() == 4);

  MatF dup(2, 2);
  dup.row(0) = z.row(0);
  dup.row(1) = z.row(0);
  const MatF xdup = model.decode(dup);
  CHECK(xdup.row(0) == xdup.row(1));

  MatF wrong(1, 3);
  wrong.setZero();
  CHECK_THROWS_AS(model.decode(wrong), ShapeError);
}

TEST_CASE("build determinism: same seed, same layers") {
  const auto spec = explicit_spec({64, 32, 16}, {}, 4);
  const auto a = build_autoencoder<float>(spec, 12345);
  const auto b = build_autoencoder<float>(spec, 12345);
  for (std::size_t i = 0; i < a.encoder.size(); ++i)
    CHECK(a.encoder[i].weights == b.encoder[i].weights);
  for (std::size_t i = 0; i < a.decoder.size(); ++i)
    CHECK(a.decoder[i].weights == b.decoder[i].weights);
}

TEST_CASE("model file round trip is bit-exact") {
  const auto spec = explicit_spec({32, 16, 8}, {}, 3);
  const auto model = build_autoencoder<float>(spec, 321);
  const auto path = temp_file("roundtrip.sdcn");
  save_model(model, path.string(), R"({"note":"unit"})");
  const auto loaded = load_model(path.string());

  REQUIRE(loaded.encoder.size() == model.encoder.size());
  for (std::size_t i = 0; i < model.encoder.size(); ++i) {
    CHECK(loaded.encoder[i].weights == model.encoder[i].weights);
    CHECK(loaded.encoder[i].bias == model.encoder[i].bias);
    CHECK(loaded.encoder[i].activation == model.encoder[i].activation);
  }
  CHECK(loaded.spec.encoder_sizes == model.spec.encoder_sizes);
  CHECK(loaded.init_seed == model.init_seed);
  CHECK(load_model_training_meta(path.string()) == R"({"note":"unit"})");

  Rng rng(8);
  MatF x(5, 32);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = static_cast<float>(rng.normal());
  CHECK(model.encode(x) == loaded.encode(x));

  // saving the loaded model again reproduces the file byte for byte
  const auto path2 = temp_file("roundtrip2.sdcn");
  save_model(loaded, path2.string(), R"({"note":"unit"})");
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  const std::string b1((std::istreambuf_iterator<char>(f1)), {});
  const std::string b2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(b1 == b2);
}

TEST_CASE("model file corruption and version errors are distinct") {
  const auto spec = explicit_spec({16, 8}, {}, 2);
  const auto model = build_autoencoder<float>(spec, 11);
  const auto path = temp_file("corrupt.sdcn");
  save_model(model, path.string());

  auto read_bytes = [&]() {
    std::ifstream f(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(f)), {});
  };
  auto write_bytes = [&](const std::string& bytes, const char* name) {
    const auto p = temp_file(name);
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    return p;
  };

  const std::string original = read_bytes();

  // flip one payload byte -> checksum failure
  std::string corrupted = original;
  corrupted[original.size() / 2] ^= 0x01;
  CHECK_THROWS_AS(load_model(write_bytes(corrupted, "bad_crc.sdcn").string()),
                  ChecksumError);

  // bump the version tag -> version error naming found/expected
  std::string versioned = original;
  versioned[4] = 9;
  CHECK_THROWS_WITH_AS(load_model(write_bytes(versioned, "bad_ver.sdcn").string()),
                       doctest::Contains("version 9"), VersionError);

  // cut the file short -> truncation
  const std::string truncated = original.substr(0, original.size() / 2);
  CHECK_THROWS_AS(load_model(write_bytes(truncated, "trunc.sdcn").string()),
                  TruncatedError);

  // damage the magic -> format error
  std::string magicless = original;
  magicless[0] = 'X';
  CHECK_THROWS_AS(load_model(write_bytes(magicless, "bad_magic.sdcn").string()),
                  FormatError);
}
