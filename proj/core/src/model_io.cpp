#include "sdcn/model_io.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <json.hpp>
#include <vector>

#include "sdcn/errors.hpp"

namespace sdcn {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'S', 'D', 'C', 'N'};

void append_u16(std::vector<char>& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void append_u32(std::vector<char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void append_f32_block(std::vector<char>& out, const float* data, std::size_t n) {
  const char* bytes = reinterpret_cast<const char*>(data);
  out.insert(out.end(), bytes, bytes + n * sizeof(float));
}

std::uint32_t crc_of(const char* data, std::size_t n) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(data), static_cast<uInt>(n)));
}

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::kRelu:
      return "relu";
    case Activation::kSelu:
      return "selu";
    default:
      return "identity";
  }
}

Activation activation_from(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "selu") return Activation::kSelu;
  if (s == "identity") return Activation::kIdentity;
  throw FormatError("model manifest: unknown activation '" + s + "'");
}

const char* sizing_rule_name(SizingRule r) {
  switch (r) {
    case SizingRule::kHalfK:
      return "half_k";
    case SizingRule::kPow2:
      return "pow2";
    default:
      return "explicit";
  }
}

SizingRule sizing_rule_from(const std::string& s) {
  if (s == "half_k") return SizingRule::kHalfK;
  if (s == "pow2") return SizingRule::kPow2;
  if (s == "explicit") return SizingRule::kExplicit;
  throw FormatError("model manifest: unknown sizing_rule '" + s + "'");
}

json arch_to_json(const ArchitectureSpec& spec) {
  json j;
  j["input_dim"] = spec.input_dim;
  j["latent_dim"] = spec.latent_dim;
  j["sizing_rule"] = sizing_rule_name(spec.sizing_rule);
  j["hidden_layers"] = spec.hidden_layers;
  j["encoder_sizes"] = spec.encoder_sizes;
  j["decoder_sizes"] = spec.decoder_sizes;
  j["variant"] = spec.variant == Variant::kSnn ? "snn" : "mlp";
  j["dropout_p"] = spec.dropout_p;
  return j;
}

ArchitectureSpec arch_from_json(const json& j) {
  ArchitectureSpec spec;
  spec.input_dim = j.at("input_dim").get<Index>();
  spec.latent_dim = j.at("latent_dim").get<Index>();
  spec.sizing_rule = sizing_rule_from(j.at("sizing_rule").get<std::string>());
  spec.hidden_layers = j.at("hidden_layers").get<int>();
  spec.encoder_sizes = j.at("encoder_sizes").get<std::vector<Index>>();
  spec.decoder_sizes = j.at("decoder_sizes").get<std::vector<Index>>();
  spec.variant = j.at("variant").get<std::string>() == "snn" ? Variant::kSnn
                                                             : Variant::kMlp;
  spec.dropout_p = j.at("dropout_p").get<double>();
  return spec;
}

json layer_entry(const char* role, std::size_t index, const DenseLayer<float>& l) {
  json j;
  j["role"] = role;
  j["index"] = index;
  j["in"] = l.in_dim();
  j["out"] = l.out_dim();
  j["activation"] = activation_name(l.activation);
  j["dropout_p"] = static_cast<double>(l.dropout_p);
  return j;
}

struct Reader {
  const std::vector<char>& buf;
  std::size_t pos = 0;

  void need(std::size_t n, const char* what) const {
    if (pos + n > buf.size())
      throw TruncatedError(std::string("model file: truncated before ") + what);
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    std::uint16_t v = static_cast<std::uint8_t>(buf[pos]) |
                      (static_cast<std::uint16_t>(static_cast<std::uint8_t>(buf[pos + 1])) << 8);
    pos += 2;
    return v;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(buf[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
};

}  // namespace

void save_model(const AutoEncoder<float>& model, const std::string& path,
                const std::string& training_meta_json) {
  json manifest;
  manifest["arch"] = arch_to_json(model.spec);
  manifest["init_seed"] = model.init_seed;
  json layers = json::array();
  for (std::size_t i = 0; i < model.encoder.size(); ++i)
    layers.push_back(layer_entry("encoder", i, model.encoder[i]));
  for (std::size_t i = 0; i < model.decoder.size(); ++i)
    layers.push_back(layer_entry("decoder", i, model.decoder[i]));
  manifest["layers"] = layers;
  if (!training_meta_json.empty())
    manifest["training"] = json::parse(training_meta_json);

  const std::string manifest_str = manifest.dump();

  std::vector<char> body;
  body.insert(body.end(), manifest_str.begin(), manifest_str.end());
  auto append_stack = [&](const std::vector<DenseLayer<float>>& stack) {
    for (const auto& l : stack) {
      append_f32_block(body, l.weights.data(), static_cast<std::size_t>(l.weights.size()));
      append_f32_block(body, l.bias.data(), static_cast<std::size_t>(l.bias.size()));
    }
  };
  append_stack(model.encoder);
  append_stack(model.decoder);

  std::vector<char> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  append_u16(out, kModelFormatVersion);
  append_u32(out, static_cast<std::uint32_t>(manifest_str.size()));
  out.insert(out.end(), body.begin(), body.end());
  append_u32(out, crc_of(body.data(), body.size()));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("save_model: cannot open '" + path + "' for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("save_model: write failed for '" + path + "'");
}

namespace {

json read_manifest(const std::vector<char>& buf, std::size_t* payload_begin,
                   std::size_t* payload_end) {
  if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0)
    throw FormatError("model file: bad magic, expected SDCN");
  Reader r{buf, 4};
  const std::uint16_t version = r.u16("version");
  if (version != kModelFormatVersion)
    throw VersionError("model file: version " + std::to_string(version) +
                       ", expected " + std::to_string(kModelFormatVersion));
  const std::uint32_t manifest_len = r.u32("manifest length");
  r.need(manifest_len, "manifest");
  const std::size_t manifest_pos = r.pos;
  if (buf.size() < manifest_pos + manifest_len + 4)
    throw TruncatedError("model file: truncated before payload CRC");
  const std::size_t crc_pos = buf.size() - 4;
  if (crc_pos < manifest_pos + manifest_len)
    throw TruncatedError("model file: truncated manifest");

  json manifest;
  try {
    manifest = json::parse(buf.begin() + static_cast<std::ptrdiff_t>(manifest_pos),
                           buf.begin() + static_cast<std::ptrdiff_t>(manifest_pos + manifest_len));
  } catch (const json::exception& e) {
    throw FormatError(std::string("model file: manifest parse error: ") + e.what());
  }

  // diagnose a short payload from the declared layer shapes before trusting
  // the trailing four bytes as a CRC
  std::size_t declared = 0;
  try {
    for (const auto& entry : manifest.at("layers")) {
      const auto in = entry.at("in").get<std::size_t>();
      const auto out = entry.at("out").get<std::size_t>();
      declared += (in * out + out) * sizeof(float);
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("model file: manifest field error: ") + e.what());
  }
  const std::size_t available = crc_pos - (manifest_pos + manifest_len);
  if (available < declared)
    throw TruncatedError("model file: payload has " + std::to_string(available) +
                         " bytes, manifest declares " + std::to_string(declared));

  const std::uint32_t stored_crc =
      static_cast<std::uint8_t>(buf[crc_pos]) |
      (static_cast<std::uint32_t>(static_cast<std::uint8_t>(buf[crc_pos + 1])) << 8) |
      (static_cast<std::uint32_t>(static_cast<std::uint8_t>(buf[crc_pos + 2])) << 16) |
      (static_cast<std::uint32_t>(static_cast<std::uint8_t>(buf[crc_pos + 3])) << 24);
  const std::uint32_t actual_crc = crc_of(buf.data() + manifest_pos, crc_pos - manifest_pos);
  if (stored_crc != actual_crc)
    throw ChecksumError("model file: CRC mismatch");

  *payload_begin = manifest_pos + manifest_len;
  *payload_end = crc_pos;
  return manifest;
}

std::vector<char> read_all(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  f.seekg(0, std::ios::end);
  const std::streamoff size = f.tellg();
  f.seekg(0, std::ios::beg);
  std::vector<char> buf(static_cast<std::size_t>(size));
  if (size > 0) f.read(buf.data(), size);
  if (!f) throw IoError("read failed for '" + path + "'");
  return buf;
}

}  // namespace

AutoEncoder<float> load_model(const std::string& path) {
  const std::vector<char> buf = read_all(path);
  std::size_t payload_begin = 0, payload_end = 0;
  const json manifest = read_manifest(buf, &payload_begin, &payload_end);

  AutoEncoder<float> model;
  try {
    model.spec = arch_from_json(manifest.at("arch"));
    model.init_seed = manifest.at("init_seed").get<std::uint64_t>();

    std::size_t pos = payload_begin;
    auto read_layer = [&](const json& entry) {
      DenseLayer<float> layer;
      const Index in = entry.at("in").get<Index>();
      const Index out = entry.at("out").get<Index>();
      layer.activation = activation_from(entry.at("activation").get<std::string>());
      layer.dropout_p = static_cast<float>(entry.at("dropout_p").get<double>());
      const std::size_t wn = static_cast<std::size_t>(in) * static_cast<std::size_t>(out);
      if (pos + (wn + static_cast<std::size_t>(out)) * sizeof(float) > payload_end)
        throw TruncatedError("model file: payload shorter than manifest declares");
      layer.weights.resize(out, in);
      std::memcpy(layer.weights.data(), buf.data() + pos, wn * sizeof(float));
      pos += wn * sizeof(float);
      layer.bias.resize(out);
      std::memcpy(layer.bias.data(), buf.data() + pos,
                  static_cast<std::size_t>(out) * sizeof(float));
      pos += static_cast<std::size_t>(out) * sizeof(float);
      return layer;
    };

    for (const auto& entry : manifest.at("layers")) {
      const std::string role = entry.at("role").get<std::string>();
      if (role == "encoder")
        model.encoder.push_back(read_layer(entry));
      else if (role == "decoder")
        model.decoder.push_back(read_layer(entry));
      else
        throw FormatError("model file: unknown layer role '" + role + "'");
    }
    if (pos != payload_end)
      throw FormatError("model file: payload longer than manifest declares");
  } catch (const json::exception& e) {
    throw FormatError(std::string("model file: manifest field error: ") + e.what());
  }
  return model;
}

std::string load_model_training_meta(const std::string& path) {
  const std::vector<char> buf = read_all(path);
  std::size_t payload_begin = 0, payload_end = 0;
  const json manifest = read_manifest(buf, &payload_begin, &payload_end);
  if (!manifest.contains("training")) return "";
  return manifest.at("training").dump();
}

}  // namespace sdcn
