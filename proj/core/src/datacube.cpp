#include "sdcn/datacube.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numeric>

#include "sdcn/errors.hpp"

namespace sdcn {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'D', 'C', 'U', 'B'};
constexpr Index kMaxElements = Index{1} << 31;  // container sanity limit

std::uint32_t crc_of(const char* data, std::size_t n) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(data), static_cast<uInt>(n)));
}

void check_dims(Index width, Index height, Index depth, const std::string& who) {
  if (width < 1 || height < 1 || depth < 1)
    throw DimensionError(who + ": dimensions must be positive, got " +
                         std::to_string(width) + "x" + std::to_string(height) +
                         "x" + std::to_string(depth));
  // overflow-safe product check
  if (height > kMaxElements / width || depth > kMaxElements / (width * height))
    throw DimensionError(who + ": dimensions overflow the container limit");
}

std::string format_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

DataCube DataCube::zeros(Index width, Index height, Index depth, ChannelAxis axis) {
  check_dims(width, height, depth, "DataCube");
  DataCube cube;
  cube.width = width;
  cube.height = height;
  cube.depth = depth;
  cube.axis = std::move(axis);
  cube.data.assign(static_cast<std::size_t>(width * height * depth), 0.0f);
  return cube;
}

void save_cube(const DataCube& cube, const std::string& path) {
  check_dims(cube.width, cube.height, cube.depth, "save_cube");
  if (cube.data.size() !=
      static_cast<std::size_t>(cube.width * cube.height * cube.depth))
    throw ShapeError("save_cube: data length does not match dimensions");

  json header;
  header["width"] = cube.width;
  header["height"] = cube.height;
  header["depth"] = cube.depth;
  header["dtype"] = "f32";
  header["order"] = "pixel-major, channel-fastest";
  header["channel_unit"] = cube.axis.unit;
  header["channel_start"] = cube.axis.start;
  header["channel_step"] = cube.axis.step;
  const std::string header_str = header.dump();

  std::vector<char> body;
  body.reserve(header_str.size() + cube.data.size() * sizeof(float));
  body.insert(body.end(), header_str.begin(), header_str.end());
  const char* raw = reinterpret_cast<const char*>(cube.data.data());
  body.insert(body.end(), raw, raw + cube.data.size() * sizeof(float));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("save_cube: cannot open '" + path + "' for writing");
  f.write(kMagic, 4);
  const std::uint16_t version = kCubeFormatVersion;
  char v16[2] = {static_cast<char>(version & 0xFF), static_cast<char>(version >> 8)};
  f.write(v16, 2);
  const std::uint32_t hlen = static_cast<std::uint32_t>(header_str.size());
  char l32[4];
  for (int i = 0; i < 4; ++i) l32[i] = static_cast<char>((hlen >> (8 * i)) & 0xFF);
  f.write(l32, 4);
  f.write(body.data(), static_cast<std::streamsize>(body.size()));
  const std::uint32_t crc = crc_of(body.data(), body.size());
  char c32[4];
  for (int i = 0; i < 4; ++i) c32[i] = static_cast<char>((crc >> (8 * i)) & 0xFF);
  f.write(c32, 4);
  if (!f) throw IoError("save_cube: write failed for '" + path + "'");
}

DataCube load_cube(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("load_cube: cannot open '" + path + "'");
  std::vector<char> buf((std::istreambuf_iterator<char>(f)),
                        std::istreambuf_iterator<char>());

  if (buf.size() < 10 || std::memcmp(buf.data(), kMagic, 4) != 0)
    throw FormatError("cube file: bad magic, expected DCUB");
  const std::uint16_t version =
      static_cast<std::uint8_t>(buf[4]) |
      (static_cast<std::uint16_t>(static_cast<std::uint8_t>(buf[5])) << 8);
  if (version != kCubeFormatVersion)
    throw VersionError("cube file: version " + std::to_string(version) +
                       ", expected " + std::to_string(kCubeFormatVersion));
  std::uint32_t hlen = 0;
  for (int i = 0; i < 4; ++i)
    hlen |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(buf[6 + i])) << (8 * i);
  const std::size_t header_pos = 10;
  if (buf.size() < header_pos + hlen + 4)
    throw TruncatedError("cube file: truncated header");

  json header;
  try {
    header = json::parse(buf.begin() + header_pos, buf.begin() + header_pos + hlen);
  } catch (const json::exception& e) {
    throw FormatError(std::string("cube file: header parse error: ") + e.what());
  }

  DataCube cube;
  try {
    cube.width = header.at("width").get<Index>();
    cube.height = header.at("height").get<Index>();
    cube.depth = header.at("depth").get<Index>();
    cube.axis.unit = header.at("channel_unit").get<std::string>();
    cube.axis.start = header.at("channel_start").get<double>();
    cube.axis.step = header.at("channel_step").get<double>();
    if (header.at("dtype").get<std::string>() != "f32")
      throw FormatError("cube file: unsupported dtype");
  } catch (const json::exception& e) {
    throw FormatError(std::string("cube file: header field error: ") + e.what());
  }
  check_dims(cube.width, cube.height, cube.depth, "cube file");

  const std::size_t count =
      static_cast<std::size_t>(cube.width * cube.height * cube.depth);
  const std::size_t payload_pos = header_pos + hlen;
  const std::size_t crc_pos = buf.size() - 4;
  if (crc_pos < payload_pos || crc_pos - payload_pos < count * sizeof(float))
    throw TruncatedError("cube file: payload shorter than header declares");
  if (crc_pos - payload_pos > count * sizeof(float))
    throw FormatError("cube file: payload longer than header declares");

  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i)
    stored |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(buf[crc_pos + i]))
              << (8 * i);
  if (stored != crc_of(buf.data() + header_pos, crc_pos - header_pos))
    throw ChecksumError("cube file: CRC mismatch");

  cube.data.resize(count);
  std::memcpy(cube.data.data(), buf.data() + payload_pos, count * sizeof(float));
  return cube;
}

MatF flatten(const DataCube& cube) { return cube.as_matrix(); }

DataCube unflatten(const MatF& batch, Index width, Index height, ChannelAxis axis) {
  if (batch.rows() != width * height)
    throw ShapeError("unflatten: batch rows do not match width*height");
  DataCube cube = DataCube::zeros(width, height, batch.cols(), std::move(axis));
  std::memcpy(cube.data.data(), batch.data(), cube.data.size() * sizeof(float));
  return cube;
}

namespace {

// Encodes (and optionally decodes) all pixels in bounded slabs.
constexpr Index kSlab = 4096;

MatF encode_all(const DataCube& cube, const AutoEncoder<float>& model) {
  const auto batch = cube.as_matrix();
  MatF latent(cube.pixels(), model.latent_dim());
  for (Index start = 0; start < cube.pixels(); start += kSlab) {
    const Index rows = std::min(kSlab, cube.pixels() - start);
    latent.middleRows(start, rows) = model.encode(batch.middleRows(start, rows));
  }
  return latent;
}

}  // namespace

SegmentationResult segment(const DataCube& cube, const AutoEncoder<float>& model,
                           KRange krange, KmeansInit init, std::uint64_t seed) {
  if (cube.depth != model.input_dim())
    throw ShapeError("segment: cube depth " + std::to_string(cube.depth) +
                     " does not match model input dim " +
                     std::to_string(model.input_dim()));
  const auto batch = cube.as_matrix();

  bool degenerate = true;
  for (Index i = 1; i < batch.rows() && degenerate; ++i)
    degenerate = (batch.row(i).array() == batch.row(0).array()).all();
  if (degenerate)
    throw DataError("segment: degenerate datacube, all pixel spectra are "
                    "identical; clustering below k=2 is undefined");

  const MatF latent = encode_all(cube, model);
  const MatD latent_d = latent.cast<double>();
  const ClusteringResult clustering = iterative_kmeans(latent_d, krange, init, seed);
  const int k = clustering.k;

  // relabel by descending member count (stable: original label breaks ties)
  std::vector<Index> counts(static_cast<std::size_t>(k), 0);
  for (int label : clustering.assignments) ++counts[static_cast<std::size_t>(label)];
  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (counts[static_cast<std::size_t>(a)] != counts[static_cast<std::size_t>(b)])
      return counts[static_cast<std::size_t>(a)] > counts[static_cast<std::size_t>(b)];
    return a < b;
  });
  std::vector<int> relabel(static_cast<std::size_t>(k));
  for (int newc = 0; newc < k; ++newc)
    relabel[static_cast<std::size_t>(order[static_cast<std::size_t>(newc)])] = newc;

  SegmentationResult result;
  result.k = k;
  result.width = cube.width;
  result.height = cube.height;
  result.axis = cube.axis;
  result.silhouette = clustering.silhouette;
  result.assignments.resize(clustering.assignments.size());
  for (std::size_t i = 0; i < clustering.assignments.size(); ++i)
    result.assignments[i] =
        relabel[static_cast<std::size_t>(clustering.assignments[i])];

  result.member_counts.assign(static_cast<std::size_t>(k), 0);
  for (int label : result.assignments)
    ++result.member_counts[static_cast<std::size_t>(label)];

  result.masks.assign(static_cast<std::size_t>(k),
                      std::vector<std::uint8_t>(
                          static_cast<std::size_t>(cube.pixels()), 0));
  for (Index p = 0; p < cube.pixels(); ++p)
    result.masks[static_cast<std::size_t>(
        result.assignments[static_cast<std::size_t>(p)])]
        [static_cast<std::size_t>(p)] = 1;

  // barycenters: exact member means of the latent points
  result.barycenters = MatD::Zero(k, model.latent_dim());
  for (Index p = 0; p < cube.pixels(); ++p)
    result.barycenters.row(result.assignments[static_cast<std::size_t>(p)]) +=
        latent_d.row(p);
  for (int c = 0; c < k; ++c)
    result.barycenters.row(c) /=
        static_cast<double>(result.member_counts[static_cast<std::size_t>(c)]);

  // one decode of the barycenters serves both fields, so they are equal by
  // construction
  const MatF bary_f = result.barycenters.cast<float>();
  result.decoded_barycenters = model.decode(bary_f);
  result.decoded_latent_mean = result.decoded_barycenters;

  // per-cluster means of decoded and true spectra, fixed-order accumulation
  MatD rec_sum = MatD::Zero(k, cube.depth);
  MatD true_sum = MatD::Zero(k, cube.depth);
  for (Index start = 0; start < cube.pixels(); start += kSlab) {
    const Index rows = std::min(kSlab, cube.pixels() - start);
    const MatF decoded = model.decode(latent.middleRows(start, rows));
    for (Index r = 0; r < rows; ++r) {
      const int c = result.assignments[static_cast<std::size_t>(start + r)];
      rec_sum.row(c) += decoded.row(r).cast<double>();
      true_sum.row(c) += batch.row(start + r).cast<double>();
    }
  }
  result.cluster_mean_reconstructed.resize(k, cube.depth);
  result.cluster_mean_true.resize(k, cube.depth);
  for (int c = 0; c < k; ++c) {
    const double inv = 1.0 / static_cast<double>(
                                 result.member_counts[static_cast<std::size_t>(c)]);
    result.cluster_mean_reconstructed.row(c) = (rec_sum.row(c) * inv).cast<float>();
    result.cluster_mean_true.row(c) = (true_sum.row(c) * inv).cast<float>();
  }
  return result;
}

IntegratedMaps integrated_maps(const DataCube& cube, const AutoEncoder<float>& model) {
  if (cube.depth != model.input_dim())
    throw ShapeError("integrated_maps: cube depth " + std::to_string(cube.depth) +
                     " does not match model input dim " +
                     std::to_string(model.input_dim()));
  const auto batch = cube.as_matrix();
  IntegratedMaps maps;
  maps.true_map.resize(cube.height, cube.width);
  maps.decoded_map.resize(cube.height, cube.width);
  maps.embedded_map.resize(cube.height, cube.width);
  for (Index start = 0; start < cube.pixels(); start += kSlab) {
    const Index rows = std::min(kSlab, cube.pixels() - start);
    const MatF slab = batch.middleRows(start, rows);
    const MatF latent = model.encode(slab);
    const MatF decoded = model.decode(latent);
    for (Index r = 0; r < rows; ++r) {
      const Index p = start + r;
      const Index i = p % cube.width;
      const Index j = p / cube.width;
      maps.true_map(j, i) = slab.row(r).cast<double>().sum();
      maps.decoded_map(j, i) = decoded.row(r).cast<double>().sum();
      maps.embedded_map(j, i) = latent.row(r).cast<double>().sum();
    }
  }
  return maps;
}

std::vector<RgbImage> masked_rgb(const std::vector<std::vector<std::uint8_t>>& masks,
                                 const RgbImage& rgb) {
  std::vector<RgbImage> out;
  out.reserve(masks.size());
  for (const auto& mask : masks) {
    if (static_cast<Index>(mask.size()) != rgb.width * rgb.height)
      throw ShapeError("masked_rgb: mask size does not match image dimensions");
    RgbImage img = rgb;
    for (std::size_t p = 0; p < mask.size(); ++p)
      if (!mask[p]) {
        img.pixels[3 * p] = 0;
        img.pixels[3 * p + 1] = 0;
        img.pixels[3 * p + 2] = 0;
      }
    out.push_back(std::move(img));
  }
  return out;
}

void export_result(const SegmentationResult& result, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  for (int c = 0; c < result.k; ++c) {
    GrayImage mask;
    mask.width = result.width;
    mask.height = result.height;
    mask.pixels.resize(result.masks[static_cast<std::size_t>(c)].size());
    for (std::size_t p = 0; p < mask.pixels.size(); ++p)
      mask.pixels[p] = result.masks[static_cast<std::size_t>(c)][p] ? 255 : 0;
    write_pgm(mask, (dir / ("mask_" + std::to_string(c) + ".pgm")).string());
  }

  const Index depth = result.cluster_mean_true.cols();
  for (int c = 0; c < result.k; ++c) {
    std::ofstream csv(dir / ("cluster_" + std::to_string(c) + "_spectra.csv"),
                      std::ios::trunc);
    if (!csv) throw IoError("export_result: cannot write spectra CSV");
    csv << "channel,barycenter,mean_reconstructed,mean_true,latent_mean_decoded\n";
    for (Index e = 0; e < depth; ++e) {
      const double channel = result.axis.start + result.axis.step * static_cast<double>(e);
      csv << format_g9(channel) << ','
          << format_g9(result.decoded_barycenters(c, e)) << ','
          << format_g9(result.cluster_mean_reconstructed(c, e)) << ','
          << format_g9(result.cluster_mean_true(c, e)) << ','
          << format_g9(result.decoded_latent_mean(c, e)) << '\n';
    }
  }

  json summary;
  summary["k"] = result.k;
  summary["width"] = result.width;
  summary["height"] = result.height;
  summary["depth"] = depth;
  summary["silhouette"] = result.silhouette;
  summary["member_counts"] = result.member_counts;
  summary["channel_unit"] = result.axis.unit;
  summary["channel_start"] = result.axis.start;
  summary["channel_step"] = result.axis.step;
  std::ofstream js(dir / "summary.json", std::ios::trunc);
  if (!js) throw IoError("export_result: cannot write summary.json");
  js << summary.dump(2) << '\n';
}

}  // namespace sdcn
