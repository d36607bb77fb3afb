#include "sdcn/image.hpp"

#include <fstream>

#include "sdcn/errors.hpp"

namespace sdcn {

namespace {

// Reads one whitespace/comment-separated token of a PNM header.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

struct PnmHeader {
  Index width = 0;
  Index height = 0;
};

PnmHeader read_header(std::istream& in, const char* magic, const std::string& path) {
  if (next_token(in) != magic)
    throw FormatError(path + ": not a binary " + magic + " file");
  PnmHeader h;
  try {
    h.width = std::stoll(next_token(in));
    h.height = std::stoll(next_token(in));
    const long long maxval = std::stoll(next_token(in));
    if (maxval != 255)
      throw FormatError(path + ": only maxval 255 is supported");
  } catch (const std::logic_error&) {
    throw FormatError(path + ": malformed header");
  }
  if (h.width < 1 || h.height < 1)
    throw DimensionError(path + ": non-positive image dimensions");
  return h;
}

}  // namespace

GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  const PnmHeader h = read_header(in, "P5", path);
  GrayImage img;
  img.width = h.width;
  img.height = h.height;
  img.pixels.resize(static_cast<std::size_t>(h.width * h.height));
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
    throw TruncatedError(path + ": pixel data shorter than header declares");
  return img;
}

void write_pgm(const GrayImage& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw IoError("write failed for '" + path + "'");
}

RgbImage read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  const PnmHeader h = read_header(in, "P6", path);
  RgbImage img;
  img.width = h.width;
  img.height = h.height;
  img.pixels.resize(static_cast<std::size_t>(3 * h.width * h.height));
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
    throw TruncatedError(path + ": pixel data shorter than header declares");
  return img;
}

void write_ppm(const RgbImage& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace sdcn
