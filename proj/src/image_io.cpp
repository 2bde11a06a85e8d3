#include "gazekit/image_io.hpp"

#include <array>
#include <cctype>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace gazekit {

namespace {

// Skips whitespace and '#' comments between PNM header tokens.
int next_pnm_int(std::istream& in, const char* what) {
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  if (c == EOF || !std::isdigit(c)) throw FormatError(std::string("expected ") + what + " in PNM header");
  long v = 0;
  while (c != EOF && std::isdigit(c)) {
    v = v * 10 + (c - '0');
    if (v > 1'000'000'000L) throw FormatError(std::string(what) + " out of range");
    c = in.get();
  }
  if (c != EOF) in.unget();
  return static_cast<int>(v);
}

void put_u16_le(std::ostream& out, std::uint16_t v) {
  char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  out.write(b, 2);
}

void put_u32_le(std::ostream& out, std::uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

std::uint16_t get_u16_le(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::int32_t get_i32_le(const unsigned char* p) {
  return static_cast<std::int32_t>(get_u32_le(p));
}

}  // namespace

Image read_ppm(std::istream& in) {
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '6') throw FormatError("not a P6 PPM stream");
  int w = next_pnm_int(in, "width");
  int h = next_pnm_int(in, "height");
  int maxval = next_pnm_int(in, "maxval");
  if (maxval != 255) throw FormatError("only maxval 255 PPM is supported");
  in.get();  // single whitespace byte before raster
  if (w <= 0 || h <= 0) throw FormatError("non-positive PPM dimensions");
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(w) * h * 3);
  in.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(pixels.size())) throw FormatError("truncated PPM raster");
  return Image::from_pixels(w, h, std::move(pixels));
}

void write_ppm(std::ostream& out, const Image& img) {
  out << "P6\n" << img.width() << ' ' << img.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data().data()),
            static_cast<std::streamsize>(img.data().size()));
}

Image read_bmp(std::istream& in) {
  unsigned char file_hdr[14];
  in.read(reinterpret_cast<char*>(file_hdr), 14);
  if (!in || file_hdr[0] != 'B' || file_hdr[1] != 'M') throw FormatError("not a BMP stream");
  std::uint32_t data_offset = get_u32_le(file_hdr + 10);

  unsigned char info_hdr[40];
  in.read(reinterpret_cast<char*>(info_hdr), 40);
  if (!in) throw FormatError("truncated BMP info header");
  std::uint32_t header_size = get_u32_le(info_hdr);
  if (header_size < 40) throw FormatError("unsupported BMP header size");
  std::int32_t w = get_i32_le(info_hdr + 4);
  std::int32_t h = get_i32_le(info_hdr + 8);
  std::uint16_t planes = get_u16_le(info_hdr + 12);
  std::uint16_t bpp = get_u16_le(info_hdr + 14);
  std::uint32_t compression = get_u32_le(info_hdr + 16);
  if (planes != 1 || bpp != 24 || compression != 0)
    throw FormatError("only uncompressed 24-bit BMP is supported");
  bool bottom_up = h > 0;
  std::int32_t abs_h = bottom_up ? h : -h;
  if (w <= 0 || abs_h <= 0) throw FormatError("non-positive BMP dimensions");

  // Skip any gap between the info header and the raster.
  std::uint32_t consumed = 14 + 40;
  if (data_offset < consumed) throw FormatError("bad BMP data offset");
  in.ignore(data_offset - consumed);

  std::size_t row_bytes = static_cast<std::size_t>(w) * 3;
  std::size_t padded = (row_bytes + 3) & ~std::size_t{3};
  std::vector<std::uint8_t> row(padded);
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(w) * abs_h * 3);
  for (std::int32_t i = 0; i < abs_h; ++i) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(padded));
    if (in.gcount() != static_cast<std::streamsize>(padded)) throw FormatError("truncated BMP raster");
    std::int32_t y = bottom_up ? abs_h - 1 - i : i;
    std::uint8_t* dst = pixels.data() + static_cast<std::size_t>(y) * row_bytes;
    for (std::int32_t x = 0; x < w; ++x) {
      dst[x * 3 + 0] = row[x * 3 + 2];
      dst[x * 3 + 1] = row[x * 3 + 1];
      dst[x * 3 + 2] = row[x * 3 + 0];
    }
  }
  return Image::from_pixels(w, abs_h, std::move(pixels));
}

void write_bmp(std::ostream& out, const Image& img) {
  std::size_t row_bytes = static_cast<std::size_t>(img.width()) * 3;
  std::size_t padded = (row_bytes + 3) & ~std::size_t{3};
  std::uint32_t raster = static_cast<std::uint32_t>(padded * img.height());

  out.write("BM", 2);
  put_u32_le(out, 14 + 40 + raster);
  put_u16_le(out, 0);
  put_u16_le(out, 0);
  put_u32_le(out, 14 + 40);

  put_u32_le(out, 40);
  put_u32_le(out, static_cast<std::uint32_t>(img.width()));
  put_u32_le(out, static_cast<std::uint32_t>(img.height()));
  put_u16_le(out, 1);
  put_u16_le(out, 24);
  put_u32_le(out, 0);
  put_u32_le(out, raster);
  put_u32_le(out, 2835);
  put_u32_le(out, 2835);
  put_u32_le(out, 0);
  put_u32_le(out, 0);

  std::vector<std::uint8_t> row(padded, 0);
  for (int y = img.height() - 1; y >= 0; --y) {
    const std::uint8_t* src = img.data().data() + static_cast<std::size_t>(y) * row_bytes;
    for (int x = 0; x < img.width(); ++x) {
      row[x * 3 + 0] = src[x * 3 + 2];
      row[x * 3 + 1] = src[x * 3 + 1];
      row[x * 3 + 2] = src[x * 3 + 0];
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(padded));
  }
}

Image load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image file: " + path.string());
  auto ext = path.extension().string();
  if (ext == ".ppm") return read_ppm(in);
  if (ext == ".bmp") return read_bmp(in);
  throw FormatError("unsupported image extension: " + ext);
}

void save_image(const std::filesystem::path& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create image file: " + path.string());
  auto ext = path.extension().string();
  if (ext == ".ppm") {
    write_ppm(out, img);
  } else if (ext == ".bmp") {
    write_bmp(out, img);
  } else {
    throw FormatError("unsupported image extension: " + ext);
  }
  if (!out) throw IoError("failed writing image file: " + path.string());
}

}  // namespace gazekit
