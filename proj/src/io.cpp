#include "brt/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "brt/errors.hpp"

namespace brt {
namespace {

class Writer {
 public:
  void bytes(std::string_view s) { out_.append(s); }
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
  std::string take() { return std::move(out_); }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view s) : s_(s) {}
  std::string_view bytes(std::size_t n) {
    need(n);
    auto r = s_.substr(pos_, n);
    pos_ += n;
    return r;
  }
  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  double f64() { return std::bit_cast<double>(le(8)); }
  double finite() {
    const double v = f64();
    if (!std::isfinite(v)) throw FormatError("non-finite value in file");
    return v;
  }
  std::size_t remaining() const { return s_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (s_.size() - pos_ < n) throw FormatError("file is truncated");
  }
  std::uint64_t le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::string_view s_;
  std::size_t pos_ = 0;
};

void put_grid(Writer& w, const ImageGrid& g) {
  w.u32(static_cast<std::uint32_t>(g.L2));
  w.u32(static_cast<std::uint32_t>(g.L1));
  w.f64(g.delta2);
  w.f64(g.delta1);
}

ImageGrid get_grid(Reader& r) {
  const std::uint32_t L2 = r.u32(), L1 = r.u32();
  const double d2 = r.f64(), d1 = r.f64();
  try {
    return ImageGrid(L1, L2, d1, d2);
  } catch (const Error& e) {
    throw FormatError(std::string("invalid grid in header: ") + e.what());
  }
}

}  // namespace

std::string encode_image(const Image& img) {
  Writer w;
  w.bytes("BRTI");
  w.u16(kImageFileVersion);
  w.u8(static_cast<std::uint8_t>(img.kind));
  put_grid(w, img.grid);
  for (double v : img.values) w.f64(v);
  return w.take();
}

Image decode_image(std::string_view bytes) {
  Reader r(bytes);
  if (r.bytes(4) != "BRTI") throw FormatError("not an image file (bad magic)");
  const std::uint16_t version = r.u16();
  if (version != kImageFileVersion) throw FormatError("unsupported image file version " + std::to_string(version));
  const std::uint8_t kind = r.u8();
  if (kind > 2) throw FormatError("unknown image kind " + std::to_string(kind));
  const ImageGrid g = get_grid(r);
  if (r.remaining() != g.size() * 8)
    throw FormatError("payload length does not match the header");
  std::vector<double> v(g.size());
  for (double& x : v) x = r.finite();
  return Image(g, static_cast<ImageKind>(kind), std::move(v));
}

std::string encode_measurements(const MeasurementSet& ms) {
  ms.validate();
  Writer w;
  w.bytes("BRTM");
  w.u16(kMeasurementFileVersion);
  put_grid(w, ms.grid);
  w.u32(static_cast<std::uint32_t>(ms.num_pairs()));
  for (double v : ms.source.I0) w.f64(v);
  for (std::size_t i = 0; i < ms.num_pairs(); ++i) {
    const auto& p = ms.pairs[i];
    w.u8(p.is_transmission ? 1 : 0);
    w.f64(p.theta_s.ux);
    w.f64(p.theta_s.uy);
    w.f64(p.theta_d.ux);
    w.f64(p.theta_d.uy);
    for (auto a : ms.active[i]) w.u8(a ? 1 : 0);
    for (double v : ms.source.beta[i]) w.f64(v);
    for (double v : ms.counts[i]) w.f64(v);
  }
  return w.take();
}

MeasurementSet decode_measurements(std::string_view bytes) {
  Reader r(bytes);
  if (r.bytes(4) != "BRTM") throw FormatError("not a measurement file (bad magic)");
  const std::uint16_t version = r.u16();
  if (version != kMeasurementFileVersion)
    throw FormatError("unsupported measurement file version " + std::to_string(version));
  MeasurementSet ms;
  ms.grid = get_grid(r);
  const std::size_t n = ms.grid.size();
  const std::uint32_t P = r.u32();
  // Each pair block needs at least 33 + 17·n bytes; reject absurd counts early.
  if (static_cast<std::uint64_t>(P) * (33 + 17 * static_cast<std::uint64_t>(n)) > r.remaining())
    throw FormatError("file is truncated");
  ms.source.I0.resize(n);
  for (double& v : ms.source.I0) v = r.finite();
  for (std::uint32_t i = 0; i < P; ++i) {
    SourceDetectorPair p;
    const std::uint8_t tx = r.u8();
    if (tx > 1) throw FormatError("bad transmission flag");
    p.is_transmission = tx == 1;
    p.theta_s = {r.finite(), r.finite()};
    p.theta_d = {r.finite(), r.finite()};
    for (const Direction& d : {p.theta_s, p.theta_d})
      if (std::abs(d.ux * d.ux + d.uy * d.uy - 1.0) > 1e-12) throw FormatError("direction is not a unit vector");
    ms.pairs.push_back(p);
    std::vector<std::uint8_t> a(n);
    for (auto& x : a) {
      x = r.u8();
      if (x > 1) throw FormatError("bad active-set flag");
    }
    ms.active.push_back(std::move(a));
    std::vector<double> beta(n), counts(n);
    for (double& v : beta) v = r.finite();
    for (double& v : counts) v = r.finite();
    ms.source.beta.push_back(std::move(beta));
    ms.counts.push_back(std::move(counts));
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after the last pair");
  try {
    ms.validate();
  } catch (const Error& e) {
    throw FormatError(std::string("invalid measurement data: ") + e.what());
  }
  return ms;
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed: " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_image(const std::filesystem::path& path, const Image& img) { write_file(path, encode_image(img)); }
Image read_image(const std::filesystem::path& path) { return decode_image(read_file(path)); }

void write_measurements(const std::filesystem::path& path, const MeasurementSet& ms) {
  write_file(path, encode_measurements(ms));
}
MeasurementSet read_measurements(const std::filesystem::path& path) {
  return decode_measurements(read_file(path));
}

void write_pgm(const std::filesystem::path& path, const Image& img, double lo, double hi) {
  std::string out = "P5\n" + std::to_string(img.grid.L1) + " " + std::to_string(img.grid.L2) + "\n255\n";
  const double span = hi > lo ? hi - lo : 1.0;
  for (std::size_t r = img.grid.L2; r-- > 0;)
    for (std::size_t c = 0; c < img.grid.L1; ++c) {
      const double t = std::clamp((img.at(r, c) - lo) / span, 0.0, 1.0);
      out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(t * 255.0))));
    }
  write_file(path, out);
}

}  // namespace brt
