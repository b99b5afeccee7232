#include "hairrec/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace hairrec {

namespace {

[[noreturn]] void io_fail(const std::filesystem::path& path, const std::string& what) {
  throw Error(ErrorKind::Io, path.string() + ": " + what);
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) io_fail(path, "cannot open for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) io_fail(path, "cannot open for writing");
  return out;
}

// Skips PNM whitespace and '#' comments, then reads one unsigned integer.
int read_pnm_int(std::istream& in, const std::filesystem::path& path) {
  int c = in.get();
  while (c != EOF && (std::isspace(c) || c == '#')) {
    if (c == '#')
      while (c != EOF && c != '\n') c = in.get();
    c = in.get();
  }
  if (c == EOF || !std::isdigit(c)) io_fail(path, "malformed PNM header");
  long v = 0;
  while (c != EOF && std::isdigit(c)) {
    v = v * 10 + (c - '0');
    if (v > 1 << 20) io_fail(path, "PNM header value out of range");
    c = in.get();
  }
  return static_cast<int>(v);
}

uint32_t read_u32le(std::istream& in) {
  uint8_t b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void write_u32le(std::ostream& out, uint32_t v) {
  const uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                        static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

double parse_double(std::string_view tok, const std::filesystem::path& path) {
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    io_fail(path, "bad number '" + std::string(tok) + "'");
  return v;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Raster<uint8_t> load_pgm(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  char magic[2];
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5') io_fail(path, "not a P5 PGM");
  const int w = read_pnm_int(in, path);
  const int h = read_pnm_int(in, path);
  const int maxval = read_pnm_int(in, path);
  if (maxval != 255) io_fail(path, "only maxval 255 supported");
  Raster<uint8_t> img(w, h);
  in.read(reinterpret_cast<char*>(img.data().data()), static_cast<std::streamsize>(w) * h);
  if (!in) io_fail(path, "truncated pixel data");
  return img;
}

void save_pgm(const std::filesystem::path& path, const Raster<uint8_t>& img) {
  auto out = open_out(path, std::ios::binary);
  out << "P5\n" << img.width() << " " << img.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data().data()),
            static_cast<std::streamsize>(img.width()) * img.height());
  if (!out) io_fail(path, "write failed");
}

ColorRaster load_ppm(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  char magic[2];
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '6') io_fail(path, "not a P6 PPM");
  const int w = read_pnm_int(in, path);
  const int h = read_pnm_int(in, path);
  const int maxval = read_pnm_int(in, path);
  if (maxval != 255) io_fail(path, "only maxval 255 supported");
  std::vector<uint8_t> raw(static_cast<size_t>(w) * h * 3);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!in) io_fail(path, "truncated pixel data");
  ColorRaster img(w, h);
  for (size_t i = 0; i < static_cast<size_t>(w) * h; ++i) {
    img.data()[i] = {raw[3 * i] / 255.0f, raw[3 * i + 1] / 255.0f, raw[3 * i + 2] / 255.0f};
  }
  return img;
}

void save_ppm(const std::filesystem::path& path, const ColorRaster& img) {
  auto out = open_out(path, std::ios::binary);
  out << "P6\n" << img.width() << " " << img.height() << "\n255\n";
  std::vector<uint8_t> raw(static_cast<size_t>(img.width()) * img.height() * 3);
  auto quantize = [](float v) {
    const float c = std::clamp(v, 0.0f, 1.0f);
    return static_cast<uint8_t>(std::lround(c * 255.0f));
  };
  for (size_t i = 0; i < static_cast<size_t>(img.width()) * img.height(); ++i) {
    raw[3 * i] = quantize(img.data()[i].r);
    raw[3 * i + 1] = quantize(img.data()[i].g);
    raw[3 * i + 2] = quantize(img.data()[i].b);
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) io_fail(path, "write failed");
}

FloatRaster load_depth(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "DPTH", 4) != 0) io_fail(path, "bad depth magic");
  const uint32_t w = read_u32le(in);
  const uint32_t h = read_u32le(in);
  const uint32_t reserved = read_u32le(in);
  if (!in || reserved != 0) io_fail(path, "bad depth header");
  if (w == 0 || h == 0 || w > (1u << 20) || h > (1u << 20)) io_fail(path, "bad depth size");
  FloatRaster img(static_cast<int>(w), static_cast<int>(h));
  static_assert(sizeof(float) == 4);
  in.read(reinterpret_cast<char*>(img.data().data()), static_cast<std::streamsize>(w) * h * 4);
  if (!in) io_fail(path, "truncated depth data");
  return img;
}

void save_depth(const std::filesystem::path& path, const FloatRaster& depth) {
  auto out = open_out(path, std::ios::binary);
  out.write("DPTH", 4);
  write_u32le(out, static_cast<uint32_t>(depth.width()));
  write_u32le(out, static_cast<uint32_t>(depth.height()));
  write_u32le(out, 0);
  out.write(reinterpret_cast<const char*>(depth.data().data()),
            static_cast<std::streamsize>(depth.width()) * depth.height() * 4);
  if (!out) io_fail(path, "write failed");
}

std::vector<NamedCamera> load_cameras(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::in);
  std::vector<NamedCamera> cams;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto toks = split_ws(line);
    if (toks.empty() || toks[0][0] == '#') continue;
    if (toks.size() != 17)
      io_fail(path, "line " + std::to_string(lineno) + ": expected 17 fields, got " +
                        std::to_string(toks.size()));
    NamedCamera nc;
    int id = 0;
    const auto idres = std::from_chars(toks[0].data(), toks[0].data() + toks[0].size(), id);
    if (idres.ec != std::errc{} || idres.ptr != toks[0].data() + toks[0].size())
      io_fail(path, "line " + std::to_string(lineno) + ": bad frame id");
    nc.frame_id = id;
    nc.camera.fx = parse_double(toks[1], path);
    nc.camera.fy = parse_double(toks[2], path);
    nc.camera.cx = parse_double(toks[3], path);
    nc.camera.cy = parse_double(toks[4], path);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) nc.camera.R(r, c) = parse_double(toks[5 + 3 * r + c], path);
    for (int k = 0; k < 3; ++k) nc.camera.t(k) = parse_double(toks[14 + k], path);
    cams.push_back(std::move(nc));
  }
  if (cams.empty()) io_fail(path, "no camera lines");
  return cams;
}

void save_cameras(const std::filesystem::path& path, const std::vector<NamedCamera>& cams) {
  auto out = open_out(path, std::ios::out | std::ios::binary);
  for (const auto& nc : cams) {
    out << nc.frame_id << " " << format_double(nc.camera.fx) << " " << format_double(nc.camera.fy)
        << " " << format_double(nc.camera.cx) << " " << format_double(nc.camera.cy);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) out << " " << format_double(nc.camera.R(r, c));
    for (int k = 0; k < 3; ++k) out << " " << format_double(nc.camera.t(k));
    out << "\n";
  }
  if (!out) io_fail(path, "write failed");
}

TriangleMesh load_obj(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::in);
  TriangleMesh mesh;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks[0] == "v") {
      if (toks.size() < 4) io_fail(path, "line " + std::to_string(lineno) + ": short vertex");
      mesh.vertices.emplace_back(parse_double(toks[1], path), parse_double(toks[2], path),
                                 parse_double(toks[3], path));
    } else if (toks[0] == "f") {
      if (toks.size() != 4)
        io_fail(path, "line " + std::to_string(lineno) + ": only triangles supported");
      std::array<int, 3> f{};
      for (int k = 0; k < 3; ++k) {
        std::string_view tok = toks[k + 1];
        if (const auto slash = tok.find('/'); slash != std::string_view::npos)
          tok = tok.substr(0, slash);
        const long idx = static_cast<long>(parse_double(tok, path));
        if (idx < 1) io_fail(path, "line " + std::to_string(lineno) + ": bad face index");
        f[k] = static_cast<int>(idx - 1);
      }
      mesh.faces.push_back(f);
    } else if (toks[0] == "#" && toks.size() >= 3 && toks[1] == "flag") {
      auto& flags = mesh.vertex_flags[std::string(toks[2])];
      for (size_t k = 3; k < toks.size(); ++k) {
        const long idx = static_cast<long>(parse_double(toks[k], path));
        if (idx < 0) io_fail(path, "line " + std::to_string(lineno) + ": bad flag index");
        if (flags.size() <= static_cast<size_t>(idx)) flags.resize(idx + 1, 0);
        flags[static_cast<size_t>(idx)] = 1;
      }
    }
  }
  for (auto& [name, flags] : mesh.vertex_flags) flags.resize(mesh.vertices.size(), 0);
  validate_mesh(mesh, path.string());
  return mesh;
}

void save_obj(const std::filesystem::path& path, const TriangleMesh& mesh) {
  auto out = open_out(path, std::ios::out | std::ios::binary);
  for (const auto& v : mesh.vertices)
    out << "v " << format_double(v.x()) << " " << format_double(v.y()) << " "
        << format_double(v.z()) << "\n";
  for (const auto& [name, flags] : mesh.vertex_flags) {
    out << "# flag " << name;
    for (size_t i = 0; i < flags.size(); ++i)
      if (flags[i]) out << " " << i;
    out << "\n";
  }
  for (const auto& f : mesh.faces)
    out << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";
  if (!out) io_fail(path, "write failed");
}

StrandSet load_strands(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::in);
  StrandSet set;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto toks = split_ws(line);
    if (toks.empty() || toks[0][0] == '#') continue;
    if (toks[0] != "strand" || toks.size() != 2)
      io_fail(path, "line " + std::to_string(lineno) + ": expected 'strand <n>'");
    const long n = static_cast<long>(parse_double(toks[1], path));
    if (n < 2) io_fail(path, "line " + std::to_string(lineno) + ": strand needs >= 2 vertices");
    Strand s;
    s.vertices.reserve(n);
    for (long k = 0; k < n; ++k) {
      if (!std::getline(in, line)) io_fail(path, "truncated strand block");
      ++lineno;
      const auto vt = split_ws(line);
      if (vt.size() != 3 && vt.size() != 6)
        io_fail(path, "line " + std::to_string(lineno) + ": expected 'x y z [r g b]'");
      s.vertices.emplace_back(parse_double(vt[0], path), parse_double(vt[1], path),
                              parse_double(vt[2], path));
      if (vt.size() == 6) {
        s.colors.emplace_back(parse_double(vt[3], path), parse_double(vt[4], path),
                              parse_double(vt[5], path));
      }
    }
    if (!s.colors.empty() && s.colors.size() != s.vertices.size())
      io_fail(path, "strand mixes colored and uncolored vertices");
    s.recompute_tangents();
    set.strands.push_back(std::move(s));
  }
  return set;
}

void save_strands(const std::filesystem::path& path, const StrandSet& set) {
  auto out = open_out(path, std::ios::out | std::ios::binary);
  for (const auto& s : set.strands) {
    out << "strand " << s.vertices.size() << "\n";
    for (size_t i = 0; i < s.vertices.size(); ++i) {
      const auto& v = s.vertices[i];
      out << format_double(v.x()) << " " << format_double(v.y()) << " "
          << format_double(v.z());
      if (s.has_colors()) {
        const auto& c = s.colors[i];
        out << " " << format_double(c.x()) << " " << format_double(c.y()) << " "
            << format_double(c.z());
      }
      out << "\n";
    }
  }
  if (!out) io_fail(path, "write failed");
}

FieldDump load_field(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "ORNT", 4) != 0) io_fail(path, "bad field magic");
  FieldDump f;
  f.nx = static_cast<int>(read_u32le(in));
  f.ny = static_cast<int>(read_u32le(in));
  f.nz = static_cast<int>(read_u32le(in));
  if (!in || f.nx <= 0 || f.ny <= 0 || f.nz <= 0 || static_cast<long>(f.nx) * f.ny * f.nz > (1L << 28))
    io_fail(path, "bad field size");
  f.values.resize(static_cast<size_t>(f.nx) * f.ny * f.nz * 3);
  in.read(reinterpret_cast<char*>(f.values.data()),
          static_cast<std::streamsize>(f.values.size()) * 4);
  if (!in) io_fail(path, "truncated field data");
  return f;
}

void save_field(const std::filesystem::path& path, const FieldDump& field) {
  if (field.values.size() != static_cast<size_t>(field.nx) * field.ny * field.nz * 3)
    throw Error(ErrorKind::Argument, "save_field: value count mismatch");
  auto out = open_out(path, std::ios::binary);
  out.write("ORNT", 4);
  write_u32le(out, static_cast<uint32_t>(field.nx));
  write_u32le(out, static_cast<uint32_t>(field.ny));
  write_u32le(out, static_cast<uint32_t>(field.nz));
  out.write(reinterpret_cast<const char*>(field.values.data()),
            static_cast<std::streamsize>(field.values.size()) * 4);
  if (!out) io_fail(path, "write failed");
}

std::string read_text_file(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  auto out = open_out(path, std::ios::binary);
  out << content;
  if (!out) io_fail(path, "write failed");
}

}  // namespace hairrec
