#pragma once

#include "hairrec/camera.hpp"
#include "hairrec/core.hpp"
#include "hairrec/mesh.hpp"
#include "hairrec/raster.hpp"
#include "hairrec/strand.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace hairrec {

// Shortest round-trip decimal form of a double ("1e-05" style exponents as
// produced by to_chars). All writers below use it, so emit -> load -> emit is
// byte-identical.
std::string format_double(double v);

// Binary 8-bit PGM (P5). Writer emits "P5\n<w> <h>\n255\n" + rows.
Raster<uint8_t> load_pgm(const std::filesystem::path& path);
void save_pgm(const std::filesystem::path& path, const Raster<uint8_t>& img);

// Binary 8-bit PPM (P6), interleaved RGB.
ColorRaster load_ppm(const std::filesystem::path& path);
void save_ppm(const std::filesystem::path& path, const ColorRaster& img);

// Depth map: magic "DPTH", u32 width, height, reserved (0), then row-major
// float32, all little-endian. 0 means no measurement.
FloatRaster load_depth(const std::filesystem::path& path);
void save_depth(const std::filesystem::path& path, const FloatRaster& depth);

// cameras.txt: one line per frame,
//   frame_id fx fy cx cy r11 r12 r13 r21 r22 r23 r31 r32 r33 tx ty tz
// Blank lines and lines starting with '#' are skipped on load.
struct NamedCamera {
  int frame_id = 0;
  Camera camera;
};
std::vector<NamedCamera> load_cameras(const std::filesystem::path& path);
void save_cameras(const std::filesystem::path& path, const std::vector<NamedCamera>& cams);

// Wavefront OBJ subset: v / f lines plus per-vertex flag channels stored as
//   # flag <name> <0-based vertex indices...>
// comment lines (written after vertices, before faces).
TriangleMesh load_obj(const std::filesystem::path& path);
void save_obj(const std::filesystem::path& path, const TriangleMesh& mesh);

// Strand sets: blocks of
//   strand <n>
//   x y z [r g b]   (n lines)
// Colors are all-or-nothing per strand.
StrandSet load_strands(const std::filesystem::path& path);
void save_strands(const std::filesystem::path& path, const StrandSet& set);

// Dense vector field dump: magic "ORNT", u32 nx, ny, nz, then nx*ny*nz float32
// triples in x-fastest order, little-endian.
struct FieldDump {
  int nx = 0, ny = 0, nz = 0;
  std::vector<float> values;  // 3 * nx * ny * nz
};
FieldDump load_field(const std::filesystem::path& path);
void save_field(const std::filesystem::path& path, const FieldDump& field);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace hairrec
