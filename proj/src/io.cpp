#include "lidarcmp/io.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

static_assert(std::endian::native == std::endian::little,
              "file codecs assume a little-endian host");

namespace lidarcmp {
namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (!in.good() && !in.eof()) throw IoError("read failed for " + path.string());
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& data) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out.good()) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename to " + path.string() + " failed: " + ec.message());
}

struct PlyProperty {
  std::string name;
  std::string type;
  std::size_t size = 0;
  bool is_list = false;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

std::size_t scalar_size(const std::string& type) {
  if (type == "char" || type == "int8" || type == "uchar" || type == "uint8") return 1;
  if (type == "short" || type == "int16" || type == "ushort" || type == "uint16") return 2;
  if (type == "int" || type == "int32" || type == "uint" || type == "uint32") return 4;
  if (type == "float" || type == "float32") return 4;
  if (type == "double" || type == "float64") return 8;
  return 0;
}

double decode_scalar(const char* bytes, const std::string& type) {
  if (type == "float" || type == "float32") {
    float v;
    std::memcpy(&v, bytes, 4);
    return static_cast<double>(v);
  }
  double v;
  std::memcpy(&v, bytes, 8);
  return v;
}

float to_f32(double v) { return static_cast<float>(narrow_f32(v)); }

void append_f32(std::string& out, double v) {
  const float f = to_f32(v);
  char buf[4];
  std::memcpy(buf, &f, 4);
  out.append(buf, 4);
}

}  // namespace

CloudFormat format_from_name(const std::string& name) {
  if (name == "ply_ascii") return CloudFormat::ply_ascii;
  if (name == "ply_binary" || name == "ply") return CloudFormat::ply_binary;
  if (name == "kitti_bin" || name == "bin") return CloudFormat::kitti_bin;
  throw PreconditionError("unknown cloud format: " + name);
}

std::string format_name(CloudFormat format) {
  switch (format) {
    case CloudFormat::ply_ascii: return "ply_ascii";
    case CloudFormat::ply_binary: return "ply_binary";
    case CloudFormat::kitti_bin: return "kitti_bin";
  }
  return "?";
}

CloudFormat format_for_path(const std::filesystem::path& path, CloudFormat like) {
  const std::string ext = path.extension().string();
  if (ext == ".bin") return CloudFormat::kitti_bin;
  if (ext == ".ply") {
    return like == CloudFormat::ply_ascii ? CloudFormat::ply_ascii : CloudFormat::ply_binary;
  }
  throw PreconditionError("cannot infer cloud format from extension '" + ext + "'");
}

CloudFormat detect_format(const std::filesystem::path& path) {
  if (path.extension() == ".bin") return CloudFormat::kitti_bin;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string head(256, '\0');
  in.read(head.data(), static_cast<std::streamsize>(head.size()));
  head.resize(static_cast<std::size_t>(in.gcount()));
  if (head.rfind("ply", 0) != 0) throw FormatError("not a PLY file: " + path.string(), 0);
  if (head.find("format ascii") != std::string::npos) return CloudFormat::ply_ascii;
  return CloudFormat::ply_binary;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, text);
}

PointCloud load_ply(const std::filesystem::path& path) {
  const std::string data = read_file(path);

  // --- header ---
  std::size_t pos = 0;
  long long line_start = 0;
  auto next_line = [&]() -> std::string {
    line_start = static_cast<long long>(pos);
    if (pos >= data.size()) throw FormatError("unexpected end of header", line_start);
    std::size_t eol = data.find('\n', pos);
    if (eol == std::string::npos) throw FormatError("unterminated header line", line_start);
    std::string line = data.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = eol + 1;
    return line;
  };

  if (next_line() != "ply") throw FormatError("missing 'ply' magic", 0);

  bool binary = false;
  bool have_format = false;
  std::vector<PlyElement> elements;

  for (;;) {
    const std::string line = next_line();
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "comment" || word == "obj_info" || word.empty()) continue;
    if (word == "format") {
      std::string kind, version;
      ls >> kind >> version;
      if (kind == "ascii") {
        binary = false;
      } else if (kind == "binary_little_endian") {
        binary = true;
      } else {
        throw FormatError("unsupported PLY format '" + kind + "'", line_start);
      }
      have_format = true;
    } else if (word == "element") {
      PlyElement el;
      if (!(ls >> el.name >> el.count)) throw FormatError("malformed element line", line_start);
      elements.push_back(std::move(el));
    } else if (word == "property") {
      if (elements.empty()) throw FormatError("property before any element", line_start);
      PlyProperty prop;
      ls >> prop.type;
      if (prop.type == "list") {
        std::string count_type, item_type;
        if (!(ls >> count_type >> item_type >> prop.name)) {
          throw FormatError("malformed list property", line_start);
        }
        prop.is_list = true;
      } else {
        prop.size = scalar_size(prop.type);
        if (prop.size == 0) throw FormatError("unknown property type '" + prop.type + "'", line_start);
        if (!(ls >> prop.name)) throw FormatError("malformed property line", line_start);
      }
      elements.back().properties.push_back(std::move(prop));
    } else if (word == "end_header") {
      break;
    } else {
      throw FormatError("unrecognized header keyword '" + word + "'", line_start);
    }
  }
  if (!have_format) throw FormatError("header missing format line", line_start);

  std::size_t vertex_idx = elements.size();
  for (std::size_t i = 0; i < elements.size(); ++i) {
    if (elements[i].name == "vertex") {
      vertex_idx = i;
      break;
    }
  }
  if (vertex_idx == elements.size()) throw FormatError("no vertex element declared", line_start);
  for (std::size_t i = 0; i < vertex_idx; ++i) {
    if (elements[i].count > 0) {
      throw FormatError("element '" + elements[i].name + "' precedes vertex data", line_start);
    }
  }
  for (std::size_t i = vertex_idx + 1; i < elements.size(); ++i) {
    if (elements[i].count > 0) {
      std::cerr << "load_ply: ignoring element '" << elements[i].name << "' (" << elements[i].count
                << " entries) in " << path.string() << "\n";
    }
  }

  const PlyElement& vertex = elements[vertex_idx];
  int ix = -1, iy = -1, iz = -1, ii = -1;
  std::size_t stride = 0;
  std::vector<std::size_t> offsets;
  for (std::size_t p = 0; p < vertex.properties.size(); ++p) {
    const PlyProperty& prop = vertex.properties[p];
    if (prop.is_list) throw FormatError("list property '" + prop.name + "' in vertex element", line_start);
    offsets.push_back(stride);
    stride += prop.size;
    const bool numeric = prop.type == "float" || prop.type == "float32" || prop.type == "double" ||
                         prop.type == "float64";
    if (prop.name == "x" && numeric) ix = static_cast<int>(p);
    if (prop.name == "y" && numeric) iy = static_cast<int>(p);
    if (prop.name == "z" && numeric) iz = static_cast<int>(p);
    if (prop.name == "intensity" && numeric) ii = static_cast<int>(p);
  }
  if (ix < 0 || iy < 0 || iz < 0) {
    throw FormatError("vertex element lacks float x/y/z properties", line_start);
  }

  PointCloud cloud;
  cloud.points.reserve(vertex.count);
  if (ii >= 0) cloud.intensity.reserve(vertex.count);

  if (binary) {
    const std::size_t need = vertex.count * stride;
    if (data.size() - pos < need) {
      throw FormatError("vertex data truncated: need " + std::to_string(need) + " bytes, have " +
                            std::to_string(data.size() - pos),
                        static_cast<long long>(data.size()));
    }
    const char* base = data.data() + pos;
    for (std::size_t v = 0; v < vertex.count; ++v) {
      const char* rec = base + v * stride;
      Vec3 p{decode_scalar(rec + offsets[static_cast<std::size_t>(ix)], vertex.properties[static_cast<std::size_t>(ix)].type),
             decode_scalar(rec + offsets[static_cast<std::size_t>(iy)], vertex.properties[static_cast<std::size_t>(iy)].type),
             decode_scalar(rec + offsets[static_cast<std::size_t>(iz)], vertex.properties[static_cast<std::size_t>(iz)].type)};
      if (!p.finite()) throw ValidationError("non-finite coordinate at vertex " + std::to_string(v));
      cloud.points.push_back(p);
      if (ii >= 0) {
        cloud.intensity.push_back(decode_scalar(rec + offsets[static_cast<std::size_t>(ii)],
                                                vertex.properties[static_cast<std::size_t>(ii)].type));
      }
    }
  } else {
    std::istringstream body(data.substr(pos));
    std::vector<double> values(vertex.properties.size());
    std::string token;
    for (std::size_t v = 0; v < vertex.count; ++v) {
      for (std::size_t p = 0; p < values.size(); ++p) {
        if (!(body >> token)) {
          throw FormatError("vertex data ends at row " + std::to_string(v) + " of " +
                                std::to_string(vertex.count),
                            static_cast<long long>(data.size()));
        }
        char* end = nullptr;
        values[p] = std::strtod(token.c_str(), &end);  // accepts nan/inf, unlike operator>>
        if (end == token.c_str() || *end != '\0') {
          throw FormatError("bad numeric token '" + token + "' at vertex row " + std::to_string(v),
                            static_cast<long long>(pos));
        }
        // declared float32 columns round to float32 precision, same as the
        // binary encoding
        const std::string& type = vertex.properties[p].type;
        if (type == "float" || type == "float32") values[p] = narrow_f32(values[p]);
      }
      Vec3 pt{values[static_cast<std::size_t>(ix)], values[static_cast<std::size_t>(iy)],
              values[static_cast<std::size_t>(iz)]};
      if (!pt.finite()) throw ValidationError("non-finite coordinate at vertex " + std::to_string(v));
      cloud.points.push_back(pt);
      if (ii >= 0) cloud.intensity.push_back(values[static_cast<std::size_t>(ii)]);
    }
  }
  return cloud;
}

PointCloud load_kitti_bin(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  if (data.size() % 16 != 0) {
    throw FormatError("kitti bin size " + std::to_string(data.size()) +
                      " is not a multiple of 16");
  }
  const std::size_t n = data.size() / 16;
  PointCloud cloud;
  cloud.points.reserve(n);
  cloud.intensity.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    float rec[4];
    std::memcpy(rec, data.data() + i * 16, 16);
    const Vec3 p{rec[0], rec[1], rec[2]};
    if (!p.finite()) throw ValidationError("non-finite coordinate at point " + std::to_string(i));
    cloud.points.push_back(p);
    cloud.intensity.push_back(rec[3]);
  }
  return cloud;
}

PointCloud load_cloud(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".bin") return load_kitti_bin(path);
  if (ext == ".ply") return load_ply(path);
  throw PreconditionError("cannot infer loader for '" + path.string() + "'");
}

void save(const PointCloud& cloud, const std::filesystem::path& path, CloudFormat format) {
  cloud.validate();
  std::string out;
  switch (format) {
    case CloudFormat::kitti_bin: {
      if (!cloud.has_intensity()) {
        throw PreconditionError("kitti_bin requires intensity; refusing to fabricate values");
      }
      out.reserve(cloud.size() * 16);
      for (std::size_t i = 0; i < cloud.size(); ++i) {
        append_f32(out, cloud.points[i].x);
        append_f32(out, cloud.points[i].y);
        append_f32(out, cloud.points[i].z);
        append_f32(out, cloud.intensity[i]);
      }
      break;
    }
    case CloudFormat::ply_ascii:
    case CloudFormat::ply_binary: {
      const bool binary = format == CloudFormat::ply_binary;
      std::ostringstream header;
      header << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n"
             << "element vertex " << cloud.size() << "\n"
             << "property float x\nproperty float y\nproperty float z\n";
      if (cloud.has_intensity()) header << "property float intensity\n";
      header << "end_header\n";
      out = header.str();
      if (binary) {
        out.reserve(out.size() + cloud.size() * (cloud.has_intensity() ? 16 : 12));
        for (std::size_t i = 0; i < cloud.size(); ++i) {
          append_f32(out, cloud.points[i].x);
          append_f32(out, cloud.points[i].y);
          append_f32(out, cloud.points[i].z);
          if (cloud.has_intensity()) append_f32(out, cloud.intensity[i]);
        }
      } else {
        char buf[128];
        for (std::size_t i = 0; i < cloud.size(); ++i) {
          // %.9g round-trips float32 exactly.
          if (cloud.has_intensity()) {
            std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g %.9g\n", to_f32(cloud.points[i].x),
                          to_f32(cloud.points[i].y), to_f32(cloud.points[i].z),
                          to_f32(cloud.intensity[i]));
          } else {
            std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g\n", to_f32(cloud.points[i].x),
                          to_f32(cloud.points[i].y), to_f32(cloud.points[i].z));
          }
          out += buf;
        }
      }
      break;
    }
  }
  write_file_atomic(path, out);
}

}  // namespace lidarcmp
