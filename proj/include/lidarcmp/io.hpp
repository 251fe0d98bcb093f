#pragma once

#include <filesystem>
#include <string>

#include "lidarcmp/types.hpp"

namespace lidarcmp {

enum class CloudFormat { ply_ascii, ply_binary, kitti_bin };

CloudFormat format_from_name(const std::string& name);
std::string format_name(CloudFormat format);

/// Reads ascii or binary_little_endian PLY. Vertex properties x, y, z are
/// required (float or double); a float `intensity` property is picked up when
/// present; other scalar vertex properties are skipped. Elements after the
/// vertex list (faces etc.) are ignored with a warning on stderr.
/// Throws FormatError (with byte offset) on malformed headers or truncated
/// data, ValidationError on non-finite coordinates.
PointCloud load_ply(const std::filesystem::path& path);

/// KITTI velodyne .bin: headerless little-endian float32 quadruples
/// (x, y, z, intensity). File size must be a multiple of 16 bytes.
PointCloud load_kitti_bin(const std::filesystem::path& path);

/// Dispatches on extension: .ply / .bin. An explicit format wins.
PointCloud load_cloud(const std::filesystem::path& path);

/// Coordinates are emitted as float32 in every format, so a save->load
/// round trip is bit-exact once values are float32-representable.
/// kitti_bin refuses clouds without intensity.
void save(const PointCloud& cloud, const std::filesystem::path& path, CloudFormat format);

/// Guess a format for `path` from its extension, preferring `like` for .ply.
CloudFormat format_for_path(const std::filesystem::path& path,
                            CloudFormat like = CloudFormat::ply_binary);

/// Reads the file header to tell ply_ascii / ply_binary / kitti_bin apart.
CloudFormat detect_format(const std::filesystem::path& path);

/// Write-then-rename; the destination is never observed half-written.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace lidarcmp
