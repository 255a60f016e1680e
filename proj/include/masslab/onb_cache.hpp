// Plain-text persistence of orthonormal bases.
//
//     ONBCACHE v1 k=<int> eps=<float> residual=<float>
//     <row> <col> <re> <im>        (d_p^2 lines, 17 significant digits)
#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "masslab/bergman.hpp"

namespace masslab {

/// cache/onb_k<k>_<spechash>.txt relative to the output directory.
std::filesystem::path onb_cache_path(const std::filesystem::path& directory, const MetricSequenceSpec& spec, int p);

std::string serialize_onb(const OrthonormalBasis& basis);

/// Parses a cache file body. Returns nullopt on any format error or when the
/// stored degree or epsilon does not match the expectation.
std::optional<OrthonormalBasis> parse_onb(const std::string& text, int p, int degree, double epsilon);

/// Writes the basis; throws std::runtime_error naming the path on failure.
void save_onb(const std::filesystem::path& path, const OrthonormalBasis& basis);
std::optional<OrthonormalBasis> load_onb(const std::filesystem::path& path, int p, int degree, double epsilon);

}  // namespace masslab
