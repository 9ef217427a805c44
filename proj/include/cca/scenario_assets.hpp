#pragma once

#include <optional>
#include <span>
#include <string_view>

namespace cca {

/// One file baked into the binary: shipped scenarios and their routes.
struct EmbeddedAsset {
  std::string_view name;  ///< e.g. "eebl.toml" or "routes/straight_lane.txt"
  std::string_view content;
};

std::span<const EmbeddedAsset> embedded_assets();
std::optional<std::string_view> embedded_asset(std::string_view name);

}  // namespace cca
