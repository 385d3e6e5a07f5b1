#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "flatchain/field.hpp"
#include "flatchain/singular.hpp"

namespace flatchain {

struct FieldFile {
    SampledField field;
    /// Target name from the header, if any.
    std::optional<std::string> target;
};

/// JSON header {d, m, origin, spacing, counts, target?, endianness?} with the
/// samples either inline ("values": [...]) or in a raw little-endian float64
/// sidecar ("blob": path relative to the header). Vertex order is x fastest.
FieldFile parse_field(const std::filesystem::path& path);
FieldFile field_from_json(const nlohmann::json& header, const std::filesystem::path& base_dir = {});

/// Writes the header; with `blob` the samples go to that sidecar file
/// (bit-exact), otherwise inline.
void write_field(const std::filesystem::path& path, const SampledField& u, const std::optional<std::string>& target,
                 const std::optional<std::filesystem::path>& blob = std::nullopt);
nlohmann::json field_header(const SampledField& u, const std::optional<std::string>& target);

/// Chain together with its complex: {"complex": ..., "chain": ...}.
nlohmann::json chain_document(const Chain& c);
Chain chain_from_document(const nlohmann::json& j);

/// Defect export of S_y(u).chain: json (chain document plus provenance),
/// csv (one row per cell: coordinates then coefficient), svg (2D overlay on
/// the grid outline) or obj (polylines). Chains of dimension > 1 are
/// rejected.
std::string export_defects(const SingularChain& s, const std::string& format);

}  // namespace flatchain
