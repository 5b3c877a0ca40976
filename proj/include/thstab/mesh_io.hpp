#pragma once

#include <string>

#include <json.hpp>

#include "thstab/mesh.hpp"

namespace thstab {

// Mesh file format:
//   { "dim": d, "vertices": [[x, y(, z)], ...], "elements": [[v1 .. v_{2^d}], ...],
//     "kind": "bilinear2d" | "affine3d" | "trilinear3d", "allow_nonaffine": bool }
// Boundary facets are derived on load, never stored.

const char* to_string(MapKind kind);
MapKind map_kind_from_string(const std::string& name);

nlohmann::json mesh_to_json(const Mesh& mesh);
Mesh mesh_from_json(const nlohmann::json& j);

Mesh read_mesh(const std::string& path);
void write_mesh(const Mesh& mesh, const std::string& path);

}  // namespace thstab
