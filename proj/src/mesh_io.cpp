#include "thstab/mesh_io.hpp"

#include <fstream>

#include "thstab/error.hpp"

namespace thstab {

const char* to_string(MapKind kind) {
  switch (kind) {
    case MapKind::Bilinear2D: return "bilinear2d";
    case MapKind::Affine3D: return "affine3d";
    case MapKind::Trilinear3D: return "trilinear3d";
  }
  return "unknown";
}

MapKind map_kind_from_string(const std::string& name) {
  if (name == "bilinear2d") return MapKind::Bilinear2D;
  if (name == "affine3d") return MapKind::Affine3D;
  if (name == "trilinear3d") return MapKind::Trilinear3D;
  throw Error(ErrorKind::Io, "unknown element kind '" + name + "'");
}

nlohmann::json mesh_to_json(const Mesh& mesh) {
  nlohmann::json j;
  j["dim"] = mesh.dim();
  j["kind"] = to_string(mesh.kind());
  j["allow_nonaffine"] = mesh.allow_nonaffine();
  auto& vertices = j["vertices"] = nlohmann::json::array();
  for (const auto& v : mesh.vertices()) {
    auto row = nlohmann::json::array();
    for (Index i = 0; i < v.size(); ++i) row.push_back(v[i]);
    vertices.push_back(row);
  }
  auto& elements = j["elements"] = nlohmann::json::array();
  for (const auto& conn : mesh.elements()) elements.push_back(conn);
  return j;
}

Mesh mesh_from_json(const nlohmann::json& j) {
  try {
    const int dim = j.at("dim").get<int>();
    if (dim != 2 && dim != 3) throw Error(ErrorKind::Io, "mesh dim must be 2 or 3");
    const MapKind kind = map_kind_from_string(j.at("kind").get<std::string>());
    const bool allow_nonaffine = j.value("allow_nonaffine", false);
    std::vector<Point<double>> vertices;
    for (const auto& row : j.at("vertices")) {
      if (static_cast<int>(row.size()) != dim) throw Error(ErrorKind::Io, "vertex has wrong dimension");
      Point<double> x(dim);
      for (int i = 0; i < dim; ++i) x[i] = row.at(i).get<double>();
      vertices.push_back(x);
    }
    std::vector<std::vector<Index>> elements;
    for (const auto& row : j.at("elements")) elements.push_back(row.get<std::vector<Index>>());
    return Mesh(dim, kind, std::move(vertices), std::move(elements), allow_nonaffine);
  } catch (const nlohmann::json::exception& err) {
    throw Error(ErrorKind::Io, std::string("malformed mesh JSON: ") + err.what());
  }
}

Mesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open mesh file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& err) {
    throw Error(ErrorKind::Io, "cannot parse " + path + ": " + err.what());
  }
  return mesh_from_json(j);
}

void write_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write mesh file " + path);
  out << mesh_to_json(mesh).dump(2) << "\n";
}

}  // namespace thstab
