#include "thstab/mesh.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <set>
#include <string>
#include <utility>

#include "thstab/error.hpp"
#include "thstab/gauss_lobatto.hpp"
#include "thstab/random.hpp"

namespace thstab {

namespace {

// Corners of local facet `facet` in cyclic order.
std::vector<int> facet_corners(int dim, int facet) {
  const int axis = facet_axis(facet);
  const int side = facet_side(facet);
  std::vector<int> free;
  for (int i = 0; i < dim; ++i)
    if (i != axis) free.push_back(i);
  std::vector<std::array<int, 2>> cycle;
  if (dim == 2) {
    cycle = {{0, 0}, {1, 0}};
  } else {
    cycle = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  }
  std::vector<int> corners;
  for (const auto& c : cycle) {
    MultiIndex bits{0, 0, 0};
    bits[axis] = side;
    for (std::size_t f = 0; f < free.size(); ++f) bits[free[f]] = c[f];
    corners.push_back(corner_vertex(bits, dim));
  }
  return corners;
}

std::set<std::pair<Index, Index>> cycle_edges(const std::vector<Index>& cyc) {
  std::set<std::pair<Index, Index>> edges;
  const std::size_t n = cyc.size();
  if (n == 2) {
    edges.insert({std::min(cyc[0], cyc[1]), std::max(cyc[0], cyc[1])});
    return edges;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Index a = cyc[i], b = cyc[(i + 1) % n];
    edges.insert({std::min(a, b), std::max(a, b)});
  }
  return edges;
}

}  // namespace

Mesh::Mesh(int dim, MapKind kind, std::vector<Point<double>> vertices,
           std::vector<std::vector<Index>> elements, bool allow_nonaffine)
    : dim_(dim),
      kind_(kind),
      allow_nonaffine_(allow_nonaffine),
      vertices_(std::move(vertices)),
      elements_(std::move(elements)) {
  if (dim_ != map_dimension(kind_)) {
    throw Error(ErrorKind::InvalidArgument, "mesh dimension does not match the element kind");
  }
  if (kind_ == MapKind::Trilinear3D && !allow_nonaffine_) {
    throw Error(ErrorKind::UnsupportedMesh,
                "3D meshes must consist of parallelepipeds (set allow_nonaffine for counterexample inputs)");
  }
  if (elements_.empty()) throw Error(ErrorKind::InvalidArgument, "mesh has no elements");
  for (const auto& v : vertices_) {
    if (v.size() != dim_) throw Error(ErrorKind::InvalidArgument, "vertex dimension mismatch");
  }
  const int nv = vertex_count(dim_);
  const int n = kShapeSamplesPerAxis;
  for (Index e = 0; e < num_elements(); ++e) {
    const auto& conn = elements_[e];
    if (static_cast<int>(conn.size()) != nv) {
      throw Error(ErrorKind::InvalidArgument,
                  "element " + std::to_string(e) + " must have " + std::to_string(nv) + " vertices");
    }
    GeometryMap<double>::VertexMatrix vm(dim_, nv);
    for (int p = 0; p < nv; ++p) {
      if (conn[p] < 0 || conn[p] >= num_vertices()) {
        throw Error(ErrorKind::InvalidArgument, "element " + std::to_string(e) + " references a missing vertex");
      }
      vm.col(p) = vertices_[conn[p]];
    }
    try {
      maps_.emplace_back(kind_, vm);
      for (Index a = 0; a < tensor_size(n, dim_); ++a) {
        const MultiIndex j = unflatten(a, n, dim_);
        Point<double> x(dim_);
        for (int i = 0; i < dim_; ++i) x[i] = double(j[i]) / double(n - 1);
        maps_.back().jacobian(x);
      }
    } catch (const Error& err) {
      const ErrorKind k =
          err.kind() == ErrorKind::InvalidArgument ? ErrorKind::UnsupportedMesh : err.kind();
      throw Error(k, "element " + std::to_string(e) + ": " + err.what());
    }
    diameters_.push_back(maps_.back().diameter());
  }
  check_topology();
}

double Mesh::max_diameter() const { return *std::max_element(diameters_.begin(), diameters_.end()); }

double Mesh::min_diameter() const { return *std::min_element(diameters_.begin(), diameters_.end()); }

std::vector<Index> Mesh::facet_vertices(Index e, int local_facet) const {
  std::vector<Index> ids;
  for (int p : facet_corners(dim_, local_facet)) ids.push_back(elements_[e][p]);
  return ids;
}

void Mesh::check_topology() {
  std::map<std::vector<Index>, std::vector<FacetRef>> facets;
  for (Index e = 0; e < num_elements(); ++e) {
    for (int f = 0; f < facet_count(dim_); ++f) {
      std::vector<Index> key = facet_vertices(e, f);
      std::sort(key.begin(), key.end());
      if (std::adjacent_find(key.begin(), key.end()) != key.end()) {
        throw Error(ErrorKind::Topology, "element " + std::to_string(e) + " has a facet with repeated vertices");
      }
      facets[key].push_back({e, f});
    }
  }
  on_boundary_.assign(num_elements(), std::array<bool, 6>{});
  for (const auto& [key, refs] : facets) {
    if (refs.size() > 2) {
      throw Error(ErrorKind::Topology, "facet shared by more than two elements");
    }
    if (refs.size() == 1) {
      on_boundary_[refs[0].element][refs[0].local_facet] = true;
      boundary_facets_.push_back(refs[0]);
      continue;
    }
    const auto ea = cycle_edges(facet_vertices(refs[0].element, refs[0].local_facet));
    const auto eb = cycle_edges(facet_vertices(refs[1].element, refs[1].local_facet));
    if (ea != eb) {
      throw Error(ErrorKind::Topology, "elements " + std::to_string(refs[0].element) + " and " +
                                           std::to_string(refs[1].element) +
                                           " share a facet with mismatched edges");
    }
  }
  std::sort(boundary_facets_.begin(), boundary_facets_.end(), [](const FacetRef& a, const FacetRef& b) {
    return a.element != b.element ? a.element < b.element : a.local_facet < b.local_facet;
  });
}

Mesh gen_structured(const StructuredSpec& spec) {
  const int d = spec.kind == StructuredKind::Quad2D ? 2 : 3;
  if (spec.subdivisions < 1) throw Error(ErrorKind::InvalidArgument, "subdivisions must be >= 1");
  if (!(spec.hi > spec.lo)) throw Error(ErrorKind::InvalidArgument, "empty box");
  if (spec.kind == StructuredKind::Quad2D && !(spec.theta >= 0.0 && spec.theta < 0.5)) {
    throw Error(ErrorKind::InvalidArgument, "theta must lie in [0, 0.5) for quadrilateral meshes");
  }
  if (spec.kind == StructuredKind::Parallelepiped3D && spec.theta != 0.0) {
    throw Error(ErrorKind::InvalidArgument, "vertex jitter would break parallelepipeds; use theta = 0 in 3D");
  }
  if (spec.affine.size() != 0 && (spec.affine.rows() != d || spec.affine.cols() != d)) {
    throw Error(ErrorKind::InvalidArgument, "affine map must be d x d");
  }
  const int N = spec.subdivisions;
  const int n1 = N + 1;
  const double h = (spec.hi - spec.lo) / N;
  Rng rng(spec.seed);
  std::vector<Point<double>> vertices;
  for (Index a = 0; a < tensor_size(n1, d); ++a) {
    const MultiIndex j = unflatten(a, n1, d);
    Point<double> x(d);
    bool interior = true;
    for (int i = 0; i < d; ++i) {
      x[i] = spec.lo + h * j[i];
      interior = interior && j[i] > 0 && j[i] < N;
    }
    if (spec.theta > 0.0 && interior) {
      for (int i = 0; i < d; ++i) x[i] += rng.uniform(-1.0, 1.0) * spec.theta * h / 2;
    }
    x[0] += spec.shear * x[1];
    if (spec.affine.size() != 0) x = spec.affine * x;
    vertices.push_back(x);
  }
  std::vector<std::vector<Index>> elements;
  for (Index c = 0; c < tensor_size(N, d); ++c) {
    const MultiIndex cell = unflatten(c, N, d);
    std::vector<Index> conn;
    for (int p = 0; p < vertex_count(d); ++p) {
      MultiIndex v{0, 0, 0};
      for (int i = 0; i < d; ++i) v[i] = cell[i] + kCornerBits[p][i];
      conn.push_back(flatten(v, n1, d));
    }
    elements.push_back(conn);
  }
  const MapKind kind = d == 2 ? MapKind::Bilinear2D : MapKind::Affine3D;
  return Mesh(d, kind, std::move(vertices), std::move(elements));
}

Mesh counterexample_mesh() {
  auto p = [](double x, double y, double z) {
    Point<double> v(3);
    v << x, y, z;
    return v;
  };
  std::vector<Point<double>> vertices{
      p(0, 0, 0), p(1, 0, 0), p(0.75, 0.75, 0), p(0, 1, 0),
      p(0, 0, 1), p(0.5, 0, 1), p(0.375, 0.375, 1), p(0, 0.5, 1),
  };
  return Mesh(3, MapKind::Trilinear3D, std::move(vertices), {{0, 1, 2, 3, 4, 5, 6, 7}}, true);
}

Mesh scaled(const Mesh& mesh, double s) {
  std::vector<Point<double>> v = mesh.vertices();
  for (auto& x : v) x *= s;
  return Mesh(mesh.dim(), mesh.kind(), std::move(v), mesh.elements(), mesh.allow_nonaffine());
}

Mesh relabeled(const Mesh& mesh, const std::vector<Index>& element_order) {
  if (static_cast<Index>(element_order.size()) != mesh.num_elements()) {
    throw Error(ErrorKind::InvalidArgument, "relabeling must list every element once");
  }
  std::vector<std::vector<Index>> elements;
  for (Index e : element_order) elements.push_back(mesh.element(e));
  return Mesh(mesh.dim(), mesh.kind(), mesh.vertices(), std::move(elements), mesh.allow_nonaffine());
}

const char* to_string(NodeClass c) {
  switch (c) {
    case NodeClass::ElementInterior: return "element_interior";
    case NodeClass::FaceInterior: return "face_interior";
    case NodeClass::EdgeInterior: return "edge_interior";
    case NodeClass::Vertex: return "vertex";
  }
  return "unknown";
}

LocalNodeInfo classify_node(const MultiIndex& j, int order, int dim) {
  unsigned free = 0;
  int extreme = 0;
  for (int i = 0; i < dim; ++i) {
    if (j[i] == 0 || j[i] == order) {
      ++extreme;
    } else {
      free |= 1u << i;
    }
  }
  NodeClass cls;
  if (extreme == 0) {
    cls = NodeClass::ElementInterior;
  } else if (extreme == dim) {
    cls = NodeClass::Vertex;
  } else if (extreme == dim - 1) {
    cls = NodeClass::EdgeInterior;
  } else {
    cls = NodeClass::FaceInterior;
  }
  return {cls, free};
}

Point<double> GlobalNodeTable::reference_point(Index local) const {
  const MultiIndex j = local_index(local);
  Point<double> x(dim);
  for (int i = 0; i < dim; ++i) x[i] = points1d[j[i]];
  return x;
}

namespace {

using EntityKey = std::array<Index, 8>;

// Orientation-independent key of local node j of element e: the entity the
// node lies on plus its index within that entity in a canonical frame
// derived from global vertex ids.
EntityKey entity_key(const Mesh& mesh, Index e, const MultiIndex& j, int order, unsigned free) {
  const int d = mesh.dim();
  const auto& conn = mesh.element(e);
  EntityKey key;
  key.fill(-1);
  const int r = std::popcount(free);
  key[0] = r;
  if (r == d) {
    key[0] = 100;
    key[1] = e;
    for (int i = 0; i < d; ++i) key[2 + i] = j[i];
    return key;
  }
  MultiIndex base{0, 0, 0};
  std::vector<int> axes;
  for (int i = 0; i < d; ++i) {
    if (free & (1u << i)) {
      axes.push_back(i);
    } else {
      base[i] = j[i] == 0 ? 0 : 1;
    }
  }
  auto corner_id = [&](std::initializer_list<int> s) {
    MultiIndex bits = base;
    int f = 0;
    for (int v : s) bits[axes[f++]] = v;
    return conn[corner_vertex(bits, d)];
  };
  if (r == 0) {
    key[1] = conn[corner_vertex(base, d)];
    return key;
  }
  if (r == 1) {
    const int p = axes[0];
    const Index g0 = corner_id({0}), g1 = corner_id({1});
    key[1] = std::min(g0, g1);
    key[2] = std::max(g0, g1);
    key[5] = g0 < g1 ? j[p] : order - j[p];
    return key;
  }
  // r == 2 in 3D: quadrilateral face
  const int p = axes[0], q = axes[1];
  Index g[2][2];
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) g[a][b] = corner_id({a, b});
  int op = 0, oq = 0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      if (g[a][b] < g[op][oq]) {
        op = a;
        oq = b;
      }
  const int tp = op == 0 ? j[p] : order - j[p];
  const int tq = oq == 0 ? j[q] : order - j[q];
  const bool p_first = g[1 - op][oq] < g[op][1 - oq];
  std::array<Index, 4> sorted{g[0][0], g[0][1], g[1][0], g[1][1]};
  std::sort(sorted.begin(), sorted.end());
  for (int a = 0; a < 4; ++a) key[1 + a] = sorted[a];
  key[5] = p_first ? tp : tq;
  key[6] = p_first ? tq : tp;
  return key;
}

}  // namespace

GlobalNodeTable build_node_table(const Mesh& mesh, int order) {
  if (order < 1 || order + 1 > kMaxLobattoPoints) {
    throw Error(ErrorKind::InvalidArgument, "node table order must be in [1, " +
                                                std::to_string(kMaxLobattoPoints - 1) + "]");
  }
  GlobalNodeTable table;
  table.dim = mesh.dim();
  table.order = order;
  table.points1d = gauss_lobatto_rule<double>(order + 1).points;
  const int d = mesh.dim();
  const Index nloc = tensor_size(order + 1, d);
  for (Index l = 0; l < nloc; ++l) table.local_info.push_back(classify_node(unflatten(l, order + 1, d), order, d));

  std::map<EntityKey, Index> ids;
  table.local_to_global.assign(mesh.num_elements(), std::vector<Index>(nloc, -1));
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const double tol = 1e-10 * mesh.diameter(e);
    for (Index l = 0; l < nloc; ++l) {
      const MultiIndex j = table.local_index(l);
      const LocalNodeInfo& info = table.local_info[l];
      const EntityKey key = entity_key(mesh, e, j, order, info.free_axes);
      const Point<double> x = mesh.map(e).map(table.reference_point(l));
      auto [it, inserted] = ids.try_emplace(key, table.size());
      if (inserted) {
        table.coordinates.push_back(x);
        table.node_class.push_back(info.cls);
      } else {
        const Index g = it->second;
        if ((table.coordinates[g] - x).cwiseAbs().maxCoeff() > tol) {
          throw Error(ErrorKind::Topology, "shared node " + std::to_string(g) +
                                               " has inconsistent coordinates in element " +
                                               std::to_string(e));
        }
        if (table.node_class[g] != info.cls) {
          throw Error(ErrorKind::Topology, "shared node " + std::to_string(g) + " changes entity class");
        }
      }
      table.local_to_global[e][l] = it->second;
    }
  }
  table.on_boundary.assign(table.size(), false);
  for (const auto& [e, f] : mesh.boundary_facets()) {
    const int axis = facet_axis(f);
    const int pos = facet_side(f) * order;
    for (Index l = 0; l < nloc; ++l) {
      if (table.local_index(l)[axis] == pos) table.on_boundary[table.local_to_global[e][l]] = true;
    }
  }
  return table;
}

bool validate_t_assumption(const Mesh& mesh) {
  const int d = mesh.dim();
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    bool found = false;
    for (int p = 0; p < vertex_count(d) && !found; ++p) {
      bool all_interior = true;
      for (int i = 0; i < d; ++i) all_interior = all_interior && !mesh.is_boundary_facet(e, 2 * i + kCornerBits[p][i]);
      found = all_interior;
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace thstab
