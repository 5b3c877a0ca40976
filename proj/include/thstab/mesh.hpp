#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "thstab/geometry.hpp"
#include "thstab/types.hpp"

namespace thstab {

/// Local facet f = 2 * axis + side is the reference facet x_axis = side.
inline int facet_axis(int facet) { return facet / 2; }
inline int facet_side(int facet) { return facet % 2; }
inline int facet_count(int dim) { return 2 * dim; }

/// Conforming mesh of quadrilaterals or hexahedra. Element vertex lists
/// follow the kCornerBits ordering. Boundary facets are derived.
class Mesh {
 public:
  struct FacetRef {
    Index element;
    int local_facet;
  };

  Mesh(int dim, MapKind kind, std::vector<Point<double>> vertices,
       std::vector<std::vector<Index>> elements, bool allow_nonaffine = false);

  int dim() const { return dim_; }
  MapKind kind() const { return kind_; }
  bool allow_nonaffine() const { return allow_nonaffine_; }
  /// True if every element is a parallelogram/parallelepiped-compatible map
  /// for which the integrand condition holds (all 2D meshes, affine 3D).
  bool satisfies_integrand_condition() const { return dim_ == 2 || kind_ == MapKind::Affine3D; }

  Index num_vertices() const { return static_cast<Index>(vertices_.size()); }
  Index num_elements() const { return static_cast<Index>(elements_.size()); }
  const std::vector<Point<double>>& vertices() const { return vertices_; }
  const std::vector<std::vector<Index>>& elements() const { return elements_; }
  const std::vector<Index>& element(Index e) const { return elements_[e]; }

  const GeometryMap<double>& map(Index e) const { return maps_[e]; }
  double diameter(Index e) const { return diameters_[e]; }
  double max_diameter() const;
  double min_diameter() const;

  const std::vector<FacetRef>& boundary_facets() const { return boundary_facets_; }
  bool is_boundary_facet(Index e, int local_facet) const { return on_boundary_[e][local_facet]; }

  /// Global vertex ids of a local facet in cyclic order.
  std::vector<Index> facet_vertices(Index e, int local_facet) const;

 private:
  void check_topology();

  int dim_;
  MapKind kind_;
  bool allow_nonaffine_;
  std::vector<Point<double>> vertices_;
  std::vector<std::vector<Index>> elements_;
  std::vector<GeometryMap<double>> maps_;
  std::vector<double> diameters_;
  std::vector<std::array<bool, 6>> on_boundary_;
  std::vector<FacetRef> boundary_facets_;
};

enum class StructuredKind { Quad2D, Parallelepiped3D };

struct StructuredSpec {
  StructuredKind kind = StructuredKind::Quad2D;
  double lo = 0.0;  // box [lo, hi]^d
  double hi = 1.0;
  int subdivisions = 1;
  double theta = 0.0;  // interior vertex jitter, fraction of h/2 (2D only)
  double shear = 0.0;  // x_1 += shear * x_2
  Matrix<double> affine;  // optional d x d map applied after the shear
  std::uint64_t seed = 1;
};

Mesh gen_structured(const StructuredSpec& spec);

/// Single non-parallelepiped hexahedron that violates the integrand
/// condition for k = 2.
Mesh counterexample_mesh();

/// Uniform scaling x -> s x of all vertices.
Mesh scaled(const Mesh& mesh, double s);

/// Same mesh with elements listed in a different order.
Mesh relabeled(const Mesh& mesh, const std::vector<Index>& element_order);

enum class NodeClass { ElementInterior, FaceInterior, EdgeInterior, Vertex };

const char* to_string(NodeClass c);

/// Class of a reference node together with the axes along which the node
/// is not at an extreme index (the "free" axes of its entity).
struct LocalNodeInfo {
  NodeClass cls;
  unsigned free_axes;  // bit i set: axis i is free
};

LocalNodeInfo classify_node(const MultiIndex& j, int order, int dim);

/// Global numbering of the (order+1)^d Gauss-Lobatto nodes of every element.
struct GlobalNodeTable {
  int dim = 0;
  int order = 0;
  std::vector<double> points1d;                  // Gauss-Lobatto points on [0,1]
  std::vector<LocalNodeInfo> local_info;         // per local node
  std::vector<std::vector<Index>> local_to_global;  // [element][local]
  std::vector<Point<double>> coordinates;        // per global node
  std::vector<bool> on_boundary;                 // per global node
  std::vector<NodeClass> node_class;             // per global node

  Index size() const { return static_cast<Index>(coordinates.size()); }
  Index nodes_per_element() const { return static_cast<Index>(local_info.size()); }
  MultiIndex local_index(Index local) const { return unflatten(local, order + 1, dim); }
  Point<double> reference_point(Index local) const;
};

GlobalNodeTable build_node_table(const Mesh& mesh, int order);

/// Every element has a vertex whose d incident facets are all interior.
bool validate_t_assumption(const Mesh& mesh);

}  // namespace thstab
