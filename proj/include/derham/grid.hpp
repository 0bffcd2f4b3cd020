#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace derham {

enum class EntityKind { node, edge, face, cell };

inline const char* to_string(EntityKind k) {
  switch (k) {
    case EntityKind::node: return "node";
    case EntityKind::edge: return "edge";
    case EntityKind::face: return "face";
    default: return "cell";
  }
}

/// Axis-aligned voxel region: a box of shape[0] x shape[1] x shape[2] cells
/// with uniform spacing h and a per-cell occupancy mask.
struct VoxelDomain {
  std::array<int, 3> shape{0, 0, 0};
  double spacing = 0.0;
  std::vector<std::uint8_t> occupancy; // cell (x,y,z) -> shape-ordered flag

  int cell_flat(int x, int y, int z) const {
    return (z * shape[1] + y) * shape[0] + x;
  }
  bool in_cell_range(int x, int y, int z) const {
    return x >= 0 && x < shape[0] && y >= 0 && y < shape[1] && z >= 0 && z < shape[2];
  }
  bool occupied(int x, int y, int z) const {
    return in_cell_range(x, y, z) && occupancy[cell_flat(x, y, z)] != 0;
  }
  std::uint64_t fingerprint() const {
    std::uint64_t hash = 1469598103934665603ull;
    auto mix = [&hash](std::uint64_t v) {
      hash ^= v;
      hash *= 1099511628211ull;
    };
    for (int s : shape) mix(static_cast<std::uint64_t>(s));
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(spacing));
    std::memcpy(&bits, &spacing, sizeof(bits));
    mix(bits);
    for (std::uint8_t o : occupancy) mix(o);
    return hash;
  }
};

/// Builds a validated voxel domain. Throws std::invalid_argument on an empty
/// occupancy set and on a face-disconnected one; a complex spanning separate
/// components would silently merge unrelated spectra.
inline VoxelDomain build_grid(std::array<int, 3> shape, double spacing,
                              std::vector<std::uint8_t> occupancy) {
  if (shape[0] <= 0 || shape[1] <= 0 || shape[2] <= 0)
    throw std::invalid_argument("empty domain: non-positive shape");
  if (!(spacing > 0.0)) throw std::invalid_argument("empty domain: non-positive spacing");
  const std::size_t ncells =
      static_cast<std::size_t>(shape[0]) * shape[1] * shape[2];
  if (occupancy.size() != ncells)
    throw std::invalid_argument("occupancy size does not match shape");

  VoxelDomain dom{shape, spacing, std::move(occupancy)};

  int first = -1;
  int count = 0;
  for (std::size_t i = 0; i < dom.occupancy.size(); ++i) {
    if (dom.occupancy[i]) {
      if (first < 0) first = static_cast<int>(i);
      ++count;
    }
  }
  if (count == 0) throw std::invalid_argument("empty domain: no occupied cells");

  // Face-connectivity sweep from the first occupied cell.
  std::vector<std::uint8_t> seen(dom.occupancy.size(), 0);
  std::queue<int> frontier;
  frontier.push(first);
  seen[first] = 1;
  int reached = 0;
  const int nx = shape[0], ny = shape[1];
  while (!frontier.empty()) {
    const int flat = frontier.front();
    frontier.pop();
    ++reached;
    const int x = flat % nx;
    const int y = (flat / nx) % ny;
    const int z = flat / (nx * ny);
    const int steps[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0},
                             {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    for (const auto& s : steps) {
      const int cx = x + s[0], cy = y + s[1], cz = z + s[2];
      if (!dom.occupied(cx, cy, cz)) continue;
      const int nf = dom.cell_flat(cx, cy, cz);
      if (!seen[nf]) {
        seen[nf] = 1;
        frontier.push(nf);
      }
    }
  }
  if (reached != count) throw std::invalid_argument("disconnected domain");
  return dom;
}

inline VoxelDomain build_full_box(std::array<int, 3> shape, double spacing) {
  const std::size_t n = static_cast<std::size_t>(shape[0]) * shape[1] * shape[2];
  return build_grid(shape, spacing, std::vector<std::uint8_t>(n, 1));
}

/// Named occupancy presets at a given per-axis resolution r (h = 1/r).
///   cube:   full r^3 box.
///   cavity: r^3 box minus the central (r/3)^3 block; r must be divisible by 3.
///   torus:  r x r x r/4 slab minus a central r/2 x r/2 column; r divisible by 4.
inline VoxelDomain preset_domain(const std::string& name, int r) {
  const double h = 1.0 / r;
  if (name == "cube") return build_full_box({r, r, r}, h);
  if (name == "cavity") {
    if (r % 3 != 0 || r < 3)
      throw std::invalid_argument("cavity preset needs resolution divisible by 3");
    const int a = r / 3, b = 2 * r / 3;
    std::vector<std::uint8_t> occ(static_cast<std::size_t>(r) * r * r, 1);
    for (int z = a; z < b; ++z)
      for (int y = a; y < b; ++y)
        for (int x = a; x < b; ++x) occ[(z * r + y) * r + x] = 0;
    return build_grid({r, r, r}, h, std::move(occ));
  }
  if (name == "torus") {
    if (r % 4 != 0 || r < 8)
      throw std::invalid_argument("torus preset needs resolution divisible by 4, at least 8");
    const int nz = r / 4, a = r / 4, b = 3 * r / 4;
    std::vector<std::uint8_t> occ(static_cast<std::size_t>(r) * r * nz, 1);
    for (int z = 0; z < nz; ++z)
      for (int y = a; y < b; ++y)
        for (int x = a; x < b; ++x) occ[(z * r + y) * r + x] = 0;
    return build_grid({r, r, nz}, h, std::move(occ));
  }
  throw std::invalid_argument("unknown domain preset: " + name);
}

/// Reads "x y z" integer triples (one per line, # comments allowed) into an
/// occupancy mask; the shape is the tight bounding box of the listed cells.
inline VoxelDomain domain_from_cell_list(const std::string& path, double spacing) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open cell list: " + path);
  std::vector<std::array<int, 3>> cells;
  std::string line;
  int lineno = 0;
  std::array<int, 3> hi{0, 0, 0};
  while (std::getline(in, line)) {
    ++lineno;
    const auto cut = line.find('#');
    if (cut != std::string::npos) line.resize(cut);
    std::istringstream ls(line);
    int x, y, z;
    if (!(ls >> x)) continue; // blank line
    if (!(ls >> y >> z) || x < 0 || y < 0 || z < 0)
      throw std::invalid_argument("cell list " + path + " line " +
                                  std::to_string(lineno) + ": expected three non-negative integers");
    cells.push_back({x, y, z});
    hi = {std::max(hi[0], x + 1), std::max(hi[1], y + 1), std::max(hi[2], z + 1)};
  }
  if (cells.empty()) throw std::invalid_argument("empty domain: cell list has no cells");
  if (spacing <= 0.0) spacing = 1.0 / std::max({hi[0], hi[1], hi[2]});
  std::vector<std::uint8_t> occ(static_cast<std::size_t>(hi[0]) * hi[1] * hi[2], 0);
  for (const auto& c : cells) occ[(c[2] * hi[1] + c[1]) * hi[0] + c[0]] = 1;
  return build_grid(hi, spacing, std::move(occ));
}

/// Entity tables for the staggered complex over a voxel domain: scalars on
/// nodes and cells, tangential edge samples, normal face samples. Edges run
/// along +axis, faces carry the +axis normal, and enumeration is lexicographic
/// in (z, y, x) with the axis innermost, so rebuilds are reproducible.
class EntityIndex {
public:
  struct EdgeNodes { int tail, head; };
  struct Incident { int id; double sign; };

  explicit EntityIndex(VoxelDomain dom) : dom_(std::move(dom)) {
    const int nx = dom_.shape[0], ny = dom_.shape[1], nz = dom_.shape[2];
    node_dims_ = {nx + 1, ny + 1, nz + 1};
    for (int a = 0; a < 3; ++a) {
      edge_dims_[a] = {nx + 1, ny + 1, nz + 1};
      edge_dims_[a][a] = dom_.shape[a];
      face_dims_[a] = {nx, ny, nz};
      face_dims_[a][a] = dom_.shape[a] + 1;
    }
    node_ids_.assign(flat_size(node_dims_), -1);
    for (int a = 0; a < 3; ++a) {
      edge_ids_[a].assign(flat_size(edge_dims_[a]), -1);
      face_ids_[a].assign(flat_size(face_dims_[a]), -1);
    }
    cell_ids_.assign(flat_size({nx, ny, nz}), -1);

    for (int z = 0; z <= nz; ++z)
      for (int y = 0; y <= ny; ++y)
        for (int x = 0; x <= nx; ++x)
          if (node_touches_domain(x, y, z)) {
            node_ids_[flat(node_dims_, x, y, z)] = static_cast<int>(node_coord_.size());
            node_coord_.push_back({x, y, z});
          }
    for (int z = 0; z <= nz; ++z)
      for (int y = 0; y <= ny; ++y)
        for (int x = 0; x <= nx; ++x)
          for (int a = 0; a < 3; ++a) {
            if (!in_dims(edge_dims_[a], x, y, z)) continue;
            if (!edge_touches_domain(a, x, y, z)) continue;
            edge_ids_[a][flat(edge_dims_[a], x, y, z)] = static_cast<int>(edge_coord_.size());
            edge_coord_.push_back({x, y, z, a});
          }
    for (int z = 0; z <= nz; ++z)
      for (int y = 0; y <= ny; ++y)
        for (int x = 0; x <= nx; ++x)
          for (int a = 0; a < 3; ++a) {
            if (!in_dims(face_dims_[a], x, y, z)) continue;
            const int occ = face_occupied_sides(a, x, y, z);
            if (occ == 0) continue;
            face_ids_[a][flat(face_dims_[a], x, y, z)] = static_cast<int>(face_coord_.size());
            face_coord_.push_back({x, y, z, a});
            face_boundary_.push_back(occ == 1);
          }
    for (int z = 0; z < nz; ++z)
      for (int y = 0; y < ny; ++y)
        for (int x = 0; x < nx; ++x)
          if (dom_.occupied(x, y, z)) {
            cell_ids_[dom_.cell_flat(x, y, z)] = static_cast<int>(cell_coord_.size());
            cell_coord_.push_back({x, y, z});
          }
  }

  const VoxelDomain& domain() const { return dom_; }
  double spacing() const { return dom_.spacing; }
  std::uint64_t fingerprint() const { return dom_.fingerprint(); }

  int count(EntityKind k) const {
    switch (k) {
      case EntityKind::node: return static_cast<int>(node_coord_.size());
      case EntityKind::edge: return static_cast<int>(edge_coord_.size());
      case EntityKind::face: return static_cast<int>(face_coord_.size());
      default: return static_cast<int>(cell_coord_.size());
    }
  }

  /// V - E + F - C of the closed voxel complex; 1 for a box, 0 for a solid
  /// torus, 2 for a shell around one cavity.
  long euler_characteristic() const {
    return static_cast<long>(node_coord_.size()) - static_cast<long>(edge_coord_.size()) +
           static_cast<long>(face_coord_.size()) - static_cast<long>(cell_coord_.size());
  }

  int node_id(int x, int y, int z) const {
    if (!in_dims(node_dims_, x, y, z)) return -1;
    return node_ids_[flat(node_dims_, x, y, z)];
  }
  int edge_id(int axis, int x, int y, int z) const {
    if (!in_dims(edge_dims_[axis], x, y, z)) return -1;
    return edge_ids_[axis][flat(edge_dims_[axis], x, y, z)];
  }
  int face_id(int axis, int x, int y, int z) const {
    if (!in_dims(face_dims_[axis], x, y, z)) return -1;
    return face_ids_[axis][flat(face_dims_[axis], x, y, z)];
  }
  int cell_id(int x, int y, int z) const {
    if (!dom_.in_cell_range(x, y, z)) return -1;
    return cell_ids_[dom_.cell_flat(x, y, z)];
  }

  std::array<int, 3> node_coord(int id) const { return node_coord_[id]; }
  std::array<int, 4> edge_coord(int id) const { return edge_coord_[id]; } // x,y,z,axis
  std::array<int, 4> face_coord(int id) const { return face_coord_[id]; } // x,y,z,normal
  std::array<int, 3> cell_coord(int id) const { return cell_coord_[id]; }

  bool is_boundary_face(int id) const { return face_boundary_[id]; }

  EdgeNodes edge_nodes(int id) const {
    const auto& e = edge_coord_[id];
    std::array<int, 3> head{e[0], e[1], e[2]};
    head[e[3]] += 1;
    return {node_id(e[0], e[1], e[2]), node_id(head[0], head[1], head[2])};
  }

  /// Edges of a face in circulation order for the +axis normal; signs give the
  /// right-hand-rule orientation, so summing sign * edge value / h applies the
  /// curl stencil exactly.
  std::array<Incident, 4> face_edges(int id) const {
    const auto& f = face_coord_[id];
    const int x = f[0], y = f[1], z = f[2];
    switch (f[3]) {
      case 0:
        return {{{edge_id(1, x, y, z), 1.0},
                 {edge_id(2, x, y + 1, z), 1.0},
                 {edge_id(1, x, y, z + 1), -1.0},
                 {edge_id(2, x, y, z), -1.0}}};
      case 1:
        return {{{edge_id(2, x, y, z), 1.0},
                 {edge_id(0, x, y, z + 1), 1.0},
                 {edge_id(2, x + 1, y, z), -1.0},
                 {edge_id(0, x, y, z), -1.0}}};
      default:
        return {{{edge_id(0, x, y, z), 1.0},
                 {edge_id(1, x + 1, y, z), 1.0},
                 {edge_id(0, x, y + 1, z), -1.0},
                 {edge_id(1, x, y, z), -1.0}}};
    }
  }

  /// Faces of a cell with outward signs: +1 on the +side face, -1 on the -side.
  std::array<Incident, 6> cell_faces(int id) const {
    const auto& c = cell_coord_[id];
    const int x = c[0], y = c[1], z = c[2];
    return {{{face_id(0, x + 1, y, z), 1.0},
             {face_id(0, x, y, z), -1.0},
             {face_id(1, x, y + 1, z), 1.0},
             {face_id(1, x, y, z), -1.0},
             {face_id(2, x, y, z + 1), 1.0},
             {face_id(2, x, y, z), -1.0}}};
  }

  /// Nodes of a face (its four corners), used for boundary tagging.
  std::array<int, 4> face_nodes(int id) const {
    const auto& f = face_coord_[id];
    const int a = f[3], u = (a + 1) % 3, v = (a + 2) % 3;
    std::array<int, 3> p{f[0], f[1], f[2]};
    std::array<int, 4> out{};
    int k = 0;
    for (int dv = 0; dv <= 1; ++dv)
      for (int du = 0; du <= 1; ++du) {
        std::array<int, 3> q = p;
        q[u] += du;
        q[v] += dv;
        out[k++] = node_id(q[0], q[1], q[2]);
      }
    return out;
  }

  /// Number of occupied cells incident to each entity; the clipped dual-cell
  /// mass weights and the boundary test both derive from it.
  int incident_cells(EntityKind k, int id) const {
    switch (k) {
      case EntityKind::node: {
        const auto& p = node_coord_[id];
        int n = 0;
        for (int dz = -1; dz <= 0; ++dz)
          for (int dy = -1; dy <= 0; ++dy)
            for (int dx = -1; dx <= 0; ++dx)
              n += dom_.occupied(p[0] + dx, p[1] + dy, p[2] + dz) ? 1 : 0;
        return n;
      }
      case EntityKind::edge: {
        const auto& e = edge_coord_[id];
        const int a = e[3], u = (a + 1) % 3, v = (a + 2) % 3;
        int n = 0;
        for (int dv = -1; dv <= 0; ++dv)
          for (int du = -1; du <= 0; ++du) {
            std::array<int, 3> c{e[0], e[1], e[2]};
            c[u] += du;
            c[v] += dv;
            n += dom_.occupied(c[0], c[1], c[2]) ? 1 : 0;
          }
        return n;
      }
      case EntityKind::face: {
        const auto& f = face_coord_[id];
        return face_occupied_sides(f[3], f[0], f[1], f[2]);
      }
      default:
        return 1;
    }
  }

  Eigen::Vector3d position(EntityKind k, int id) const {
    const double h = dom_.spacing;
    switch (k) {
      case EntityKind::node: {
        const auto& p = node_coord_[id];
        return {h * p[0], h * p[1], h * p[2]};
      }
      case EntityKind::edge: {
        const auto& e = edge_coord_[id];
        Eigen::Vector3d pos{h * e[0], h * e[1], h * e[2]};
        pos[e[3]] += 0.5 * h;
        return pos;
      }
      case EntityKind::face: {
        const auto& f = face_coord_[id];
        Eigen::Vector3d pos{h * (f[0] + 0.5), h * (f[1] + 0.5), h * (f[2] + 0.5)};
        pos[f[3]] -= 0.5 * h;
        return pos;
      }
      default: {
        const auto& c = cell_coord_[id];
        return {h * (c[0] + 0.5), h * (c[1] + 0.5), h * (c[2] + 0.5)};
      }
    }
  }

  /// Direction index of a vector-valued sample: edge tangent or face normal.
  int component_axis(EntityKind k, int id) const {
    if (k == EntityKind::edge) return edge_coord_[id][3];
    if (k == EntityKind::face) return face_coord_[id][3];
    throw std::logic_error("component_axis: scalar entity");
  }

private:
  static std::size_t flat_size(std::array<int, 3> d) {
    return static_cast<std::size_t>(d[0]) * d[1] * d[2];
  }
  static std::size_t flat(std::array<int, 3> d, int x, int y, int z) {
    return (static_cast<std::size_t>(z) * d[1] + y) * d[0] + x;
  }
  static bool in_dims(std::array<int, 3> d, int x, int y, int z) {
    return x >= 0 && x < d[0] && y >= 0 && y < d[1] && z >= 0 && z < d[2];
  }

  bool node_touches_domain(int x, int y, int z) const {
    for (int dz = -1; dz <= 0; ++dz)
      for (int dy = -1; dy <= 0; ++dy)
        for (int dx = -1; dx <= 0; ++dx)
          if (dom_.occupied(x + dx, y + dy, z + dz)) return true;
    return false;
  }
  bool edge_touches_domain(int a, int x, int y, int z) const {
    const int u = (a + 1) % 3, v = (a + 2) % 3;
    for (int dv = -1; dv <= 0; ++dv)
      for (int du = -1; du <= 0; ++du) {
        std::array<int, 3> c{x, y, z};
        c[u] += du;
        c[v] += dv;
        if (dom_.occupied(c[0], c[1], c[2])) return true;
      }
    return false;
  }
  int face_occupied_sides(int a, int x, int y, int z) const {
    std::array<int, 3> lo{x, y, z};
    lo[a] -= 1;
    return (dom_.occupied(lo[0], lo[1], lo[2]) ? 1 : 0) +
           (dom_.occupied(x, y, z) ? 1 : 0);
  }

  VoxelDomain dom_;
  std::array<int, 3> node_dims_;
  std::array<std::array<int, 3>, 3> edge_dims_, face_dims_;
  std::vector<int> node_ids_, cell_ids_;
  std::array<std::vector<int>, 3> edge_ids_, face_ids_;
  std::vector<std::array<int, 3>> node_coord_, cell_coord_;
  std::vector<std::array<int, 4>> edge_coord_, face_coord_;
  std::vector<bool> face_boundary_;
};

inline EntityIndex enumerate_entities(const VoxelDomain& dom) { return EntityIndex(dom); }

enum class BoundaryTag : std::uint8_t { interior, T, N };

/// How to split the boundary into the essential part (T) and its complement.
struct PartitionSpec {
  enum class Kind { all_t, all_n, sides, explicit_faces } kind = Kind::all_n;
  // For Kind::sides: bounding-box sides carrying T, as (axis, 0 for the low
  // side / 1 for the high side).
  std::vector<std::pair<int, int>> t_sides;
  // For Kind::explicit_faces: (axis, x, y, z, tag).
  std::vector<std::tuple<int, int, int, int, BoundaryTag>> faces;

  /// Accepted forms: "all-T", "all-N", "T:x-,y+" (T on listed box sides),
  /// "faces:PATH" (per-face file with lines "axis x y z T|N").
  static PartitionSpec parse(const std::string& text) {
    PartitionSpec spec;
    if (text == "all-T") {
      spec.kind = Kind::all_t;
      return spec;
    }
    if (text == "all-N") {
      spec.kind = Kind::all_n;
      return spec;
    }
    if (text.rfind("T:", 0) == 0) {
      spec.kind = Kind::sides;
      std::stringstream ss(text.substr(2));
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        if (tok.size() != 2 || tok[0] < 'x' || tok[0] > 'z' ||
            (tok[1] != '-' && tok[1] != '+'))
          throw std::invalid_argument("bad partition side selector: " + tok);
        spec.t_sides.emplace_back(tok[0] - 'x', tok[1] == '+' ? 1 : 0);
      }
      if (spec.t_sides.empty())
        throw std::invalid_argument("partition rule T: needs at least one side");
      return spec;
    }
    if (text.rfind("faces:", 0) == 0) {
      spec.kind = Kind::explicit_faces;
      const std::string path = text.substr(6);
      std::ifstream in(path);
      if (!in) throw std::invalid_argument("cannot open face list: " + path);
      std::string line;
      int lineno = 0;
      while (std::getline(in, line)) {
        ++lineno;
        const auto cut = line.find('#');
        if (cut != std::string::npos) line.resize(cut);
        std::istringstream ls(line);
        std::string axis, tag;
        int x, y, z;
        if (!(ls >> axis)) continue;
        if (!(ls >> x >> y >> z >> tag) || axis.size() != 1 || axis[0] < 'x' ||
            axis[0] > 'z' || (tag != "T" && tag != "N"))
          throw std::invalid_argument("face list " + path + " line " +
                                      std::to_string(lineno) +
                                      ": expected 'axis x y z T|N'");
        spec.faces.emplace_back(axis[0] - 'x', x, y, z,
                                tag == "T" ? BoundaryTag::T : BoundaryTag::N);
      }
      return spec;
    }
    throw std::invalid_argument("unknown partition rule: " + text);
  }

  std::string describe() const {
    switch (kind) {
      case Kind::all_t: return "all-T";
      case Kind::all_n: return "all-N";
      case Kind::sides: {
        std::string out = "T:";
        for (std::size_t i = 0; i < t_sides.size(); ++i) {
          if (i) out += ",";
          out += static_cast<char>('x' + t_sides[i].first);
          out += t_sides[i].second ? '+' : '-';
        }
        return out;
      }
      default: return "explicit-faces";
    }
  }
};

/// Per-entity boundary tags induced by the face partition. A boundary edge or
/// node touching at least one T face is tagged T (the essential class wins on
/// the interface); remaining boundary entities are N; off-boundary entities
/// stay interior.
struct BoundaryPartition {
  std::vector<BoundaryTag> face_tag, edge_tag, node_tag;
  double area_t = 0.0, area_n = 0.0;
  std::vector<int> interface_edges; // boundary edges touching both classes
  std::uint64_t fingerprint = 0;
  std::string rule;

  bool essential(EntityKind k, int id) const {
    switch (k) {
      case EntityKind::node: return node_tag[id] == BoundaryTag::T;
      case EntityKind::edge: return edge_tag[id] == BoundaryTag::T;
      case EntityKind::face: return face_tag[id] == BoundaryTag::T;
      default: return false; // cells carry no boundary condition
    }
  }
  /// Entities of the swapped partition (T <-> N); cells stay free.
  bool essential_complement(EntityKind k, int id) const {
    switch (k) {
      case EntityKind::node: return node_tag[id] == BoundaryTag::N;
      case EntityKind::edge: return edge_tag[id] == BoundaryTag::N;
      case EntityKind::face: return face_tag[id] == BoundaryTag::N;
      default: return false;
    }
  }
};

inline BoundaryPartition tag_boundary(const EntityIndex& index, const PartitionSpec& spec) {
  const double h = index.spacing();
  BoundaryPartition part;
  part.fingerprint = index.fingerprint();
  part.rule = spec.describe();
  part.face_tag.assign(index.count(EntityKind::face), BoundaryTag::interior);
  part.edge_tag.assign(index.count(EntityKind::edge), BoundaryTag::interior);
  part.node_tag.assign(index.count(EntityKind::node), BoundaryTag::interior);

  auto side_is_t = [&](const std::array<int, 4>& f) {
    for (const auto& [axis, hi] : spec.t_sides) {
      if (f[3] != axis) continue;
      const int wall = hi ? index.domain().shape[axis] : 0;
      if (f[axis] == wall) return true;
    }
    return false;
  };

  if (spec.kind == PartitionSpec::Kind::explicit_faces) {
    for (const auto& [axis, x, y, z, tag] : spec.faces) {
      const int id = index.face_id(axis, x, y, z);
      if (id < 0)
        throw std::invalid_argument("face list names a face outside the complex");
      if (!index.is_boundary_face(id))
        throw std::invalid_argument("interior face tagged");
      part.face_tag[id] = tag;
    }
    for (int f = 0; f < index.count(EntityKind::face); ++f)
      if (index.is_boundary_face(f) && part.face_tag[f] == BoundaryTag::interior)
        throw std::invalid_argument("partial partition: untagged boundary face");
  } else {
    for (int f = 0; f < index.count(EntityKind::face); ++f) {
      if (!index.is_boundary_face(f)) continue;
      bool is_t = spec.kind == PartitionSpec::Kind::all_t;
      if (spec.kind == PartitionSpec::Kind::sides) is_t = side_is_t(index.face_coord(f));
      part.face_tag[f] = is_t ? BoundaryTag::T : BoundaryTag::N;
    }
  }

  std::vector<std::uint8_t> edge_t(part.edge_tag.size(), 0), edge_n(part.edge_tag.size(), 0);
  for (int f = 0; f < index.count(EntityKind::face); ++f) {
    const BoundaryTag tag = part.face_tag[f];
    if (tag == BoundaryTag::interior) continue;
    (tag == BoundaryTag::T ? part.area_t : part.area_n) += h * h;
    for (const auto& [e, sign] : index.face_edges(f)) {
      (void)sign;
      (tag == BoundaryTag::T ? edge_t : edge_n)[e] = 1;
    }
    for (int nd : index.face_nodes(f)) {
      if (tag == BoundaryTag::T)
        part.node_tag[nd] = BoundaryTag::T;
      else if (part.node_tag[nd] == BoundaryTag::interior)
        part.node_tag[nd] = BoundaryTag::N;
    }
  }
  for (std::size_t e = 0; e < part.edge_tag.size(); ++e) {
    if (edge_t[e])
      part.edge_tag[e] = BoundaryTag::T;
    else if (edge_n[e])
      part.edge_tag[e] = BoundaryTag::N;
    if (edge_t[e] && edge_n[e]) part.interface_edges.push_back(static_cast<int>(e));
  }
  return part;
}

/// The same partition with the roles of T and N exchanged.
inline BoundaryPartition swap_tags(const EntityIndex& index, const BoundaryPartition& part) {
  PartitionSpec spec;
  spec.kind = PartitionSpec::Kind::explicit_faces;
  for (int f = 0; f < index.count(EntityKind::face); ++f) {
    if (part.face_tag[f] == BoundaryTag::interior) continue;
    const auto c = index.face_coord(f);
    spec.faces.emplace_back(c[3], c[0], c[1], c[2],
                            part.face_tag[f] == BoundaryTag::T ? BoundaryTag::N
                                                               : BoundaryTag::T);
  }
  BoundaryPartition swapped = tag_boundary(index, spec);
  swapped.rule = "swap(" + part.rule + ")";
  return swapped;
}

/// Structural diagnosis of a partition. The checks are a discrete proxy for
/// the paper-level admissibility of the boundary pair: the tagging is total,
/// each class is edge-connected inside each boundary component, and the
/// interface consists of closed edge curves. Violations are reported, not
/// fatal; spectra on flagged partitions are still computable.
struct AdmissibilityReport {
  bool total = true;
  int boundary_components = 0;
  bool t_connected = true, n_connected = true;
  bool interface_closed = true;
  int interface_edge_count = 0;
  std::vector<std::string> warnings;
  bool admissible() const {
    return total && t_connected && n_connected && interface_closed;
  }
};

inline AdmissibilityReport validate_admissible(const EntityIndex& index,
                                               const BoundaryPartition& part) {
  if (part.fingerprint != index.fingerprint())
    throw std::invalid_argument("inconsistent inputs: partition built for a different grid");
  AdmissibilityReport report;

  std::vector<int> boundary_faces;
  for (int f = 0; f < index.count(EntityKind::face); ++f) {
    if (index.is_boundary_face(f)) {
      boundary_faces.push_back(f);
      if (part.face_tag[f] == BoundaryTag::interior) report.total = false;
    } else if (part.face_tag[f] != BoundaryTag::interior) {
      report.total = false;
      report.warnings.push_back("interior face tagged");
    }
  }
  if (!report.total && report.warnings.empty())
    report.warnings.push_back("partial partition: untagged boundary faces");

  // Adjacency through shared edges, restricted to boundary faces.
  std::vector<std::vector<int>> edge_faces(index.count(EntityKind::edge));
  for (int f : boundary_faces)
    for (const auto& [e, sign] : index.face_edges(f)) {
      (void)sign;
      edge_faces[e].push_back(f);
    }

  auto component_count = [&](auto accept) {
    std::vector<std::uint8_t> seen(index.count(EntityKind::face), 0);
    int comps = 0;
    for (int f0 : boundary_faces) {
      if (seen[f0] || !accept(f0)) continue;
      ++comps;
      std::queue<int> bfs;
      bfs.push(f0);
      seen[f0] = 1;
      while (!bfs.empty()) {
        const int f = bfs.front();
        bfs.pop();
        for (const auto& [e, sign] : index.face_edges(f)) {
          (void)sign;
          for (int g : edge_faces[e])
            if (!seen[g] && accept(g)) {
              seen[g] = 1;
              bfs.push(g);
            }
        }
      }
    }
    return comps;
  };

  report.boundary_components = component_count([](int) { return true; });
  const int t_comps =
      component_count([&](int f) { return part.face_tag[f] == BoundaryTag::T; });
  const int n_comps =
      component_count([&](int f) { return part.face_tag[f] == BoundaryTag::N; });
  // Each class may span several boundary components (for example all-T on a
  // shell), but inside one component it must not fragment.
  std::vector<std::uint8_t> comp_has_t, comp_has_n;
  {
    std::vector<int> comp_of(index.count(EntityKind::face), -1);
    int comps = 0;
    for (int f0 : boundary_faces) {
      if (comp_of[f0] >= 0) continue;
      std::queue<int> bfs;
      bfs.push(f0);
      comp_of[f0] = comps;
      while (!bfs.empty()) {
        const int f = bfs.front();
        bfs.pop();
        for (const auto& [e, sign] : index.face_edges(f)) {
          (void)sign;
          for (int g : edge_faces[e])
            if (comp_of[g] < 0) {
              comp_of[g] = comps;
              bfs.push(g);
            }
        }
      }
      ++comps;
    }
    comp_has_t.assign(comps, 0);
    comp_has_n.assign(comps, 0);
    for (int f : boundary_faces) {
      if (part.face_tag[f] == BoundaryTag::T) comp_has_t[comp_of[f]] = 1;
      if (part.face_tag[f] == BoundaryTag::N) comp_has_n[comp_of[f]] = 1;
    }
  }
  const int t_expected = static_cast<int>(std::count(comp_has_t.begin(), comp_has_t.end(), 1));
  const int n_expected = static_cast<int>(std::count(comp_has_n.begin(), comp_has_n.end(), 1));
  report.t_connected = t_comps <= t_expected;
  report.n_connected = n_comps <= n_expected;
  if (!report.t_connected)
    report.warnings.push_back("essential class fragments inside a boundary component");
  if (!report.n_connected)
    report.warnings.push_back("natural class fragments inside a boundary component");

  report.interface_edge_count = static_cast<int>(part.interface_edges.size());
  std::vector<int> node_degree(index.count(EntityKind::node), 0);
  for (int e : part.interface_edges) {
    const auto en = index.edge_nodes(e);
    ++node_degree[en.tail];
    ++node_degree[en.head];
  }
  for (int deg : node_degree)
    if (deg % 2 != 0) {
      report.interface_closed = false;
      report.warnings.push_back("interface curve has a loose end");
      break;
    }
  return report;
}

} // namespace derham
