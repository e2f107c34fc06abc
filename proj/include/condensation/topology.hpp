#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "condensation/engine.hpp"
#include "condensation/geometry.hpp"

namespace condensation {

inline constexpr double kInfiniteDeath = std::numeric_limits<double>::infinity();

struct DiagramPoint {
  double birth = 0.0;
  double death = 0.0;
  int dim = 0;
  bool essential = false;

  double persistence() const { return death - birth; }
};

struct PersistenceDiagram {
  std::vector<DiagramPoint> points;

  std::vector<DiagramPoint> finite_points(int dim) const {
    std::vector<DiagramPoint> out;
    for (const auto& p : points)
      if (p.dim == dim && !p.essential) out.push_back(p);
    return out;
  }
  std::vector<DiagramPoint> essential_points(int dim) const {
    std::vector<DiagramPoint> out;
    for (const auto& p : points)
      if (p.dim == dim && p.essential) out.push_back(p);
    return out;
  }
};

/// A creator/destroyer pair of the condensation pairing:
/// ({survivor}, {survivor, absorbed}) recorded at a condensation step.
struct PersistencePair {
  int survivor = 0;
  int absorbed = 0;
  int step = 0;
};

struct PersistencePairing {
  std::vector<PersistencePair> pairs;
};

struct DendrogramMerge {
  double height = 0.0;
  int left = 0;   // refs < leaf_count are leaves, otherwise leaf_count + merge index
  int right = 0;
  int size = 0;   // leaves below the new cluster
  double distance = 0.0;  // auxiliary: achieved linkage value where applicable
};

struct Dendrogram {
  int leaf_count = 0;
  std::vector<int> leaf_ids;  // leaf ref k corresponds to leaf_ids[k]
  std::vector<DendrogramMerge> merges;
};

struct CondensationHomology {
  PersistenceDiagram diagram;
  PersistencePairing pairing;
};

namespace detail {

class UnionFind {
public:
  explicit UnionFind(int n) : parent_(static_cast<size_t>(n)), size_(static_cast<size_t>(n), 1) {
    for (int i = 0; i < n; ++i) parent_[static_cast<size_t>(i)] = i;
  }
  int find(int v) {
    while (parent_[static_cast<size_t>(v)] != v) {
      parent_[static_cast<size_t>(v)] = parent_[static_cast<size_t>(parent_[static_cast<size_t>(v)])];
      v = parent_[static_cast<size_t>(v)];
    }
    return v;
  }
  // Merges b's class into a's; caller decides orientation.
  void unite(int a, int b) {
    size_[static_cast<size_t>(a)] += size_[static_cast<size_t>(b)];
    parent_[static_cast<size_t>(b)] = a;
  }
  int size(int root) const { return size_[static_cast<size_t>(root)]; }

private:
  std::vector<int> parent_;
  std::vector<int> size_;
};

}  // namespace detail

/// Degree-0 persistent homology of the condensation filtration: a pair of
/// points joins the filtration at the first step where their distance drops
/// to zeta or below (edges persist once present). Each class merge emits a
/// bar (0, t) with the lower-id class surviving; classes alive at the end
/// emit (0, T) flagged essential.
///
/// zeta defaults to the trace's merge radius; a zero radius degenerates to
/// coincidence detection at 1e-12, matching how merged duplicates behave.
inline CondensationHomology condensation_homology(const CondensationTrace& trace,
                                                  std::optional<double> zeta = std::nullopt) {
  const double z = zeta.value_or(trace.zeta);
  if (z < 0.0) throw error(errc::bad_params, "zeta must be nonnegative");
  const double threshold = z > 0.0 ? z : 1e-12;

  // Union-find over the ids of the initial cloud; class identity is the
  // smallest id in the class.
  const std::vector<int>& initial_ids = trace.initial().ids;
  std::map<int, int> index_of_id;
  for (size_t i = 0; i < initial_ids.size(); ++i)
    index_of_id[initial_ids[i]] = static_cast<int>(i);
  const int n0 = static_cast<int>(initial_ids.size());
  detail::UnionFind uf(n0);
  std::vector<int> class_id(static_cast<size_t>(n0));
  for (int i = 0; i < n0; ++i) class_id[static_cast<size_t>(i)] = initial_ids[static_cast<size_t>(i)];

  CondensationHomology out;
  auto unite_ids = [&](int id_a, int id_b, int step) {
    const int ra = uf.find(index_of_id.at(id_a));
    const int rb = uf.find(index_of_id.at(id_b));
    if (ra == rb) return;
    const int id_ra = class_id[static_cast<size_t>(ra)];
    const int id_rb = class_id[static_cast<size_t>(rb)];
    const int survivor_root = id_ra < id_rb ? ra : rb;
    const int absorbed_root = id_ra < id_rb ? rb : ra;
    uf.unite(survivor_root, absorbed_root);
    out.diagram.points.push_back({0.0, static_cast<double>(step), 0, false});
    out.pairing.pairs.push_back({std::min(id_ra, id_rb), std::max(id_ra, id_rb), step});
  };

  size_t next_event = 0;
  for (int s = 0; s < static_cast<int>(trace.snapshots.size()); ++s) {
    // Engine merge events collapsed these rows at step s; replay them first.
    while (next_event < trace.merges.size() && trace.merges[next_event].step <= s) {
      const MergeEvent& e = trace.merges[next_event];
      unite_ids(e.survivor, e.absorbed, e.step);
      ++next_event;
    }
    const PointCloud& X = trace.snapshots[static_cast<size_t>(s)];
    for (Eigen::Index i = 0; i < X.size(); ++i)
      for (Eigen::Index j = i + 1; j < X.size(); ++j)
        if ((X.coords.row(i) - X.coords.row(j)).norm() <= threshold)
          unite_ids(X.ids[static_cast<size_t>(i)], X.ids[static_cast<size_t>(j)], s);
  }

  const int final_step = trace.steps();
  std::vector<bool> seen(static_cast<size_t>(n0), false);
  for (int i = 0; i < n0; ++i) {
    const int root = uf.find(i);
    if (!seen[static_cast<size_t>(root)]) {
      seen[static_cast<size_t>(root)] = true;
      out.diagram.points.push_back({0.0, static_cast<double>(final_step), 0, true});
    }
  }
  return out;
}

/// Builds the merge tree from a condensation pairing. Heights are the
/// condensation steps of the pairs; refs below the leaf count index leaves,
/// higher refs index earlier merges.
inline Dendrogram dendrogram_from_pairing(const PersistencePairing& pairing,
                                          std::vector<int> leaf_ids) {
  std::sort(leaf_ids.begin(), leaf_ids.end());
  Dendrogram out;
  out.leaf_count = static_cast<int>(leaf_ids.size());
  out.leaf_ids = leaf_ids;

  std::map<int, int> ref_of_id;    // id of a class -> its current cluster ref
  std::map<int, int> size_of_id;
  for (int k = 0; k < out.leaf_count; ++k) {
    ref_of_id[leaf_ids[static_cast<size_t>(k)]] = k;
    size_of_id[leaf_ids[static_cast<size_t>(k)]] = 1;
  }

  std::map<int, bool> absorbed;
  for (size_t k = 0; k < pairing.pairs.size(); ++k) {
    const PersistencePair& pair = pairing.pairs[k];
    if (!ref_of_id.count(pair.survivor) || !ref_of_id.count(pair.absorbed))
      throw error(errc::inconsistent_pairing, "pair references an unknown class");
    if (absorbed[pair.absorbed])
      throw error(errc::inconsistent_pairing, "class absorbed twice");
    absorbed[pair.absorbed] = true;

    DendrogramMerge merge;
    merge.height = static_cast<double>(pair.step);
    merge.left = ref_of_id.at(pair.survivor);
    merge.right = ref_of_id.at(pair.absorbed);
    merge.size = size_of_id.at(pair.survivor) + size_of_id.at(pair.absorbed);
    out.merges.push_back(merge);

    ref_of_id[pair.survivor] = out.leaf_count + static_cast<int>(k);
    size_of_id[pair.survivor] = merge.size;
    ref_of_id.erase(pair.absorbed);
  }
  return out;
}

namespace detail {

// Leaf sets below each merge, sorted; the unordered pair of child leaf sets
// is the comparison key for tree equality.
inline std::vector<std::pair<std::vector<int>, std::vector<int>>> merge_leaf_sets(
    const Dendrogram& d) {
  std::vector<std::vector<int>> below(d.merges.size());
  auto leaves_of_ref = [&](int ref) -> std::vector<int> {
    if (ref < d.leaf_count) return {d.leaf_ids[static_cast<size_t>(ref)]};
    return below[static_cast<size_t>(ref - d.leaf_count)];
  };
  std::vector<std::pair<std::vector<int>, std::vector<int>>> out;
  for (size_t k = 0; k < d.merges.size(); ++k) {
    std::vector<int> left = leaves_of_ref(d.merges[k].left);
    std::vector<int> right = leaves_of_ref(d.merges[k].right);
    std::sort(left.begin(), left.end());
    std::sort(right.begin(), right.end());
    if (right < left) std::swap(left, right);
    below[k] = left;
    below[k].insert(below[k].end(), right.begin(), right.end());
    std::sort(below[k].begin(), below[k].end());
    out.emplace_back(std::move(left), std::move(right));
  }
  return out;
}

}  // namespace detail

/// True iff the two dendrograms perform the same sequence of unordered
/// cluster-pair merges. Heights are ignored: condensation steps and linkage
/// distances live on different scales.
inline bool same_merge_tree(const Dendrogram& a, const Dendrogram& b) {
  std::vector<int> la = a.leaf_ids, lb = b.leaf_ids;
  std::sort(la.begin(), la.end());
  std::sort(lb.begin(), lb.end());
  if (la != lb) throw error(errc::leaf_mismatch, "dendrograms have different leaf sets");
  if (a.merges.size() != b.merges.size()) return false;
  return detail::merge_leaf_sets(a) == detail::merge_leaf_sets(b);
}

// ---------------------------------------------------------------------------
// Vietoris-Rips persistence
// ---------------------------------------------------------------------------

namespace detail {

struct Simplex {
  double weight;
  std::vector<int> vertices;  // sorted ascending
};

inline bool simplex_order(const Simplex& a, const Simplex& b) {
  if (a.weight != b.weight) return a.weight < b.weight;
  if (a.vertices.size() != b.vertices.size()) return a.vertices.size() < b.vertices.size();
  return a.vertices < b.vertices;
}

// Z_2 column reduction of the boundary of (d+1)-simplices against
// d-simplices, both given in filtration order. Returns for every column the
// pivot row it settled on, or -1 if the column reduced to zero.
inline std::vector<int> reduce_boundaries(const std::vector<std::vector<int>>& columns,
                                          int row_count) {
  std::vector<int> pivot_owner(static_cast<size_t>(row_count), -1);
  std::vector<std::vector<int>> reduced(columns.size());
  std::vector<int> lows(columns.size(), -1);
  std::vector<int> scratch;
  for (size_t j = 0; j < columns.size(); ++j) {
    std::vector<int> col = columns[j];  // sorted ascending
    while (!col.empty()) {
      const int low = col.back();
      const int owner = pivot_owner[static_cast<size_t>(low)];
      if (owner < 0) break;
      // col ^= reduced[owner]
      scratch.clear();
      std::set_symmetric_difference(col.begin(), col.end(), reduced[static_cast<size_t>(owner)].begin(),
                                    reduced[static_cast<size_t>(owner)].end(),
                                    std::back_inserter(scratch));
      col.swap(scratch);
    }
    if (!col.empty()) {
      lows[j] = col.back();
      pivot_owner[static_cast<size_t>(col.back())] = static_cast<int>(j);
    }
    reduced[j] = std::move(col);
  }
  return lows;
}

}  // namespace detail

/// Persistence diagram of the Vietoris-Rips filtration of X with simplex
/// weight = largest pairwise distance. Dimension 0 uses union-find over the
/// sorted edges; dimensions 1 and 2 use boundary-matrix column reduction in
/// filtration order with (weight, dimension, lexicographic vertices)
/// tie-breaking. Simplices above max_scale are excluded; classes alive at
/// max_scale are flagged essential with infinite death.
inline PersistenceDiagram vr_persistence(const PointCloud& X, int max_dim,
                                         double max_scale = kInfiniteDeath) {
  if (max_dim < 0 || max_dim > 2)
    throw error(errc::bad_params, "vr_persistence supports dimensions 0..2");
  const int n = static_cast<int>(X.size());
  if (max_dim >= 1 && n > 512)
    throw error(errc::too_large, "dimension >= 1 is capped at 512 points");

  const Matrix dist = pairwise_distances(X);
  PersistenceDiagram diagram;

  std::vector<detail::Simplex> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (dist(i, j) <= max_scale) edges.push_back({dist(i, j), {i, j}});
  std::sort(edges.begin(), edges.end(), detail::simplex_order);

  // Dimension 0: births at 0, deaths at the merging edge weights.
  detail::UnionFind uf(n);
  std::vector<char> edge_positive(edges.size(), 0);
  for (size_t e = 0; e < edges.size(); ++e) {
    const int a = uf.find(edges[e].vertices[0]);
    const int b = uf.find(edges[e].vertices[1]);
    if (a == b) {
      edge_positive[e] = 1;  // creates a cycle
      continue;
    }
    uf.unite(std::min(a, b), std::max(a, b));
    diagram.points.push_back({0.0, edges[e].weight, 0, false});
  }
  {
    std::vector<bool> seen(static_cast<size_t>(n), false);
    for (int i = 0; i < n; ++i) {
      const int root = uf.find(i);
      if (!seen[static_cast<size_t>(root)]) {
        seen[static_cast<size_t>(root)] = true;
        diagram.points.push_back({0.0, kInfiniteDeath, 0, true});
      }
    }
  }
  if (max_dim == 0) return diagram;

  std::vector<detail::Simplex> triangles;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (dist(i, j) > max_scale) continue;
      for (int k = j + 1; k < n; ++k) {
        const double w = std::max({dist(i, j), dist(i, k), dist(j, k)});
        if (w <= max_scale) triangles.push_back({w, {i, j, k}});
      }
    }
  const double simplex_guard = 5e6;
  if (static_cast<double>(edges.size()) + static_cast<double>(triangles.size()) > simplex_guard)
    throw error(errc::too_large, "simplex count exceeds the 5e6 guard");
  std::sort(triangles.begin(), triangles.end(), detail::simplex_order);

  std::map<std::pair<int, int>, int> edge_index;
  for (size_t e = 0; e < edges.size(); ++e)
    edge_index[{edges[e].vertices[0], edges[e].vertices[1]}] = static_cast<int>(e);

  std::vector<std::vector<int>> tri_columns(triangles.size());
  for (size_t t = 0; t < triangles.size(); ++t) {
    const auto& v = triangles[t].vertices;
    tri_columns[t] = {edge_index.at({v[0], v[1]}), edge_index.at({v[0], v[2]}),
                      edge_index.at({v[1], v[2]})};
    std::sort(tri_columns[t].begin(), tri_columns[t].end());
  }
  const std::vector<int> tri_lows = detail::reduce_boundaries(tri_columns, static_cast<int>(edges.size()));

  std::vector<char> edge_paired(edges.size(), 0);
  std::vector<char> triangle_positive(triangles.size(), 0);
  for (size_t t = 0; t < triangles.size(); ++t) {
    if (tri_lows[t] < 0) {
      triangle_positive[t] = 1;
      continue;
    }
    const int e = tri_lows[t];
    edge_paired[static_cast<size_t>(e)] = 1;
    if (edges[static_cast<size_t>(e)].weight < triangles[t].weight)
      diagram.points.push_back({edges[static_cast<size_t>(e)].weight, triangles[t].weight, 1, false});
  }
  for (size_t e = 0; e < edges.size(); ++e)
    if (edge_positive[e] && !edge_paired[e])
      diagram.points.push_back({edges[e].weight, kInfiniteDeath, 1, true});
  if (max_dim == 1) return diagram;

  // Dimension 2: tetrahedra destroy classes created by positive triangles.
  std::vector<detail::Simplex> tetrahedra;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (dist(i, j) > max_scale) continue;
      for (int k = j + 1; k < n; ++k) {
        const double w3 = std::max({dist(i, j), dist(i, k), dist(j, k)});
        if (w3 > max_scale) continue;
        for (int l = k + 1; l < n; ++l) {
          const double w =
              std::max({w3, dist(i, l), dist(j, l), dist(k, l)});
          if (w <= max_scale) tetrahedra.push_back({w, {i, j, k, l}});
        }
      }
    }
  if (static_cast<double>(edges.size()) + static_cast<double>(triangles.size()) +
          static_cast<double>(tetrahedra.size()) > simplex_guard)
    throw error(errc::too_large, "simplex count exceeds the 5e6 guard");
  std::sort(tetrahedra.begin(), tetrahedra.end(), detail::simplex_order);

  std::map<std::vector<int>, int> triangle_index;
  for (size_t t = 0; t < triangles.size(); ++t) triangle_index[triangles[t].vertices] = static_cast<int>(t);
  std::vector<std::vector<int>> tet_columns(tetrahedra.size());
  for (size_t q = 0; q < tetrahedra.size(); ++q) {
    const auto& v = tetrahedra[q].vertices;
    tet_columns[q] = {triangle_index.at({v[0], v[1], v[2]}), triangle_index.at({v[0], v[1], v[3]}),
                      triangle_index.at({v[0], v[2], v[3]}), triangle_index.at({v[1], v[2], v[3]})};
    std::sort(tet_columns[q].begin(), tet_columns[q].end());
  }
  const std::vector<int> tet_lows =
      detail::reduce_boundaries(tet_columns, static_cast<int>(triangles.size()));

  std::vector<char> triangle_paired(triangles.size(), 0);
  for (size_t q = 0; q < tetrahedra.size(); ++q) {
    if (tet_lows[q] < 0) continue;
    const int t = tet_lows[q];
    triangle_paired[static_cast<size_t>(t)] = 1;
    if (triangles[static_cast<size_t>(t)].weight < tetrahedra[q].weight)
      diagram.points.push_back(
          {triangles[static_cast<size_t>(t)].weight, tetrahedra[q].weight, 2, false});
  }
  for (size_t t = 0; t < triangles.size(); ++t)
    if (triangle_positive[t] && !triangle_paired[t])
      diagram.points.push_back({triangles[t].weight, kInfiniteDeath, 2, true});
  return diagram;
}

// ---------------------------------------------------------------------------
// Bottleneck distance
// ---------------------------------------------------------------------------

namespace detail {

inline double linf(const DiagramPoint& a, const DiagramPoint& b) {
  const double dd = (std::isinf(a.death) && std::isinf(b.death)) ? 0.0 : std::abs(a.death - b.death);
  return std::max(std::abs(a.birth - b.birth), dd);
}

inline double diagonal_cost(const DiagramPoint& p) { return (p.death - p.birth) / 2.0; }

// Hopcroft-Karp maximum matching on an implicit bipartite graph given by an
// adjacency callback.
class BipartiteMatcher {
public:
  BipartiteMatcher(int left, int right) : n_left_(left), n_right_(right) {}

  template <typename Adjacency>
  int max_matching(const Adjacency& adj) {
    match_left_.assign(static_cast<size_t>(n_left_), -1);
    match_right_.assign(static_cast<size_t>(n_right_), -1);
    int matched = 0;
    bool progress = true;
    while (progress) {
      progress = false;
      // BFS layering from free left vertices.
      std::vector<int> depth(static_cast<size_t>(n_left_), -1);
      std::vector<int> queue;
      for (int u = 0; u < n_left_; ++u)
        if (match_left_[static_cast<size_t>(u)] < 0) {
          depth[static_cast<size_t>(u)] = 0;
          queue.push_back(u);
        }
      bool reachable_free = false;
      for (size_t qi = 0; qi < queue.size(); ++qi) {
        const int u = queue[qi];
        for (int v = 0; v < n_right_; ++v) {
          if (!adj(u, v)) continue;
          const int w = match_right_[static_cast<size_t>(v)];
          if (w < 0)
            reachable_free = true;
          else if (depth[static_cast<size_t>(w)] < 0) {
            depth[static_cast<size_t>(w)] = depth[static_cast<size_t>(u)] + 1;
            queue.push_back(w);
          }
        }
      }
      if (!reachable_free) break;
      // DFS augmentation along the layering.
      std::vector<char> used(static_cast<size_t>(n_right_), 0);
      for (int u = 0; u < n_left_; ++u)
        if (match_left_[static_cast<size_t>(u)] < 0)
          if (augment(u, adj, depth, used)) {
            ++matched;
            progress = true;
          }
    }
    return matched;
  }

private:
  template <typename Adjacency>
  bool augment(int u, const Adjacency& adj, std::vector<int>& depth, std::vector<char>& used) {
    for (int v = 0; v < n_right_; ++v) {
      if (used[static_cast<size_t>(v)] || !adj(u, v)) continue;
      const int w = match_right_[static_cast<size_t>(v)];
      if (w >= 0 && depth[static_cast<size_t>(w)] != depth[static_cast<size_t>(u)] + 1) continue;
      used[static_cast<size_t>(v)] = 1;
      if (w < 0 || augment(w, adj, depth, used)) {
        match_left_[static_cast<size_t>(u)] = v;
        match_right_[static_cast<size_t>(v)] = u;
        return true;
      }
    }
    depth[static_cast<size_t>(u)] = -1;
    return false;
  }

  int n_left_, n_right_;
  std::vector<int> match_left_, match_right_;
};

// Perfect matching feasibility at threshold r for the diagonal-augmented
// bipartite graph: left = A + |B| interchangeable diagonal slots, right =
// B + |A| slots.
inline bool bottleneck_feasible(const std::vector<DiagramPoint>& A,
                                const std::vector<DiagramPoint>& B, double r) {
  const int na = static_cast<int>(A.size());
  const int nb = static_cast<int>(B.size());
  const int total = na + nb;
  const double slack = 1e-12;
  auto adj = [&](int u, int v) {
    const bool u_real = u < na, v_real = v < nb;
    if (u_real && v_real) return linf(A[static_cast<size_t>(u)], B[static_cast<size_t>(v)]) <= r + slack;
    if (u_real) return diagonal_cost(A[static_cast<size_t>(u)]) <= r + slack;
    if (v_real) return diagonal_cost(B[static_cast<size_t>(v)]) <= r + slack;
    return true;  // diagonal slot to diagonal slot is free
  };
  BipartiteMatcher matcher(total, total);
  return matcher.max_matching(adj) == total;
}

inline double bottleneck_finite(const std::vector<DiagramPoint>& A,
                                const std::vector<DiagramPoint>& B) {
  if (A.empty() && B.empty()) return 0.0;
  std::vector<double> candidates{0.0};
  for (const auto& a : A) candidates.push_back(diagonal_cost(a));
  for (const auto& b : B) candidates.push_back(diagonal_cost(b));
  for (const auto& a : A)
    for (const auto& b : B) candidates.push_back(linf(a, b));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  size_t lo = 0, hi = candidates.size() - 1;
  while (lo < hi) {
    const size_t mid = (lo + hi) / 2;
    if (bottleneck_feasible(A, B, candidates[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  return candidates[lo];
}

}  // namespace detail

/// Exact bottleneck distance between the dim-dimensional points of two
/// diagrams, computed by binary search over candidate values with a perfect
/// matching feasibility test. Essential points are excluded by default; when
/// included they may only match other essential points, and differing
/// essential counts are an error.
inline double bottleneck_distance(const PersistenceDiagram& D1, const PersistenceDiagram& D2,
                                  int dim, bool include_essential = false) {
  const double finite = detail::bottleneck_finite(D1.finite_points(dim), D2.finite_points(dim));
  if (!include_essential) return finite;

  std::vector<DiagramPoint> e1 = D1.essential_points(dim), e2 = D2.essential_points(dim);
  if (e1.size() != e2.size())
    throw error(errc::essential_mismatch, "diagrams carry different numbers of essential classes");
  if (e1.empty()) return finite;
  // Essential classes cannot use the diagonal; binary-search candidates and
  // require a perfect real-real matching.
  std::vector<double> candidates;
  for (const auto& a : e1)
    for (const auto& b : e2) candidates.push_back(detail::linf(a, b));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  const int n = static_cast<int>(e1.size());
  size_t lo = 0, hi = candidates.size() - 1;
  while (lo < hi) {
    const size_t mid = (lo + hi) / 2;
    const double r = candidates[mid];
    detail::BipartiteMatcher matcher(n, n);
    const bool ok = matcher.max_matching([&](int u, int v) {
                      return detail::linf(e1[static_cast<size_t>(u)], e2[static_cast<size_t>(v)]) <=
                             r + 1e-12;
                    }) == n;
    if (ok)
      hi = mid;
    else
      lo = mid + 1;
  }
  return std::max(finite, candidates[lo]);
}

/// Cumulative topological activity of a condensation diagram: at each step t
/// the total persistence of the finite bars that have died by t.
inline std::vector<std::pair<int, double>> topological_activity(const PersistenceDiagram& diagram) {
  int max_step = 0;
  for (const auto& p : diagram.points)
    if (std::isfinite(p.death)) max_step = std::max(max_step, static_cast<int>(p.death));
  std::vector<std::pair<int, double>> curve;
  curve.reserve(static_cast<size_t>(max_step) + 1);
  for (int t = 0; t <= max_step; ++t) {
    double total = 0.0;
    for (const auto& p : diagram.points)
      if (!p.essential && p.death <= t) total += p.persistence();
    curve.emplace_back(t, total);
  }
  return curve;
}

struct StabilityAuditRow {
  int step = 0;       // earlier snapshot
  int next_step = 0;  // later snapshot of the audited pair
  double bottleneck = 0.0;
  double hausdorff_bound = 0.0;  // 2 * d_H
  double diam_bound = 0.0;       // diam of the earlier snapshot
  bool ok = false;
};

/// Checks d_B <= 2 d_H <= diam along the non-increasing-diameter subsequence
/// of a trace, using dim-`dim` Vietoris-Rips diagrams of the snapshots.
inline std::vector<StabilityAuditRow> persistence_bound_audit(const CondensationTrace& trace,
                                                              int dim = 0, double tol = 1e-9) {
  std::vector<int> subsequence{0};
  for (int t = 1; t < static_cast<int>(trace.snapshots.size()); ++t)
    if (trace.diameters[static_cast<size_t>(t)] <=
        trace.diameters[static_cast<size_t>(subsequence.back())])
      subsequence.push_back(t);

  std::vector<StabilityAuditRow> rows;
  for (size_t k = 0; k + 1 < subsequence.size(); ++k) {
    const int s = subsequence[k];
    const int u = subsequence[k + 1];
    StabilityAuditRow row;
    row.step = s;
    row.next_step = u;
    const PersistenceDiagram ds = vr_persistence(trace.snapshots[static_cast<size_t>(s)], dim);
    const PersistenceDiagram du = vr_persistence(trace.snapshots[static_cast<size_t>(u)], dim);
    row.bottleneck = bottleneck_distance(ds, du, dim);
    row.hausdorff_bound = 2.0 * hausdorff_distance(trace.snapshots[static_cast<size_t>(s)],
                                                   trace.snapshots[static_cast<size_t>(u)]);
    row.diam_bound = trace.diameters[static_cast<size_t>(s)];
    row.ok = row.bottleneck <= row.hausdorff_bound + tol &&
             row.hausdorff_bound <= row.diam_bound + tol;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace condensation
