// SPDX-License-Identifier: MIT
// Directed and undirected multigraphs, edge orientation, and the
// d-separation / p-separation decision procedures.
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "caten/errors.hpp"

namespace caten {

struct CyclicGraph : Error {
  explicit CyclicGraph(const std::string& what) : Error(what) {}
};

struct NonDisjointSets : Error {
  explicit NonDisjointSets(const std::string& what) : Error(what) {}
};

struct TooManyEdges : Error {
  explicit TooManyEdges(const std::string& what) : Error(what) {}
};

// Ids starting with '~' are reserved for generated vertices/edges (teleport
// gadgets, self-loops); '!' joins an id pair; '\'', '*', '\x1f' are reserved
// separators elsewhere in the library.
namespace graph_detail {

inline void check_id_chars(const std::string& id, const char* what) {
  if (id.empty()) throw Error(std::string(what) + ": empty id");
  for (char c : id) {
    if (c == '\'' || c == '*' || c == '\x1f') {
      throw Error(std::string(what) + ": id \"" + id +
                  "\" contains a reserved character");
    }
  }
}

inline void check_user_id(const std::string& id, const char* what) {
  check_id_chars(id, what);
  if (id.front() == '~') {
    throw Error(std::string(what) + ": id \"" + id +
                "\" starts with the reserved prefix '~'");
  }
  if (id.find('!') != std::string::npos) {
    throw Error(std::string(what) + ": id \"" + id +
                "\" contains the reserved character '!'");
  }
}

}  // namespace graph_detail

// ---------------------------------------------------------------------------
// Undirected multigraph: parallel edges and self-loops are permitted, and
// edges are identified by id (not by endpoint pair).

struct UndirectedEdge {
  std::string id;
  std::string u;  // endpoints; {u, v} is unordered
  std::string v;
  int dim = 0;
};

class UndirectedMultigraph {
 public:
  UndirectedMultigraph(std::vector<std::string> vertices,
                       std::vector<UndirectedEdge> edges)
      : UndirectedMultigraph(std::move(vertices), std::move(edges), true) {}

  // Accepts generated ('~'-prefixed, '!'-bearing) ids; used when deriving a
  // skeleton from a directed graph that already contains generated ids.
  static UndirectedMultigraph with_generated_ids(
      std::vector<std::string> vertices, std::vector<UndirectedEdge> edges) {
    return UndirectedMultigraph(std::move(vertices), std::move(edges), false);
  }

  const std::vector<std::string>& vertices() const { return vertices_; }
  const std::vector<UndirectedEdge>& edges() const { return edges_; }

  bool has_vertex(const std::string& id) const {
    return std::find(vertices_.begin(), vertices_.end(), id) !=
           vertices_.end();
  }

  const UndirectedEdge& edge(const std::string& id) const {
    for (const UndirectedEdge& e : edges_) {
      if (e.id == id) return e;
    }
    throw Error("UndirectedMultigraph: unknown edge \"" + id + "\"");
  }

  // Edge ids incident to a vertex, in edge-list order (self-loops once).
  std::vector<std::string> incident_edges(const std::string& v) const {
    if (!has_vertex(v)) {
      throw Error("UndirectedMultigraph: unknown vertex \"" + v + "\"");
    }
    std::vector<std::string> out;
    for (const UndirectedEdge& e : edges_) {
      if (e.u == v || e.v == v) out.push_back(e.id);
    }
    return out;
  }

 private:
  UndirectedMultigraph(std::vector<std::string> vertices,
                       std::vector<UndirectedEdge> edges, bool user_ids)
      : vertices_(std::move(vertices)), edges_(std::move(edges)) {
    std::set<std::string> vseen;
    for (const std::string& v : vertices_) {
      if (user_ids) {
        graph_detail::check_user_id(v, "UndirectedMultigraph vertex");
      } else {
        graph_detail::check_id_chars(v, "UndirectedMultigraph vertex");
      }
      if (!vseen.insert(v).second) {
        throw Error("UndirectedMultigraph: duplicate vertex \"" + v + "\"");
      }
    }
    std::set<std::string> eseen;
    for (const UndirectedEdge& e : edges_) {
      if (user_ids) {
        graph_detail::check_user_id(e.id, "UndirectedMultigraph edge");
      } else {
        graph_detail::check_id_chars(e.id, "UndirectedMultigraph edge");
      }
      if (!eseen.insert(e.id).second) {
        throw Error("UndirectedMultigraph: duplicate edge \"" + e.id + "\"");
      }
      if (!vseen.count(e.u) || !vseen.count(e.v)) {
        throw Error("UndirectedMultigraph: edge \"" + e.id +
                    "\" has a dangling endpoint");
      }
      if (e.dim < 1) {
        throw Error("UndirectedMultigraph: edge \"" + e.id +
                    "\" must have dim >= 1");
      }
    }
  }

  std::vector<std::string> vertices_;
  std::vector<UndirectedEdge> edges_;
};

// ---------------------------------------------------------------------------
// Directed causal graph: vertices are observed (instrument-bearing) or
// unobserved (channel-bearing); self-loops and parallel edges are permitted,
// and acyclicity is a computed property.

enum class VertexKind { Observed, Unobserved };

struct DirectedVertex {
  std::string id;
  VertexKind kind = VertexKind::Unobserved;
};

struct DirectedEdge {
  std::string id;
  std::string from;
  std::string to;
  int dim = 0;
};

class DirectedCausalGraph {
 public:
  DirectedCausalGraph(std::vector<DirectedVertex> vertices,
                      std::vector<DirectedEdge> edges)
      : vertices_(std::move(vertices)), edges_(std::move(edges)) {
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
      graph_detail::check_id_chars(vertices_[i].id,
                                   "DirectedCausalGraph vertex");
      if (!vertex_index_.emplace(vertices_[i].id, i).second) {
        throw Error("DirectedCausalGraph: duplicate vertex \"" +
                    vertices_[i].id + "\"");
      }
    }
    in_edges_.resize(vertices_.size());
    out_edges_.resize(vertices_.size());
    std::set<std::string> eseen;
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      const DirectedEdge& e = edges_[i];
      graph_detail::check_id_chars(e.id, "DirectedCausalGraph edge");
      if (!eseen.insert(e.id).second) {
        throw Error("DirectedCausalGraph: duplicate edge \"" + e.id + "\"");
      }
      auto from = vertex_index_.find(e.from);
      auto to = vertex_index_.find(e.to);
      if (from == vertex_index_.end() || to == vertex_index_.end()) {
        throw Error("DirectedCausalGraph: edge \"" + e.id +
                    "\" has a dangling endpoint");
      }
      if (e.dim < 1) {
        throw Error("DirectedCausalGraph: edge \"" + e.id +
                    "\" must have dim >= 1");
      }
      out_edges_[from->second].push_back(i);
      in_edges_[to->second].push_back(i);
    }
  }

  const std::vector<DirectedVertex>& vertices() const { return vertices_; }
  const std::vector<DirectedEdge>& edges() const { return edges_; }

  bool has_vertex(const std::string& id) const {
    return vertex_index_.count(id) != 0;
  }

  std::size_t vertex_index(const std::string& id) const {
    auto it = vertex_index_.find(id);
    if (it == vertex_index_.end()) {
      throw Error("DirectedCausalGraph: unknown vertex \"" + id + "\"");
    }
    return it->second;
  }

  VertexKind kind(const std::string& id) const {
    return vertices_[vertex_index(id)].kind;
  }

  const DirectedEdge& edge(const std::string& id) const {
    for (const DirectedEdge& e : edges_) {
      if (e.id == id) return e;
    }
    throw Error("DirectedCausalGraph: unknown edge \"" + id + "\"");
  }

  // Indices into edges() of the edges entering / leaving a vertex.
  const std::vector<std::size_t>& in_edges(const std::string& v) const {
    return in_edges_[vertex_index(v)];
  }
  const std::vector<std::size_t>& out_edges(const std::string& v) const {
    return out_edges_[vertex_index(v)];
  }

  bool is_acyclic() const;

 private:
  std::vector<DirectedVertex> vertices_;
  std::vector<DirectedEdge> edges_;
  std::map<std::string, std::size_t> vertex_index_;
  std::vector<std::vector<std::size_t>> in_edges_;
  std::vector<std::vector<std::size_t>> out_edges_;
};

// Topological order of the vertex ids, or nullopt if the graph is cyclic.
// Kahn's algorithm; ties resolved by vertex-list order, so the result is
// deterministic.
inline std::optional<std::vector<std::string>> topological_order(
    const DirectedCausalGraph& g) {
  const std::size_t n = g.vertices().size();
  std::vector<std::size_t> indegree(n, 0);
  for (const DirectedEdge& e : g.edges()) {
    indegree[g.vertex_index(e.to)] += 1;
  }
  std::vector<std::string> order;
  std::vector<bool> emitted(n, false);
  order.reserve(n);
  for (std::size_t round = 0; round < n; ++round) {
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!emitted[i] && indegree[i] == 0) {
        pick = i;
        break;
      }
    }
    if (pick == n) return std::nullopt;  // remaining vertices all on cycles
    emitted[pick] = true;
    order.push_back(g.vertices()[pick].id);
    for (std::size_t ei : g.out_edges(g.vertices()[pick].id)) {
      indegree[g.vertex_index(g.edges()[ei].to)] -= 1;
    }
  }
  return order;
}

inline bool DirectedCausalGraph::is_acyclic() const {
  return topological_order(*this).has_value();
}

// ---------------------------------------------------------------------------
// Orientation: a direction string assigns one bit per undirected edge; bit 0
// orients the edge from its lexicographically smaller endpoint to the larger,
// bit 1 the reverse. All vertices of the result are unobserved.

struct DirectionString {
  std::map<std::string, int> bits;  // edge id -> 0 or 1
};

inline DirectedCausalGraph orient(const UndirectedMultigraph& g,
                                  const DirectionString& d) {
  for (const auto& [eid, bit] : d.bits) {
    bool known = false;
    for (const UndirectedEdge& e : g.edges()) known = known || e.id == eid;
    if (!known) throw Error("orient: direction for unknown edge \"" + eid + "\"");
    if (bit != 0 && bit != 1) {
      throw Error("orient: direction bit for edge \"" + eid +
                  "\" must be 0 or 1");
    }
  }
  std::vector<DirectedVertex> vertices;
  vertices.reserve(g.vertices().size());
  for (const std::string& v : g.vertices()) {
    vertices.push_back({v, VertexKind::Unobserved});
  }
  std::vector<DirectedEdge> edges;
  edges.reserve(g.edges().size());
  for (const UndirectedEdge& e : g.edges()) {
    auto it = d.bits.find(e.id);
    if (it == d.bits.end()) {
      throw Error("orient: missing direction for edge \"" + e.id + "\"");
    }
    const std::string& lo = std::min(e.u, e.v);
    const std::string& hi = std::max(e.u, e.v);
    if (it->second == 0) {
      edges.push_back({e.id, lo, hi, e.dim});
    } else {
      edges.push_back({e.id, hi, lo, e.dim});
    }
  }
  return DirectedCausalGraph(std::move(vertices), std::move(edges));
}

// Forget directions, keeping ids and dims. A 2-cycle becomes two parallel
// undirected edges, and a directed self-loop an undirected one.
inline UndirectedMultigraph undirected_skeleton(const DirectedCausalGraph& g) {
  std::vector<std::string> vertices;
  vertices.reserve(g.vertices().size());
  for (const DirectedVertex& v : g.vertices()) vertices.push_back(v.id);
  std::vector<UndirectedEdge> edges;
  edges.reserve(g.edges().size());
  for (const DirectedEdge& e : g.edges()) {
    edges.push_back({e.id, e.from, e.to, e.dim});
  }
  return UndirectedMultigraph::with_generated_ids(std::move(vertices),
                                                  std::move(edges));
}

// Add one directed self-loop (edge id "~loop!<vertex>") per marked vertex.
inline DirectedCausalGraph add_self_loops(const DirectedCausalGraph& g,
                                          const std::set<std::string>& marked,
                                          const std::map<std::string, int>& dims) {
  std::vector<DirectedEdge> edges = g.edges();
  for (const std::string& v : marked) {
    if (!g.has_vertex(v)) {
      throw Error("add_self_loops: unknown vertex \"" + v + "\"");
    }
    auto it = dims.find(v);
    if (it == dims.end()) {
      throw Error("add_self_loops: missing dim for vertex \"" + v + "\"");
    }
    edges.push_back({"~loop!" + v, v, v, it->second});
  }
  return DirectedCausalGraph(g.vertices(), std::move(edges));
}

// ---------------------------------------------------------------------------
// d-separation. A path is open when every interior collider is in Z or has a
// descendant in Z, and every interior chain/fork vertex is outside Z; the
// decision is computed by reachability over (vertex, entry-direction) states,
// which is equivalent to checking all paths on an acyclic graph.

namespace graph_detail {

// Z together with every vertex from which Z is reachable.
inline std::vector<bool> conditioned_or_ancestor(
    const DirectedCausalGraph& g, const std::set<std::string>& z) {
  const std::size_t n = g.vertices().size();
  std::vector<bool> mark(n, false);
  std::vector<std::size_t> stack;
  for (const std::string& v : z) {
    std::size_t i = g.vertex_index(v);
    if (!mark[i]) {
      mark[i] = true;
      stack.push_back(i);
    }
  }
  while (!stack.empty()) {
    std::size_t i = stack.back();
    stack.pop_back();
    for (std::size_t ei : g.in_edges(g.vertices()[i].id)) {
      std::size_t j = g.vertex_index(g.edges()[ei].from);
      if (!mark[j]) {
        mark[j] = true;
        stack.push_back(j);
      }
    }
  }
  return mark;
}

inline void check_query_sets(const DirectedCausalGraph& g,
                             const std::set<std::string>& v1,
                             const std::set<std::string>& v2,
                             const std::set<std::string>& v3,
                             const char* what) {
  if (v1.empty() || v2.empty()) {
    throw Error(std::string(what) + ": v1 and v2 must be nonempty");
  }
  for (const std::set<std::string>* s : {&v1, &v2, &v3}) {
    for (const std::string& v : *s) {
      if (!g.has_vertex(v)) {
        throw Error(std::string(what) + ": unknown vertex \"" + v + "\"");
      }
    }
  }
  for (const std::string& v : v1) {
    if (v2.count(v) || v3.count(v)) {
      throw NonDisjointSets(std::string(what) + ": vertex \"" + v +
                            "\" appears in more than one set");
    }
  }
  for (const std::string& v : v2) {
    if (v3.count(v)) {
      throw NonDisjointSets(std::string(what) + ": vertex \"" + v +
                            "\" appears in more than one set");
    }
  }
}

}  // namespace graph_detail

inline bool d_separated(const DirectedCausalGraph& g,
                        const std::set<std::string>& v1,
                        const std::set<std::string>& v2,
                        const std::set<std::string>& v3) {
  graph_detail::check_query_sets(g, v1, v2, v3, "d_separated");
  if (!g.is_acyclic()) {
    throw CyclicGraph("d_separated: graph is cyclic");
  }
  const std::size_t n = g.vertices().size();
  std::vector<bool> in_z(n, false);
  for (const std::string& v : v3) in_z[g.vertex_index(v)] = true;
  std::vector<bool> target(n, false);
  for (const std::string& v : v2) target[g.vertex_index(v)] = true;
  const std::vector<bool> collider_open =
      graph_detail::conditioned_or_ancestor(g, v3);

  // State: (vertex, entered-against-edge?). Entering along an edge that
  // points into the vertex is a head arrival (from a parent); entering
  // against an edge that points out of it is a tail arrival (from a child).
  enum { kHead = 0, kTail = 1 };
  std::vector<std::array<bool, 2>> seen(n, {false, false});
  std::vector<std::pair<std::size_t, int>> stack;
  auto visit = [&](std::size_t vertex, int mode) -> bool {
    if (target[vertex]) return true;  // open path reaches v2
    if (!seen[vertex][mode]) {
      seen[vertex][mode] = true;
      stack.emplace_back(vertex, mode);
    }
    return false;
  };

  // Departures from the endpoints in v1 are unconstrained.
  for (const std::string& s : v1) {
    for (std::size_t ei : g.out_edges(s)) {
      if (visit(g.vertex_index(g.edges()[ei].to), kHead)) return false;
    }
    for (std::size_t ei : g.in_edges(s)) {
      if (visit(g.vertex_index(g.edges()[ei].from), kTail)) return false;
    }
  }

  while (!stack.empty()) {
    auto [i, mode] = stack.back();
    stack.pop_back();
    const std::string& id = g.vertices()[i].id;
    // Forward over an out-edge: chain (head arrival) or fork (tail arrival);
    // open iff the vertex is unconditioned.
    if (!in_z[i]) {
      for (std::size_t ei : g.out_edges(id)) {
        if (visit(g.vertex_index(g.edges()[ei].to), kHead)) return false;
      }
    }
    // Backward over an in-edge: collider when entered from a parent (open
    // iff conditioned or with a conditioned descendant), chain otherwise.
    const bool backward_ok = (mode == kHead) ? collider_open[i] : !in_z[i];
    if (backward_ok) {
      for (std::size_t ei : g.in_edges(id)) {
        if (visit(g.vertex_index(g.edges()[ei].from), kTail)) return false;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Teleportation graphs: each member retains an acyclic subset of the edges
// and replaces every split edge e = (v, v') by the three-edge gadget
//   v -> t(e) <- r(e) -> v'
// with an observed post-selection vertex t(e) and an unobserved pre-selection
// vertex r(e). All three gadget edges carry the dim of the split edge.

struct TeleportMember {
  DirectedCausalGraph graph;
  std::vector<std::string> split_edges;     // edge ids replaced by gadgets
  std::vector<std::string> post_selection;  // "~t!<edge>" vertices, observed
  std::vector<std::string> pre_selection;   // "~r!<edge>" vertices, unobserved
};

namespace graph_detail {

inline bool retained_acyclic(const DirectedCausalGraph& g, std::uint64_t mask) {
  const std::size_t n = g.vertices().size();
  std::vector<std::size_t> indegree(n, 0);
  for (std::size_t i = 0; i < g.edges().size(); ++i) {
    if (mask & (std::uint64_t(1) << i)) {
      indegree[g.vertex_index(g.edges()[i].to)] += 1;
    }
  }
  std::vector<bool> emitted(n, false);
  for (std::size_t round = 0; round < n; ++round) {
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!emitted[i] && indegree[i] == 0) {
        pick = i;
        break;
      }
    }
    if (pick == n) return false;
    emitted[pick] = true;
    for (std::size_t ei : g.out_edges(g.vertices()[pick].id)) {
      if (mask & (std::uint64_t(1) << ei)) {
        indegree[g.vertex_index(g.edges()[ei].to)] -= 1;
      }
    }
  }
  return true;
}

inline TeleportMember member_from_mask(const DirectedCausalGraph& g,
                                       std::uint64_t mask) {
  std::vector<DirectedVertex> vertices = g.vertices();
  std::vector<DirectedEdge> edges;
  TeleportMember member{DirectedCausalGraph({}, {}), {}, {}, {}};
  for (std::size_t i = 0; i < g.edges().size(); ++i) {
    const DirectedEdge& e = g.edges()[i];
    if (mask & (std::uint64_t(1) << i)) {
      edges.push_back(e);
      continue;
    }
    const std::string t = "~t!" + e.id;
    const std::string r = "~r!" + e.id;
    vertices.push_back({t, VertexKind::Observed});
    vertices.push_back({r, VertexKind::Unobserved});
    edges.push_back({"~g0!" + e.id, e.from, t, e.dim});
    edges.push_back({"~g1!" + e.id, r, t, e.dim});
    edges.push_back({"~g2!" + e.id, r, e.to, e.dim});
    member.split_edges.push_back(e.id);
    member.post_selection.push_back(t);
    member.pre_selection.push_back(r);
  }
  member.graph = DirectedCausalGraph(std::move(vertices), std::move(edges));
  return member;
}

}  // namespace graph_detail

// The member that splits exactly the given edges. Errors when an edge id is
// unknown or the retained subgraph is cyclic.
inline TeleportMember teleport_member(const DirectedCausalGraph& g,
                                      const std::set<std::string>& split_edges) {
  if (g.edges().size() > 62) {
    throw Error("teleport_member: more than 62 edges");
  }
  std::uint64_t mask = 0;
  std::set<std::string> found;
  for (std::size_t i = 0; i < g.edges().size(); ++i) {
    if (split_edges.count(g.edges()[i].id)) {
      found.insert(g.edges()[i].id);
    } else {
      mask |= std::uint64_t(1) << i;
    }
  }
  for (const std::string& e : split_edges) {
    if (!found.count(e)) {
      throw Error("teleport_member: unknown edge \"" + e + "\"");
    }
  }
  if (!graph_detail::retained_acyclic(g, mask)) {
    throw CyclicGraph("teleport_member: retained subgraph is cyclic");
  }
  return graph_detail::member_from_mask(g, mask);
}

// Lazy, deterministic enumeration of the whole family: retained-edge masks
// descend from all-retained (the graph itself, when acyclic) to none-retained
// (the maximal teleportation graph), skipping cyclic retained subsets.
class TeleportFamily {
 public:
  explicit TeleportFamily(DirectedCausalGraph base) : base_(std::move(base)) {
    if (base_.edges().size() > 62) {
      throw Error("teleport_graphs: more than 62 edges");
    }
  }

  class iterator {
   public:
    using value_type = TeleportMember;
    using iterator_category = std::input_iterator_tag;
    using difference_type = std::ptrdiff_t;

    iterator() = default;
    iterator(const DirectedCausalGraph* base, std::uint64_t mask, bool done)
        : base_(base), mask_(mask), done_(done) {
      if (!done_) seek();
    }

    TeleportMember operator*() const {
      return graph_detail::member_from_mask(*base_, mask_);
    }
    iterator& operator++() {
      if (mask_ == 0) {
        done_ = true;
      } else {
        --mask_;
        seek();
      }
      return *this;
    }
    bool operator==(const iterator& o) const {
      return done_ == o.done_ && (done_ || mask_ == o.mask_);
    }
    bool operator!=(const iterator& o) const { return !(*this == o); }

   private:
    void seek() {
      while (!graph_detail::retained_acyclic(*base_, mask_)) {
        if (mask_ == 0) {
          done_ = true;
          return;
        }
        --mask_;
      }
    }

    const DirectedCausalGraph* base_ = nullptr;
    std::uint64_t mask_ = 0;
    bool done_ = true;
  };

  iterator begin() const {
    const std::size_t m = base_.edges().size();
    const std::uint64_t top =
        m == 0 ? 0 : (std::uint64_t(1) << m) - 1;
    return iterator(&base_, top, false);
  }
  iterator end() const { return iterator(); }

 private:
  DirectedCausalGraph base_;
};

inline TeleportFamily teleport_graphs(const DirectedCausalGraph& g) {
  return TeleportFamily(g);
}

// ---------------------------------------------------------------------------
// p-separation: v1 and v2 are p-separated given v3 iff some teleportation
// member d-separates them given v3 together with that member's post-selection
// vertices. The search is exhaustive over the family (complete by
// construction) with an early return on the first separating member.

inline bool p_separated(const DirectedCausalGraph& g,
                        const std::set<std::string>& v1,
                        const std::set<std::string>& v2,
                        const std::set<std::string>& v3) {
  graph_detail::check_query_sets(g, v1, v2, v3, "p_separated");
  for (const std::set<std::string>* s : {&v1, &v2, &v3}) {
    for (const std::string& v : *s) {
      if (!v.empty() && v.front() == '~') {
        throw Error("p_separated: query sets may not contain generated "
                    "vertices (\"" + v + "\")");
      }
    }
  }
  if (g.edges().size() > 16) {
    throw TooManyEdges(
        "p_separated: " + std::to_string(g.edges().size()) +
        " edges exceeds the 16-edge exhaustive enumeration limit");
  }
  for (const TeleportMember& member : teleport_graphs(g)) {
    std::set<std::string> z = v3;
    z.insert(member.post_selection.begin(), member.post_selection.end());
    if (d_separated(member.graph, v1, v2, z)) return true;
  }
  return false;
}

}  // namespace caten
