#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "etm/error.hpp"
#include "etm/gmodule.hpp"
#include "etm/group.hpp"

namespace etm {

struct VertexSpec {
  std::string name;
  ModulePtr module;
};

// A spaced tree: a finite tree with a module attached to every vertex, all
// sharing one group. Vertices are kept sorted by name; edges are stored with
// the lexicographically smaller endpoint first. Leaves are the vertices of
// degree one, every other vertex is internal and must carry a based module.
class SpacedTree {
 public:
  static SpacedTree make(GroupPtr group, std::vector<VertexSpec> vertices,
                         std::vector<std::pair<std::string, std::string>> edges) {
    SpacedTree t;
    t.group_ = std::move(group);
    std::sort(vertices.begin(), vertices.end(),
              [](const VertexSpec& a, const VertexSpec& b) { return a.name < b.name; });
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      if (vertices[i].name.empty()) fail_input("vertex names must be non-empty");
      if (i > 0 && vertices[i].name == vertices[i - 1].name)
        fail_input("duplicate vertex name '" + vertices[i].name + "'");
      if (!vertices[i].module)
        fail_input("vertex '" + vertices[i].name + "' has no module");
      if (vertices[i].module->group() != t.group_)
        fail_input("module of vertex '" + vertices[i].name +
                   "' belongs to a different group");
      t.names_.push_back(vertices[i].name);
      t.modules_.push_back(vertices[i].module);
    }
    for (auto& e : edges) {
      if (e.first == e.second)
        fail_input("self loop at vertex '" + e.first + "'");
      if (!t.has_vertex(e.first) || !t.has_vertex(e.second))
        fail_input("edge " + e.first + "-" + e.second + " uses an unknown vertex");
      if (e.second < e.first) std::swap(e.first, e.second);
    }
    std::sort(edges.begin(), edges.end());
    for (std::size_t i = 1; i < edges.size(); ++i)
      if (edges[i] == edges[i - 1])
        fail_input("duplicate edge " + edges[i].first + "-" + edges[i].second);
    t.edges_ = std::move(edges);
    return t;
  }

  const GroupPtr& group() const { return group_; }
  std::size_t vertex_count() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  bool has_vertex(const std::string& name) const {
    return std::binary_search(names_.begin(), names_.end(), name);
  }

  const ModulePtr& module(const std::string& name) const {
    auto it = std::lower_bound(names_.begin(), names_.end(), name);
    if (it == names_.end() || *it != name)
      fail_input("unknown vertex '" + name + "'");
    return modules_[static_cast<std::size_t>(it - names_.begin())];
  }

  const std::vector<std::pair<std::string, std::string>>& edges() const {
    return edges_;
  }

  bool has_edge(const std::string& a, const std::string& b) const {
    auto e = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    return std::binary_search(edges_.begin(), edges_.end(), e);
  }

  std::vector<std::string> neighbors(const std::string& name) const {
    std::vector<std::string> out;
    for (const auto& e : edges_) {
      if (e.first == name) out.push_back(e.second);
      if (e.second == name) out.push_back(e.first);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  std::size_t degree(const std::string& name) const {
    std::size_t d = 0;
    for (const auto& e : edges_)
      if (e.first == name || e.second == name) ++d;
    return d;
  }

  bool is_leaf(const std::string& name) const { return degree(name) == 1; }

  std::vector<std::string> leaf_names() const {
    std::vector<std::string> out;
    for (const std::string& n : names_)
      if (is_leaf(n)) out.push_back(n);
    return out;
  }

  std::vector<std::string> internal_names() const {
    std::vector<std::string> out;
    for (const std::string& n : names_)
      if (!is_leaf(n)) out.push_back(n);
    return out;
  }

  // Definitional violations, each naming the offending vertex or edge.
  // An empty result means the tree is valid.
  std::vector<std::string> diagnostics() const {
    std::vector<std::string> out;
    if (names_.size() < 2) out.push_back("a spaced tree needs at least two vertices");
    if (edges_.size() + 1 != names_.size() && names_.size() >= 2)
      out.push_back("edge count " + std::to_string(edges_.size()) +
                    " does not match a tree on " + std::to_string(names_.size()) +
                    " vertices");
    if (!names_.empty()) {
      std::vector<std::string> stack{names_[0]};
      std::map<std::string, bool> seen{{names_[0], true}};
      while (!stack.empty()) {
        std::string v = stack.back();
        stack.pop_back();
        for (const std::string& n : neighbors(v))
          if (!seen[n]) {
            seen[n] = true;
            stack.push_back(n);
          }
      }
      for (const std::string& n : names_)
        if (!seen[n]) {
          out.push_back("tree is not connected: vertex '" + n +
                        "' is unreachable from '" + names_[0] + "'");
          break;
        }
    }
    for (const std::string& n : names_)
      if (!is_leaf(n) && names_.size() >= 2 && !module(n)->based())
        out.push_back("internal vertex '" + n + "' is not based");
    return out;
  }

  void require_valid() const {
    std::vector<std::string> d = diagnostics();
    if (d.empty()) return;
    std::string msg;
    for (std::size_t i = 0; i < d.size(); ++i)
      msg += (i ? "; " : "") + d[i];
    fail_input(msg);
  }

  friend bool operator==(const SpacedTree& a, const SpacedTree& b) {
    if (a.group_ != b.group_ || a.names_ != b.names_ || !(a.edges_ == b.edges_))
      return false;
    for (std::size_t i = 0; i < a.modules_.size(); ++i) {
      if (a.modules_[i] == b.modules_[i]) continue;
      if (!(*a.modules_[i] == *b.modules_[i])) return false;
    }
    return true;
  }

 private:
  GroupPtr group_;
  std::vector<std::string> names_;
  std::vector<ModulePtr> modules_;
  std::vector<std::pair<std::string, std::string>> edges_;
};

// A star together with its designated centre.
struct Star {
  SpacedTree tree;
  std::string centre;

  std::size_t leaf_count() const { return tree.vertex_count() - 1; }
};

// The product of the leaf modules in the global leaf order (lexicographic by
// leaf name).
inline ModulePtr leaf_space(const SpacedTree& t) {
  std::vector<ModulePtr> mods;
  for (const std::string& n : t.leaf_names()) mods.push_back(t.module(n));
  return tensor_product(mods);
}

// One branch per neighbour of q: the component of T - q containing that
// neighbour, with q and the connecting edge added back, so q is a leaf of
// every branch. Branches are listed by neighbour name.
inline std::vector<SpacedTree> branches_at(const SpacedTree& t,
                                           const std::string& q) {
  if (t.is_leaf(q)) fail_input("cannot take branches at leaf '" + q + "'");
  std::vector<SpacedTree> out;
  for (const std::string& p : t.neighbors(q)) {
    // Collect the component of p in T - q.
    std::vector<std::string> stack{p};
    std::map<std::string, bool> seen{{q, true}, {p, true}};
    std::vector<VertexSpec> verts{{q, t.module(q)}, {p, t.module(p)}};
    std::vector<std::pair<std::string, std::string>> edges{
        q < p ? std::make_pair(q, p) : std::make_pair(p, q)};
    while (!stack.empty()) {
      std::string v = stack.back();
      stack.pop_back();
      for (const std::string& n : t.neighbors(v)) {
        if (seen.count(n) && seen[n]) {
          continue;
        }
        seen[n] = true;
        verts.push_back({n, t.module(n)});
        edges.emplace_back(v < n ? std::make_pair(v, n) : std::make_pair(n, v));
        stack.push_back(n);
      }
    }
    out.push_back(SpacedTree::make(t.group(), std::move(verts), std::move(edges)));
  }
  return out;
}

// Glues trees along a common leaf q. All inputs must contain q as a leaf
// with the same module; the remaining vertex names must be disjoint.
inline SpacedTree glue(const std::vector<SpacedTree>& trees, const std::string& q) {
  if (trees.empty()) fail_input("glue needs at least one tree");
  std::vector<VertexSpec> verts{{q, trees[0].module(q)}};
  std::vector<std::pair<std::string, std::string>> edges;
  std::map<std::string, bool> taken{{q, true}};
  for (const SpacedTree& t : trees) {
    if (t.group() != trees[0].group())
      fail_input("glue needs trees over the same group");
    if (!t.has_vertex(q) || !t.is_leaf(q))
      fail_input("glue vertex '" + q + "' must be a leaf of every tree");
    if (!(*t.module(q) == *trees[0].module(q)))
      fail_input("glue vertex '" + q + "' carries different modules");
    for (const std::string& n : t.names()) {
      if (n == q) continue;
      if (taken.count(n))
        fail_input("vertex name '" + n + "' appears in more than one glued tree");
      taken[n] = true;
      verts.push_back({n, t.module(n)});
    }
    for (const auto& e : t.edges()) edges.push_back(e);
  }
  return SpacedTree::make(trees[0].group(), std::move(verts), std::move(edges));
}

namespace detail {

// Components of T - q, each reduced to its sorted list of original leaves.
inline std::vector<std::vector<std::string>> leaf_classes(const SpacedTree& t,
                                                          const std::string& q) {
  std::vector<std::vector<std::string>> classes;
  std::map<std::string, bool> seen{{q, true}};
  for (const std::string& start : t.neighbors(q)) {
    if (seen.count(start)) continue;
    std::vector<std::string> stack{start}, members;
    seen[start] = true;
    while (!stack.empty()) {
      std::string v = stack.back();
      stack.pop_back();
      if (t.is_leaf(v)) members.push_back(v);
      for (const std::string& n : t.neighbors(v)) {
        if (seen.count(n)) continue;
        seen[n] = true;
        stack.push_back(n);
      }
    }
    std::sort(members.begin(), members.end());
    classes.push_back(std::move(members));
  }
  return classes;
}

inline std::string class_name(const std::vector<std::string>& members) {
  std::string name;
  for (std::size_t i = 0; i < members.size(); ++i)
    name += (i ? "+" : "") + members[i];
  return name;
}

}  // namespace detail

// The flattening of T at q: a star with centre q whose leaves are the
// connected components of T - q, each carrying the tensor product of the
// member leaf modules. Multi-member classes are named by joining the member
// names with '+'.
inline Star flatten_at(const SpacedTree& t, const std::string& q) {
  std::vector<VertexSpec> verts{{q, t.module(q)}};
  std::vector<std::pair<std::string, std::string>> edges;
  for (const auto& members : detail::leaf_classes(t, q)) {
    if (members.empty()) fail_internal("leaf class without leaves");
    std::string name = detail::class_name(members);
    if (name != q && t.has_vertex(name) && members.size() > 1)
      fail_input("flattening class name '" + name + "' collides with a vertex");
    std::vector<ModulePtr> mods;
    for (const std::string& m : members) mods.push_back(t.module(m));
    verts.push_back({name, mods.size() == 1 ? mods[0] : tensor_product(mods)});
    edges.emplace_back(q < name ? std::make_pair(q, name) : std::make_pair(name, q));
  }
  return Star{SpacedTree::make(t.group(), std::move(verts), std::move(edges)), q};
}

namespace detail {

inline std::string fresh_name(const SpacedTree& t, const std::string& base) {
  if (!t.has_vertex(base)) return base;
  for (std::size_t k = 2;; ++k) {
    std::string name = base + "_" + std::to_string(k);
    if (!t.has_vertex(name)) return name;
  }
}

}  // namespace detail

// Subdivides the edge p-r into the path p-q1-q2-r where q1 carries the
// module of r and q2 the module of p. Both endpoints must be based, so the
// two new internal vertices are based as well. Returns the new tree and the
// generated vertex names.
struct ValencyTwoInsertion {
  SpacedTree tree;
  std::string q1, q2;
};

inline ValencyTwoInsertion insert_valency2(const SpacedTree& t,
                                           const std::string& p,
                                           const std::string& r) {
  if (!t.has_edge(p, r)) fail_input("edge " + p + "-" + r + " is not in the tree");
  if (!t.module(p)->based() || !t.module(r)->based())
    fail_input("valency-two insertion needs based endpoints on edge " + p + "-" + r);
  std::string q1 = detail::fresh_name(t, "q1");
  std::string q2 = detail::fresh_name(t, "q2");
  if (q1 == q2) fail_internal("generated vertex names collide");
  std::vector<VertexSpec> verts{{q1, t.module(r)}, {q2, t.module(p)}};
  for (const std::string& n : t.names()) verts.push_back({n, t.module(n)});
  std::vector<std::pair<std::string, std::string>> edges;
  for (const auto& e : t.edges()) {
    if ((e.first == p && e.second == r) || (e.first == r && e.second == p)) continue;
    edges.push_back(e);
  }
  auto norm = [](std::string a, std::string b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  };
  edges.push_back(norm(p, q1));
  edges.push_back(norm(q1, q2));
  edges.push_back(norm(q2, r));
  return {SpacedTree::make(t.group(), std::move(verts), std::move(edges)), q1, q2};
}

// One substar per vertex: the vertex and its neighbours with the connecting
// edges. Substars with at least three leaves are the ones that need star
// ideals as input.
inline std::vector<Star> substars(const SpacedTree& t) {
  if (t.vertex_count() <= 2)
    fail_input("substars need a tree with more than two vertices");
  std::vector<Star> out;
  for (const std::string& v : t.names()) {
    std::vector<VertexSpec> verts{{v, t.module(v)}};
    std::vector<std::pair<std::string, std::string>> edges;
    for (const std::string& n : t.neighbors(v)) {
      verts.push_back({n, t.module(n)});
      edges.emplace_back(v < n ? std::make_pair(v, n) : std::make_pair(n, v));
    }
    out.push_back(Star{SpacedTree::make(t.group(), std::move(verts), std::move(edges)), v});
  }
  return out;
}

// Attaches a new leaf r' (the root extension) to the internal vertex r,
// carrying the same module as r. Returns the new tree and the leaf name.
struct RootExtension {
  SpacedTree tree;
  std::string leaf;
};

inline RootExtension root_extend(const SpacedTree& t, const std::string& r) {
  if (t.is_leaf(r)) fail_input("root extension needs an internal vertex, '" + r + "' is a leaf");
  std::string name = r + "'";
  while (t.has_vertex(name)) name += "'";
  std::vector<VertexSpec> verts{{name, t.module(r)}};
  for (const std::string& n : t.names()) verts.push_back({n, t.module(n)});
  std::vector<std::pair<std::string, std::string>> edges = t.edges();
  edges.emplace_back(r < name ? std::make_pair(r, name) : std::make_pair(name, r));
  return {SpacedTree::make(t.group(), std::move(verts), std::move(edges)), name};
}

}  // namespace etm
