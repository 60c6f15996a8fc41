#pragma once

// Shared model trees used across the test suites.

#include <string>
#include <vector>

#include "etm/gmodule.hpp"
#include "etm/group.hpp"
#include "etm/tree.hpp"

namespace fixtures {

using namespace etm;

inline GroupPtr z2() {
  return make_group({"0", "1"}, std::vector<std::string>{"(0 1)"});
}

inline ModulePtr regular(const GroupPtr& g) {
  return share(GModule::regular_module(g));
}

// The group permuting its own label alphabet.
inline ModulePtr natural(const GroupPtr& g) {
  return share(GModule::permutation_module(g, g->labels(), g->generators()));
}

// Star with one module everywhere.
inline SpacedTree star(const GroupPtr& g, const ModulePtr& mod,
                       const std::string& centre,
                       const std::vector<std::string>& leaves) {
  std::vector<VertexSpec> verts{{centre, mod}};
  std::vector<std::pair<std::string, std::string>> edges;
  for (const std::string& l : leaves) {
    verts.push_back({l, mod});
    edges.emplace_back(centre < l ? std::make_pair(centre, l)
                                  : std::make_pair(l, centre));
  }
  return SpacedTree::make(g, std::move(verts), std::move(edges));
}

// Two four-leaf stars glued along the leaf "4": leaves 1,2,3,5,6,7 and
// centres c1, c2, every vertex carrying the regular module.
inline SpacedTree glued_six_leaves(const GroupPtr& g, const ModulePtr& mod) {
  SpacedTree left = star(g, mod, "c1", {"1", "2", "3", "4"});
  SpacedTree right = star(g, mod, "c2", {"4", "5", "6", "7"});
  return glue({left, right}, "4");
}

inline GroupPtr dna_symmetric() {
  return make_group({"A", "C", "G", "T"},
                    std::vector<std::string>{"(A C)", "(A C G T)"});
}

inline GroupPtr dna_kimura80() {
  return make_group({"A", "C", "G", "T"},
                    std::vector<std::string>{"(A C G T)", "(A G)"});
}

inline GroupPtr dna_kimura81() {
  return make_group({"A", "C", "G", "T"},
                    std::vector<std::string>{"(A C)(G T)", "(A G)(C T)"});
}

inline GroupPtr dna_strand_symmetric() {
  return make_group({"A", "C", "G", "T"},
                    std::vector<std::string>{"(A G)", "(C T)"});
}

}  // namespace fixtures
