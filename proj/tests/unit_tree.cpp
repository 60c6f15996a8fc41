#include <catch2/catch_amalgamated.hpp>

#include "etm/tree.hpp"
#include "fixtures.hpp"

using namespace etm;
using fixtures::glued_six_leaves;
using fixtures::natural;
using fixtures::regular;
using fixtures::star;
using fixtures::z2;

TEST_CASE("tree validation", "[tree]") {
  GroupPtr g = z2();
  ModulePtr kg = regular(g);

  SpacedTree edge = SpacedTree::make(g, {{"p", kg}, {"q", kg}}, {{"p", "q"}});
  CHECK(edge.diagnostics().empty());
  CHECK_NOTHROW(edge.require_valid());
  CHECK(edge.leaf_names() == std::vector<std::string>{"p", "q"});
  CHECK(edge.internal_names().empty());

  SpacedTree forest = SpacedTree::make(
      g, {{"a", kg}, {"b", kg}, {"c", kg}, {"d", kg}}, {{"a", "b"}, {"c", "d"}});
  auto diags = forest.diagnostics();
  REQUIRE_FALSE(diags.empty());
  bool connectivity = false;
  for (const std::string& d : diags)
    if (d.find("not connected") != std::string::npos) connectivity = true;
  CHECK(connectivity);
  CHECK_THROWS_AS(forest.require_valid(), error);

  // An internal vertex with a non-based module.
  Mat swap(2, 2);
  swap(0, 1) = Scalar(1);
  swap(1, 0) = Scalar(1);
  ModulePtr loose = share(GModule::matrix_module(g, {"u", "v"}, {swap}, Mat::identity(2)));
  SpacedTree bad = SpacedTree::make(
      g, {{"c", loose}, {"x", kg}, {"y", kg}}, {{"c", "x"}, {"c", "y"}});
  bool based_issue = false;
  for (const std::string& d : bad.diagnostics())
    if (d.find("'c' is not based") != std::string::npos) based_issue = true;
  CHECK(based_issue);

  CHECK_THROWS_AS(SpacedTree::make(g, {{"p", kg}, {"p", kg}}, {}), error);
  CHECK_THROWS_AS(SpacedTree::make(g, {{"p", kg}}, {{"p", "z"}}), error);
  CHECK_THROWS_AS(SpacedTree::make(g, {{"p", kg}}, {{"p", "p"}}), error);
}

TEST_CASE("branches at a vertex", "[tree]") {
  GroupPtr g = z2();
  ModulePtr kg = regular(g);

  SpacedTree four = star(g, kg, "c", {"1", "2", "3", "4"});
  auto parts = branches_at(four, "c");
  REQUIRE(parts.size() == 4);
  for (const SpacedTree& b : parts) {
    CHECK(b.vertex_count() == 2);
    CHECK(b.has_vertex("c"));
    CHECK(b.is_leaf("c"));
  }

  SpacedTree glued = glued_six_leaves(g, kg);
  auto halves = branches_at(glued, "4");
  REQUIRE(halves.size() == 2);
  CHECK(halves[0].vertex_count() == 5);
  CHECK(halves[1].vertex_count() == 5);
  CHECK(halves[0].has_vertex("c1"));
  CHECK(halves[1].has_vertex("c2"));
  CHECK(halves[0].leaf_names() == std::vector<std::string>{"1", "2", "3", "4"});
  CHECK(halves[1].leaf_names() == std::vector<std::string>{"4", "5", "6", "7"});

  SpacedTree path = SpacedTree::make(
      g, {{"p", kg}, {"q", kg}, {"r", kg}}, {{"p", "q"}, {"q", "r"}});
  auto two = branches_at(path, "q");
  REQUIRE(two.size() == 2);
  CHECK(two[0].vertex_count() == 2);
  CHECK(two[1].vertex_count() == 2);

  CHECK_THROWS_AS(branches_at(path, "p"), error);

  std::size_t edge_total = 0;
  for (const SpacedTree& b : halves) edge_total += b.edges().size();
  CHECK(edge_total == glued.edges().size());
  for (const auto& e : halves[0].edges())
    for (const auto& f : halves[1].edges()) CHECK(e != f);
}

TEST_CASE("gluing trees", "[tree]") {
  GroupPtr g = z2();
  ModulePtr kg = regular(g);

  SpacedTree e1 = SpacedTree::make(g, {{"p", kg}, {"q", kg}}, {{"p", "q"}});
  SpacedTree e2 = SpacedTree::make(g, {{"q", kg}, {"r", kg}}, {{"q", "r"}});
  SpacedTree path = glue({e1, e2}, "q");
  CHECK(path.vertex_count() == 3);
  CHECK(path.internal_names() == std::vector<std::string>{"q"});

  SpacedTree left = star(g, kg, "c1", {"1", "2", "3", "4"});
  SpacedTree right = star(g, kg, "c2", {"4", "5", "6", "7"});
  SpacedTree glued = glue({left, right}, "4");
  CHECK(glued.vertex_count() == 9);
  CHECK(glued.leaf_names() ==
        std::vector<std::string>{"1", "2", "3", "5", "6", "7"});
  CHECK(glued.internal_names() == std::vector<std::string>{"4", "c1", "c2"});
  CHECK(glued == glued_six_leaves(g, kg));

  CHECK(glue({left}, "4") == left);

  // Round trip through branches.
  auto halves = branches_at(glued, "4");
  CHECK(glue(halves, "4") == glued);
  auto center_parts = branches_at(glued, "c1");
  CHECK(glue(center_parts, "c1") == glued);

  CHECK_THROWS_AS(glue({left, left}, "4"), error);
  SpacedTree wrong_mod = SpacedTree::make(
      g, {{"4", share(GModule::permutation_module(g, {"a", "b"},
                                                  {parse_cycles({"a", "b"}, "(a b)")}))},
          {"z", kg}},
      {{"4", "z"}});
  CHECK_THROWS_AS(glue({left, wrong_mod}, "4"), error);
}

TEST_CASE("flattenings", "[tree]") {
  GroupPtr g = z2();
  ModulePtr kg = regular(g);

  SpacedTree four = star(g, kg, "c", {"1", "2", "3", "4"});
  Star flat = flatten_at(four, "c");
  CHECK(flat.centre == "c");
  CHECK(flat.tree == four);

  SpacedTree glued = glued_six_leaves(g, kg);
  Star left = flatten_at(glued, "c1");
  CHECK(left.leaf_count() == 4);
  CHECK(left.tree.has_vertex("1"));
  CHECK(left.tree.has_vertex("2"));
  CHECK(left.tree.has_vertex("3"));
  CHECK(left.tree.has_vertex("5+6+7"));
  CHECK(left.tree.module("5+6+7")->dim() == 8);
  CHECK(left.tree.module("5+6+7")->based());

  // Flattening preserves the total leaf-space dimension.
  CHECK(leaf_space(left.tree)->dim() == leaf_space(glued)->dim());
  Star middle = flatten_at(glued, "4");
  CHECK(middle.leaf_count() == 2);
  CHECK(middle.tree.has_vertex("1+2+3"));
  CHECK(middle.tree.has_vertex("5+6+7"));
  CHECK(leaf_space(middle.tree)->dim() == 64);

  SpacedTree edge = SpacedTree::make(g, {{"p", kg}, {"q", kg}}, {{"p", "q"}});
  Star same = flatten_at(edge, "q");
  CHECK(same.tree == edge);
  CHECK(flatten_at(edge, "p").tree == edge);
}

TEST_CASE("valency-two insertion", "[tree]") {
  GroupPtr g = z2();
  ModulePtr kg = regular(g);

  // The glued tree with the shared leaf removed: centres joined directly.
  SpacedTree joined = SpacedTree::make(
      g,
      {{"1", kg}, {"2", kg}, {"3", kg}, {"5", kg}, {"6", kg}, {"7", kg},
       {"c1", kg}, {"c2", kg}},
      {{"c1", "1"}, {"c1", "2"}, {"c1", "3"},
       {"c2", "5"}, {"c2", "6"}, {"c2", "7"}, {"c1", "c2"}});
  auto ins = insert_valency2(joined, "c1", "c2");
  CHECK(ins.q1 == "q1");
  CHECK(ins.q2 == "q2");
  CHECK(ins.tree.vertex_count() == 10);
  CHECK(ins.tree.has_edge("c1", "q1"));
  CHECK(ins.tree.has_edge("q1", "q2"));
  CHECK(ins.tree.has_edge("q2", "c2"));
  CHECK_FALSE(ins.tree.has_edge("c1", "c2"));
  CHECK(ins.tree.module("q1") == joined.module("c2"));
  CHECK(ins.tree.module("q2") == joined.module("c1"));
  CHECK(ins.tree.diagnostics().empty());

  auto count_big = [](const SpacedTree& t) {
    std::size_t n = 0;
    for (const Star& s : substars(t))
      if (s.leaf_count() >= 3) ++n;
    return n;
  };
  CHECK(count_big(ins.tree) == count_big(joined));

  // Splitting at q1 leaves strictly fewer big substars on each side.
  auto parts = branches_at(ins.tree, "q1");
  REQUIRE(parts.size() == 2);
  for (const SpacedTree& p : parts) CHECK(count_big(p) < count_big(joined));

  CHECK_THROWS_AS(insert_valency2(joined, "1", "2"), error);
}

TEST_CASE("substars", "[tree]") {
  GroupPtr g = z2();
  ModulePtr kg = regular(g);

  SpacedTree four = star(g, kg, "c", {"1", "2", "3", "4"});
  auto subs = substars(four);
  REQUIRE(subs.size() == 5);
  std::size_t big = 0;
  for (const Star& s : subs)
    if (s.leaf_count() >= 3) ++big;
  CHECK(big == 1);

  SpacedTree glued = glued_six_leaves(g, kg);
  auto gsubs = substars(glued);
  REQUIRE(gsubs.size() == 9);
  big = 0;
  for (const Star& s : gsubs)
    if (s.leaf_count() >= 3) {
      ++big;
      CHECK((s.centre == "c1" || s.centre == "c2"));
    }
  CHECK(big == 2);

  SpacedTree path = SpacedTree::make(
      g, {{"p", kg}, {"q", kg}, {"r", kg}}, {{"p", "q"}, {"q", "r"}});
  auto psubs = substars(path);
  REQUIRE(psubs.size() == 3);
  CHECK(psubs[1].centre == "q");
  CHECK(psubs[1].tree == path);

  SpacedTree edge = SpacedTree::make(g, {{"p", kg}, {"q", kg}}, {{"p", "q"}});
  CHECK_THROWS_AS(substars(edge), error);
}

TEST_CASE("root extension", "[tree]") {
  GroupPtr g = z2();
  ModulePtr kg = regular(g);

  SpacedTree three = star(g, kg, "c", {"1", "2", "3"});
  auto ext = root_extend(three, "c");
  CHECK(ext.leaf == "c'");
  CHECK(ext.tree.vertex_count() == 5);
  CHECK(ext.tree.leaf_names().size() == 4);
  CHECK(ext.tree.module("c'") == three.module("c"));
  CHECK(ext.tree.has_edge("c", "c'"));
  CHECK(ext.tree.diagnostics().empty());

  CHECK_THROWS_AS(root_extend(three, "1"), error);

  // Name collisions pick up additional primes.
  SpacedTree odd = SpacedTree::make(
      g, {{"c", kg}, {"c'", kg}, {"x", kg}}, {{"c", "c'"}, {"c", "x"}});
  auto ext2 = root_extend(odd, "c");
  CHECK(ext2.leaf == "c''");
}
