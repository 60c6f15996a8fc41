#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <string>
#include <vector>

#include "etm/coords.hpp"
#include "etm/irreps.hpp"
#include "etm/model.hpp"
#include "etm/tensor.hpp"
#include "fixtures.hpp"

using namespace etm;

namespace {

Mat random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  Mat m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = Scalar(rng.rational(9));
  return m;
}

LeafTensor vector_tensor(const std::string& slot, const std::vector<Scalar>& v) {
  LeafTensor x({{slot, static_cast<std::uint32_t>(v.size())}}, Scalar(0));
  for (std::uint32_t i = 0; i < v.size(); ++i) x.at({i}) = v[i];
  return x;
}

// Plain dual pairing of two equal-shape tensors under the product of the
// identity forms on the slots.
Scalar pair_tensors(const LeafTensor& a, const LeafTensor& b) {
  REQUIRE(a.slots() == b.slots());
  Scalar sum(0);
  for (std::size_t f = 0; f < a.size(); ++f)
    sum = sum + a.coords()[f] * b.coords()[f];
  return sum;
}

GroupPtr trivial_group() {
  return make_group({"id"}, std::vector<std::string>{});
}

// The weight-aligned edge tensor x*(s(x)s) + y*(t(x)t) of the two-state
// symmetric model, in group-basis coordinates.
LeafTensor two_state_edge(const std::string& p, const std::string& q,
                          const Scalar& x, const Scalar& y) {
  Mat m(2, 2);
  m(0, 0) = y + x;
  m(0, 1) = y - x;
  m(1, 0) = y - x;
  m(1, 1) = y + x;
  return hom_tensor(p, q, m);
}

}  // namespace

TEST_CASE("tensor slots and rearrangement", "[tensor]") {
  LeafTensor x({{"b", 3}, {"a", 2}}, Scalar(0));
  for (std::uint32_t i = 0; i < 3; ++i)
    for (std::uint32_t j = 0; j < 2; ++j) x.at({i, j}) = Scalar(int(10 * i + j));
  CHECK(x.rank() == 2);
  CHECK(x.size() == 6);
  CHECK_FALSE(x.slots_sorted());

  LeafTensor s = x.sorted();
  CHECK(s.slots_sorted());
  CHECK(s.slots()[0].name == "a");
  CHECK(s.at({1, 2}) == x.at({2, 1}));
  CHECK(s.sorted() == s);

  LeafTensor row = x.slice(0, 2);
  CHECK(row.rank() == 1);
  CHECK(row.at({1}) == Scalar(21));

  LeafTensor renamed = x.renamed("b", "z").sorted();
  CHECK(renamed.slots()[0].name == "a");
  CHECK(renamed.slots()[1].name == "z");
  CHECK(renamed.at({1, 2}) == x.at({2, 1}));
  CHECK_THROWS_AS(x.renamed("a", "b"), etm::error);

  CHECK(x.coordinate_sum() == Scalar(63));
  CHECK(x.sum_over_slot(0).at({1}) == Scalar(1 + 11 + 21));

  LeafTensor y({{"a", 2}, {"b", 3}}, Scalar(0));
  CHECK_THROWS_AS(x + y, etm::error);
  CHECK(x.sorted() + y == y + x.sorted());
  CHECK((x - x).is_zero());
  CHECK_THROWS_AS(outer(x, y), etm::error);

  Mat m(3, 3);
  m(0, 2) = Scalar(1);
  m(1, 1) = Scalar(1);
  m(2, 0) = Scalar(1);
  LeafTensor flipped = x.apply_to_slot(0, m);
  CHECK(flipped.at({0, 1}) == Scalar(21));
  CHECK(flipped.at({2, 0}) == Scalar(0));

  LeafTensor scaled = x.scale_slot(1, {Scalar(2), Scalar(-1)});
  CHECK(scaled.at({2, 0}) == Scalar(40));
  CHECK(scaled.at({2, 1}) == Scalar(-21));
}

TEST_CASE("star contraction composes and factors", "[tensor]") {
  Rng rng(7);

  SECTION("valency two is matrix composition") {
    Mat m = random_matrix(rng, 2, 3), n = random_matrix(rng, 3, 4);
    LeafTensor left = hom_tensor("p", "q", m);
    LeafTensor right = hom_tensor("q", "r", n);
    LeafTensor composed = star_contract(std::vector<LeafTensor>{left, right}, "q", 3);
    CHECK(composed == hom_tensor("p", "r", m * n));
  }

  SECTION("rank-one inputs contract through the pairing") {
    std::vector<Scalar> w{Scalar(2), Scalar(3)}, v{Scalar(1), Scalar(-1), Scalar(4)};
    std::vector<Scalar> vp{Scalar(5), Scalar(2), Scalar(1)}, u{Scalar(7), Scalar(0)};
    LeafTensor a = outer(vector_tensor("p", w), vector_tensor("q", v));
    LeafTensor b = outer(vector_tensor("q", vp), vector_tensor("r", u));
    Scalar pairing = Scalar(1 * 5 - 1 * 2 + 4 * 1);
    LeafTensor expected =
        pairing * outer(vector_tensor("p", w), vector_tensor("r", u));
    CHECK(star_contract(std::vector<LeafTensor>{a, b}, "q", 3) == expected);
  }

  SECTION("zero input gives zero") {
    LeafTensor zero({{"p", 2}, {"q", 3}}, Scalar(0));
    LeafTensor right = hom_tensor("q", "r", random_matrix(rng, 3, 2));
    CHECK(star_contract(std::vector<LeafTensor>{zero, right}, "q", 3).is_zero());
  }

  SECTION("mismatched contraction dimension is rejected") {
    LeafTensor a = hom_tensor("p", "q", random_matrix(rng, 2, 2));
    LeafTensor b = hom_tensor("q", "r", random_matrix(rng, 3, 2));
    CHECK_THROWS_WITH(star_contract(std::vector<LeafTensor>{a, b}, "q", 2),
                      Catch::Matchers::ContainsSubstring("module mismatch at vertex 'q'"));
  }
}

TEST_CASE("psi on an edge and on the two-state star", "[model]") {
  GroupPtr g = fixtures::z2();
  ModulePtr reg = fixtures::regular(g);

  SECTION("a two-vertex tree returns its edge tensor") {
    SpacedTree t = SpacedTree::make(g, {{"p", reg}, {"q", reg}}, {{"p", "q"}});
    TreeRepresentation a;
    Rng rng(3);
    LeafTensor x = hom_tensor("p", "q", random_matrix(rng, 2, 2));
    a.set("p", "q", x);
    CHECK(psi(t, a) == x);
  }

  SECTION("the four-leaf star lands on the even parametrisation") {
    SpacedTree t = fixtures::star(g, reg, "c", {"1", "2", "3", "4"});
    Rng rng(11);
    std::vector<Scalar> xs, ys;
    TreeRepresentation a;
    for (int i = 1; i <= 4; ++i) {
      xs.push_back(Scalar(rng.rational(9)));
      ys.push_back(Scalar(rng.rational(9)));
      a.set(std::to_string(i), "c",
            two_state_edge(std::to_string(i), "c", xs.back(), ys.back()));
    }
    REQUIRE(rep_is_equivariant(t, a));
    LeafTensor p = psi(t, a);
    CHECK(p == psi(t, a, "c"));

    std::vector<Scalar> tvec{Scalar(1), Scalar(1)}, svec{Scalar(1), Scalar(-1)};
    Scalar norm = Scalar(16).inverse();
    for (int mask = 0; mask < 16; ++mask) {
      bool first = true;
      LeafTensor basis({}, Scalar(0));
      Scalar expected(2);
      int parity = 0;
      for (int i = 0; i < 4; ++i) {
        bool in = (mask >> i) & 1;
        parity ^= in;
        LeafTensor factor =
            vector_tensor(std::to_string(i + 1), in ? svec : tvec);
        basis = first ? factor : outer(basis, factor);
        first = false;
        expected = expected * (in ? xs[i] : ys[i]);
      }
      Scalar coord = norm * pair_tensors(p, basis);
      if (parity) {
        CHECK(coord.is_zero());
      } else {
        CHECK(coord == expected);
      }
    }
  }

  SECTION("a zero edge collapses psi") {
    SpacedTree t = fixtures::star(g, reg, "c", {"1", "2", "3", "4"});
    TreeRepresentation a = random_representation(t, 5, false);
    a.set("1", "c", LeafTensor({{"1", 2}, {"c", 2}}, Scalar(0)));
    CHECK(psi(t, a).is_zero());
  }
}

TEST_CASE("splitting independence and group equivariance of psi", "[model]") {
  GroupPtr g = fixtures::z2();
  SpacedTree t = fixtures::glued_six_leaves(g, fixtures::regular(g));

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    TreeRepresentation plain = random_representation(t, seed, false);
    LeafTensor ref = psi(t, plain, "4");
    CHECK(ref == psi(t, plain, "c1"));
    CHECK(ref == psi(t, plain, "c2"));

    TreeRepresentation equi = random_representation(t, seed, true);
    REQUIRE(rep_is_equivariant(t, equi));
    LeafTensor p = psi(t, equi);
    for (std::uint32_t e = 0; e < g->size(); ++e) {
      CHECK(psi(t, act_group(t, plain, e)) ==
            act_on_vertex_slots(t, psi(t, plain), e));
      CHECK(act_on_vertex_slots(t, p, e) == p);
    }
  }

  GroupPtr klein = fixtures::dna_kimura81();
  SpacedTree k3 = fixtures::star(klein, fixtures::natural(klein), "c",
                                 {"u", "v", "w"});
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TreeRepresentation a = random_representation(k3, seed, false);
    for (std::uint32_t e = 0; e < klein->size(); ++e)
      CHECK(psi(k3, act_group(k3, a, e)) ==
            act_on_vertex_slots(k3, psi(k3, a), e));
  }
}

TEST_CASE("phi composes a root distribution into the parametrisation", "[model]") {
  GroupPtr g = fixtures::z2();
  ModulePtr reg = fixtures::regular(g);

  SECTION("identity edge places the distribution on the diagonal") {
    SpacedTree t = SpacedTree::make(g, {{"l", reg}, {"r", reg}}, {{"l", "r"}});
    TreeRepresentation a;
    a.set("l", "r", identity_tensor("l", "r", 2));
    RootDistribution pi =
        make_distribution({Scalar(make_rational(1, 3)), Scalar(make_rational(2, 3))});
    LeafTensor out = phi(t, "r", a, pi);
    CHECK(out.at({0, 0}) == Scalar(make_rational(1, 3)));
    CHECK(out.at({1, 1}) == Scalar(make_rational(2, 3)));
    CHECK(out.at({0, 1}).is_zero());
    CHECK(out.at({1, 0}).is_zero());
  }

  SECTION("a concentrated distribution picks one column per edge") {
    SpacedTree t = fixtures::star(g, reg, "c", {"1", "2", "3"});
    TreeRepresentation a = random_stochastic_representation(t, "c", 21);
    RootDistribution pi = make_distribution({Scalar(1), Scalar(0)});
    LeafTensor expected({}, Scalar(0));
    bool first = true;
    for (const std::string& leaf : t.leaf_names()) {
      Mat m = edge_matrix(a, leaf, "c");
      LeafTensor col = vector_tensor(leaf, {m(0, 0), m(1, 0)});
      expected = first ? col : outer(expected, col);
      first = false;
    }
    CHECK(phi(t, "c", a, pi) == expected);
  }

  SECTION("outputs are distributions and match psi of the composed edge") {
    SpacedTree t = fixtures::glued_six_leaves(g, reg);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      TreeRepresentation a = random_stochastic_representation(t, "c1", seed);
      RootDistribution pi = random_distribution(2, seed);
      LeafTensor out = phi(t, "c1", a, pi);
      CHECK(out.coordinate_sum().is_one());

      TreeRepresentation b = a;
      const LeafTensor& x = a.edge("1", "c1");
      b.set("1", "c1", x.scale_slot(x.slot_index("c1"), pi.pi));
      CHECK(out == psi(t, b));
    }
  }

  SECTION("stochastic violations name the edge") {
    SpacedTree t = fixtures::star(g, reg, "c", {"1", "2", "3"});
    TreeRepresentation a = random_stochastic_representation(t, "c", 4);
    RootDistribution pi = make_distribution({Scalar(1), Scalar(0)});

    TreeRepresentation bad = a;
    Mat m(2, 2);
    m(0, 0) = Scalar(make_rational(1, 2));
    m(1, 0) = Scalar(1);
    m(0, 1) = Scalar(make_rational(1, 2));
    m(1, 1) = Scalar(0);
    bad.set("2", "c", hom_tensor("2", "c", m));
    CHECK_THROWS_WITH(phi(t, "c", bad, pi),
                      Catch::Matchers::ContainsSubstring("edge c->2") &&
                          Catch::Matchers::ContainsSubstring("sum to 1"));

    TreeRepresentation neg = a;
    Mat n(2, 2);
    n(0, 0) = Scalar(2);
    n(1, 0) = Scalar(-1);
    n(0, 1) = Scalar(-1);
    n(1, 1) = Scalar(2);
    neg.set("3", "c", hom_tensor("3", "c", n));
    CHECK_THROWS_WITH(phi(t, "c", neg, pi),
                      Catch::Matchers::ContainsSubstring("edge c->3") &&
                          Catch::Matchers::ContainsSubstring("negative"));

    CHECK_THROWS_WITH(
        phi(t, "c", a, RootDistribution{{Scalar(1), Scalar(1)}}),
        Catch::Matchers::ContainsSubstring("does not sum to 1"));
  }
}

TEST_CASE("seeded sampling of representations", "[model]") {
  GroupPtr g = fixtures::z2();
  SpacedTree t = fixtures::glued_six_leaves(g, fixtures::regular(g));

  SECTION("draws are deterministic per seed and edge") {
    TreeRepresentation a = random_representation(t, 42, true);
    TreeRepresentation b = random_representation(t, 42, true);
    TreeRepresentation c = random_representation(t, 43, true);
    bool all_equal = true, any_diff = false;
    for (const auto& e : t.edges()) {
      all_equal = all_equal && a.edge(e.first, e.second) == b.edge(e.first, e.second);
      any_diff = any_diff || !(a.edge(e.first, e.second) == c.edge(e.first, e.second));
    }
    CHECK(all_equal);
    CHECK(any_diff);
  }

  SECTION("the equivariant flag averages, plain sampling does not") {
    CHECK(rep_is_equivariant(t, random_representation(t, 3, true)));
    CHECK_FALSE(rep_is_equivariant(t, random_representation(t, 3, false)));
  }

  SECTION("over the trivial group both paths agree") {
    GroupPtr one = trivial_group();
    ModulePtr m = share(GModule::permutation_module(one, {"a", "b"}, {}));
    SpacedTree s = fixtures::star(one, m, "c", {"1", "2"});
    TreeRepresentation plain = random_representation(s, 9, false);
    TreeRepresentation equi = random_representation(s, 9, true);
    for (const auto& e : s.edges())
      CHECK(plain.edge(e.first, e.second) == equi.edge(e.first, e.second));
  }

  SECTION("stochastic sampling is stochastic and equivariant") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      TreeRepresentation a = random_stochastic_representation(t, "4", seed);
      CHECK(rep_is_equivariant(t, a));
      require_stochastic(t, a, "4");
      CHECK(psi(t, a).coordinate_sum() == Scalar(2));
    }
  }
}

TEST_CASE("base change twists the tree but not the model", "[model]") {
  GroupPtr g = fixtures::z2();
  ModulePtr reg = fixtures::regular(g);
  SpacedTree t = fixtures::glued_six_leaves(g, reg);

  SECTION("the identity change is neutral") {
    BaseChange h = make_base_change(t, {});
    TreeRepresentation a = random_representation(t, 1, true);
    CHECK(psi_base_changed(t, a, h) == psi(t, a));
    CHECK(base_change_check(t, a, h));
  }

  SECTION("random equivariant changes satisfy the transport identity") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      std::map<std::string, Mat> maps;
      Rng rng(Rng::derive(seed, "h"));
      for (const std::string& n : t.names()) {
        for (;;) {
          Scalar a(rng.rational(5)), b(rng.rational(5));
          Mat m(2, 2);
          m(0, 0) = a;
          m(1, 1) = a;
          m(0, 1) = b;
          m(1, 0) = b;
          if (!mat_inverse(m).has_value()) continue;
          maps.emplace(n, std::move(m));
          break;
        }
      }
      BaseChange h = make_base_change(t, maps);
      TreeRepresentation a = random_representation(t, seed, seed % 2 == 0);
      CHECK(base_change_check(t, a, h));
    }
  }

  SECTION("group-algebra changes work for the four-state Klein star") {
    GroupPtr klein = fixtures::dna_kimura81();
    ModulePtr nat = fixtures::natural(klein);
    SpacedTree k3 = fixtures::star(klein, nat, "c", {"u", "v", "w"});
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      std::map<std::string, Mat> maps;
      Rng rng(Rng::derive(seed, "klein-h"));
      for (const std::string& n : k3.names()) {
        for (;;) {
          Mat m(4, 4);
          for (std::uint32_t e = 0; e < klein->size(); ++e) {
            Scalar c(rng.rational(5));
            Mat a = nat->act_mat(e);
            for (std::size_t i = 0; i < 4; ++i)
              for (std::size_t j = 0; j < 4; ++j) m(i, j) = m(i, j) + c * a(i, j);
          }
          if (!mat_inverse(m).has_value()) continue;
          maps.emplace(n, std::move(m));
          break;
        }
      }
      BaseChange h = make_base_change(k3, maps);
      CHECK(base_change_check(k3, random_representation(k3, seed, true), h));
    }
  }

  SECTION("non-equivariant or singular changes are rejected") {
    Mat shear(2, 2);
    shear(0, 0) = Scalar(1);
    shear(0, 1) = Scalar(1);
    shear(1, 1) = Scalar(1);
    CHECK_THROWS_WITH(make_base_change(t, {{"1", shear}}),
                      Catch::Matchers::ContainsSubstring("not equivariant"));

    Mat ones(2, 2);
    ones(0, 0) = Scalar(1);
    ones(0, 1) = Scalar(1);
    ones(1, 0) = Scalar(1);
    ones(1, 1) = Scalar(1);
    CHECK_THROWS_WITH(make_base_change(t, {{"1", ones}}),
                      Catch::Matchers::ContainsSubstring("not invertible"));

    CHECK_THROWS_WITH(make_base_change(t, {{"zz", Mat::identity(2)}}),
                      Catch::Matchers::ContainsSubstring("unknown vertex"));
  }
}

TEST_CASE("factoring an edge through valency-two vertices", "[model]") {
  GroupPtr g = fixtures::z2();
  ModulePtr reg = fixtures::regular(g);
  SpacedTree joined = SpacedTree::make(
      g,
      {{"c1", reg}, {"c2", reg}, {"1", reg}, {"2", reg}, {"3", reg},
       {"5", reg}, {"6", reg}, {"7", reg}},
      {{"c1", "1"}, {"c1", "2"}, {"c1", "3"}, {"c1", "c2"},
       {"c2", "5"}, {"c2", "6"}, {"c2", "7"}});

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    TreeRepresentation a = random_representation(joined, seed, seed % 2 == 0);
    FactoredEdge f = factor_edge(joined, a, "c1", "c2");
    CHECK(f.tree.vertex_count() == joined.vertex_count() + 2);
    CHECK(psi(f.tree, f.rep) == psi(joined, a));
  }

  TreeRepresentation a = random_representation(joined, 0, true);
  CHECK_THROWS_WITH(factor_edge(joined, a, "1", "2"),
                    Catch::Matchers::ContainsSubstring("not in the tree"));

  ModulePtr wide = share(GModule::permutation_module(
      g, {"a", "b", "c"}, {parse_cycles({"a", "b", "c"}, "(a b)")}));
  SpacedTree mixed = SpacedTree::make(g, {{"p", reg}, {"q", wide}}, {{"p", "q"}});
  TreeRepresentation b;
  b.set("p", "q", LeafTensor({{"p", 2}, {"q", 3}}, Scalar(0)));
  CHECK_THROWS_WITH(factor_edge(mixed, b, "p", "q"),
                    Catch::Matchers::ContainsSubstring("equal modules"));
}

TEST_CASE("pure cone samples from star orbits", "[model]") {
  SECTION("trivial group samples are pure tensors") {
    GroupPtr one = trivial_group();
    ModulePtr m = share(GModule::permutation_module(one, {"a", "b"}, {}));
    SpacedTree s = fixtures::star(one, m, "c", {"1", "2", "3"});
    LeafTensor sample = pure_cone_sample({s, "c"}, 0, 17);
    REQUIRE(sample.rank() == 3);
    for (std::uint32_t j1 = 0; j1 < 2; ++j1)
      for (std::uint32_t k1 = 0; k1 < 2; ++k1)
        for (std::uint32_t j2 = 0; j2 < 2; ++j2)
          for (std::uint32_t k2 = 0; k2 < 2; ++k2)
            CHECK(sample.at({0, j1, k1}) * sample.at({1, j2, k2}) ==
                  sample.at({0, j2, k2}) * sample.at({1, j1, k1}));
  }

  SECTION("two-state star samples satisfy the even binomials") {
    GroupPtr g = fixtures::z2();
    SpacedTree s = fixtures::star(g, fixtures::regular(g), "c",
                                  {"1", "2", "3", "4"});
    Star st{s, "c"};
    CHECK(module_orbits(*s.module("c")).size() == 1);
    CHECK_THROWS_WITH(pure_cone_sample(st, 1, 0),
                      Catch::Matchers::ContainsSubstring("invalid orbit index"));

    std::vector<Scalar> tvec{Scalar(1), Scalar(1)}, svec{Scalar(1), Scalar(-1)};
    Scalar norm = Scalar(16).inverse();
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      LeafTensor sample = pure_cone_sample(st, 0, seed);
      for (std::uint32_t e = 0; e < g->size(); ++e)
        CHECK(act_on_vertex_slots(s, sample, e) == sample);
      std::vector<Scalar> coord(16, Scalar(0));
      for (int mask = 0; mask < 16; ++mask) {
        bool first = true;
        LeafTensor basis({}, Scalar(0));
        int parity = 0;
        for (int i = 0; i < 4; ++i) {
          bool in = (mask >> i) & 1;
          parity ^= in;
          basis = first ? vector_tensor(std::to_string(i + 1), in ? svec : tvec)
                        : outer(basis, vector_tensor(std::to_string(i + 1),
                                                     in ? svec : tvec));
          first = false;
        }
        coord[mask] = norm * pair_tensors(sample, basis);
        if (parity) CHECK(coord[mask].is_zero());
      }
      Scalar full = coord[0] * coord[15];
      CHECK(coord[3] * coord[12] == full);
      CHECK(coord[5] * coord[10] == full);
      CHECK(coord[9] * coord[6] == full);
    }
  }

  SECTION("multi-orbit centres expose one cone per orbit") {
    GroupPtr cs = fixtures::dna_strand_symmetric();
    ModulePtr nat = fixtures::natural(cs);
    SpacedTree s = fixtures::star(cs, nat, "c", {"u", "v", "w"});
    Star st{s, "c"};
    auto orbits = module_orbits(*nat);
    REQUIRE(orbits.size() == 2);
    CHECK(orbits[0] == std::vector<std::uint32_t>{0, 2});
    CHECK(orbits[1] == std::vector<std::uint32_t>{1, 3});
    for (std::size_t i = 0; i < 2; ++i) {
      LeafTensor sample = pure_cone_sample(st, i, 31 + i);
      CHECK_FALSE(sample.is_zero());
      for (std::uint32_t e = 0; e < cs->size(); ++e)
        CHECK(act_on_vertex_slots(s, sample, e) == sample);
    }
    CHECK_THROWS_WITH(pure_cone_sample(st, 2, 0),
                      Catch::Matchers::ContainsSubstring("invalid orbit index"));
  }
}

namespace {

PolyTensor two_state_edge_sym(const std::string& p, const std::string& q,
                              const Polynomial& x, const Polynomial& y) {
  PolyTensor e({{p, 2}, {q, 2}}, Polynomial::zero(x.table()));
  e.at({0, 0}) = y + x;
  e.at({0, 1}) = y - x;
  e.at({1, 0}) = y - x;
  e.at({1, 1}) = y + x;
  return e;
}

}  // namespace

TEST_CASE("weight coordinates of the two-state star", "[coords]") {
  GroupPtr g = fixtures::z2();
  SpacedTree t = fixtures::star(g, fixtures::regular(g), "c", {"1", "2", "3", "4"});
  auto irr = builtin_irreps(*g);

  CoordSystem inv = invariant_coords(t, irr);
  CoordSystem amb = ambient_weight_coords(t, irr);
  CHECK(inv.dim() == 8);
  CHECK(amb.dim() == 16);
  CHECK(inv.weight_regime);
  CHECK(inv.table->name(0) == "z[t,t,t,t]");
  CHECK(inv.table->find("z[s,s,t,t]") >= 0);
  CHECK(inv.table->find("z[s,t,t,t]") == -1);
  CHECK(amb.table->name(0) == "x[t,t,t,t]");
  CHECK(amb.table->name(15) == "x[s,s,s,s]");

  // Basis vectors carry the |G|^(internal count) scaling.
  CHECK(inv.basis[0][0] == Scalar(2));

  SECTION("symbolic psi lands on the even monomial parametrisation") {
    std::vector<Var> pv;
    for (int i = 1; i <= 4; ++i) pv.push_back({"x", {std::to_string(i)}});
    for (int i = 1; i <= 4; ++i) pv.push_back({"y", {std::to_string(i)}});
    VarTablePtr params = VarTable::make(pv);
    SymbolicRepresentation a;
    for (int i = 0; i < 4; ++i)
      a.set(std::to_string(i + 1), "c",
            two_state_edge_sym(std::to_string(i + 1), "c",
                               Polynomial::variable(params, i),
                               Polynomial::variable(params, 4 + i)));
    PolyTensor p = psi(t, a);
    std::vector<Polynomial> coords = amb.coords_of(p);
    for (int mask = 0; mask < 16; ++mask) {
      std::size_t var = 0;
      int parity = 0;
      Polynomial expected = Polynomial::constant(params, Scalar(1));
      for (int i = 0; i < 4; ++i) {
        bool in = (mask >> i) & 1;
        parity ^= in;
        var = 2 * var + (in ? 1 : 0);
        expected = expected * Polynomial::variable(params, in ? i : 4 + i);
      }
      if (parity) {
        CHECK(coords[var].is_zero());
      } else {
        CHECK(coords[var] == expected);
      }
    }

    std::vector<Polynomial> zc = inv.coords_of(p);
    CHECK(zc[0] == Polynomial::variable(params, 4) * Polynomial::variable(params, 5) *
                       Polynomial::variable(params, 6) * Polynomial::variable(params, 7));
  }

  SECTION("numeric extraction accepts invariants and rejects the rest") {
    TreeRepresentation a = random_representation(t, 8, true);
    LeafTensor p = psi(t, a);
    std::vector<Scalar> z = inv.coords_of(p);
    CHECK(inv.tensor_of(z) == p);
    TreeRepresentation b = random_representation(t, 8, false);
    CHECK_THROWS_WITH(inv.coords_of(psi(t, b)),
                      Catch::Matchers::ContainsSubstring("not in the span"));
    CHECK(ambient_weight_coords(t, irr).coords_of(psi(t, b)).size() == 16);
  }
}

TEST_CASE("coordinate systems across the preset groups", "[coords]") {
  SECTION("four-state abelian stars") {
    GroupPtr k81 = fixtures::dna_kimura81();
    SpacedTree s81 = fixtures::star(k81, fixtures::natural(k81), "c", {"u", "v", "w"});
    CoordSystem c81 = invariant_coords(s81, builtin_irreps(*k81));
    CHECK(c81.dim() == 16);
    CHECK(c81.weight_regime);
    CHECK(c81.table->name(0) == "z[t,t,t]");

    GroupPtr cs = fixtures::dna_strand_symmetric();
    SpacedTree scs = fixtures::star(cs, fixtures::natural(cs), "c", {"u", "v", "w"});
    CoordSystem ccs = invariant_coords(scs, builtin_irreps(*cs));
    CHECK(ccs.dim() == 20);
    bool with_copy = false;
    for (std::size_t i = 0; i < ccs.table->size(); ++i)
      with_copy = with_copy || ccs.table->name(i).find('#') != std::string::npos;
    CHECK(with_copy);

    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      TreeRepresentation a = random_representation(scs, seed, true);
      LeafTensor p = psi(scs, a);
      CHECK(ccs.tensor_of(ccs.coords_of(p)) == p);
    }
  }

  SECTION("the six-leaf two-state tree") {
    GroupPtr g = fixtures::z2();
    SpacedTree t = fixtures::glued_six_leaves(g, fixtures::regular(g));
    CoordSystem inv = invariant_coords(t, builtin_irreps(*g));
    CHECK(inv.dim() == 32);
    CHECK(inv.table->name(0) == "z[t,t,t,t,t,t]");
    CHECK(inv.basis[0][0] == Scalar(8));
  }

  SECTION("non-abelian groups fall back to orbit sums") {
    GroupPtr s4 = fixtures::dna_symmetric();
    SpacedTree t = fixtures::star(s4, fixtures::natural(s4), "c", {"u", "v", "w"});
    CoordSystem c = invariant_coords(t, builtin_irreps(*s4));
    CHECK_FALSE(c.weight_regime);
    CHECK(c.dim() == 5);
    CHECK(c.table->name(0) == "z[A,A,A]");
    CHECK_THROWS_WITH(ambient_weight_coords(t, builtin_irreps(*s4)),
                      Catch::Matchers::ContainsSubstring("abelian"));
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      LeafTensor p = psi(t, random_representation(t, seed, true));
      CHECK(c.tensor_of(c.coords_of(p)) == p);
    }
  }

  SECTION("the trivial group sees the whole leaf space") {
    GroupPtr one = make_group({"id"}, std::vector<std::string>{});
    ModulePtr m = share(GModule::permutation_module(one, {"a", "b"}, {}));
    SpacedTree t = SpacedTree::make(
        one, {{"c1", m}, {"c2", m}, {"1", m}, {"2", m}, {"3", m}, {"4", m}},
        {{"c1", "1"}, {"c1", "2"}, {"c1", "c2"}, {"c2", "3"}, {"c2", "4"}});
    CoordSystem c = invariant_coords(t, builtin_irreps(*one));
    CHECK(c.dim() == 16);
    LeafTensor p = psi(t, random_representation(t, 2, false));
    CHECK(c.tensor_of(c.coords_of(p)) == p);
  }
}
