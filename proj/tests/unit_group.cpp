#include <catch2/catch_amalgamated.hpp>

#include "etm/blocks.hpp"
#include "etm/gmodule.hpp"
#include "etm/group.hpp"
#include "etm/irreps.hpp"
#include "etm/rng.hpp"

using namespace etm;

namespace {

const std::vector<std::string> kDna{"A", "C", "G", "T"};

GroupPtr dna_group(const std::vector<std::string>& cycles) {
  return make_group(kDna, cycles);
}

// The natural module: the group permutes the labels it was defined on.
GModule natural_module(const GroupPtr& g) {
  return GModule::permutation_module(g, g->labels(), g->generators());
}

Mat random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  Mat m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = Scalar(rng.rational(7));
  return m;
}

// Averages an arbitrary matrix into an equivariant map u -> v.
Mat average_map(const GModule& u, const GModule& v, const Mat& raw) {
  const FiniteGroup& g = *u.group();
  Mat sum(v.dim(), u.dim());
  for (std::uint32_t i = 0; i < g.size(); ++i)
    sum = sum + v.act_mat(i) * (raw * u.act_mat(g.inv(i)));
  return Scalar(static_cast<long>(g.size())).inverse() * sum;
}

}  // namespace

TEST_CASE("cycle notation parses and formats", "[group]") {
  Permutation p = parse_cycles(kDna, "(A C G T)");
  CHECK(p.img == std::vector<std::uint32_t>{1, 2, 3, 0});
  CHECK(format_cycles(kDna, p) == "(A C G T)");

  Permutation two = parse_cycles(kDna, "(A G)(C T)");
  CHECK(two.img == std::vector<std::uint32_t>{2, 3, 0, 1});
  CHECK(format_cycles(kDna, two) == "(A G)(C T)");

  CHECK(parse_cycles(kDna, "(A,C,G,T)") == p);
  CHECK(parse_cycles(kDna, "e").is_identity());
  CHECK(parse_cycles(kDna, "").is_identity());
  CHECK(parse_cycles(kDna, "()").is_identity());

  CHECK_THROWS_AS(parse_cycles(kDna, "(A X)"), error);
  CHECK_THROWS_AS(parse_cycles(kDna, "(A A)"), error);
  CHECK_THROWS_AS(parse_cycles(kDna, "(A C"), error);
  CHECK_THROWS_AS(parse_cycles(kDna, "A C"), error);
}

TEST_CASE("groups close over their generators", "[group]") {
  GroupPtr dihedral = dna_group({"(A C G T)", "(A G)"});
  CHECK(dihedral->size() == 8);
  CHECK_FALSE(dihedral->abelian());
  CHECK(dihedral->exponent() == 4);

  GroupPtr klein = dna_group({"(A G)", "(C T)"});
  CHECK(klein->size() == 4);
  CHECK(klein->abelian());
  CHECK(klein->exponent() == 2);

  GroupPtr trivial = dna_group({});
  CHECK(trivial->size() == 1);
  CHECK(trivial->abelian());
  CHECK(trivial->element(0).is_identity());

  GroupPtr sym = dna_group({"(A C)", "(A C G T)"});
  CHECK(sym->size() == 24);
  CHECK_FALSE(sym->abelian());

  GroupPtr cyclic = dna_group({"(A C G T)"});
  CHECK(cyclic->size() == 4);
  CHECK(cyclic->abelian());
  CHECK(cyclic->exponent() == 4);
}

TEST_CASE("group tables are consistent", "[group]") {
  GroupPtr g = dna_group({"(A C G T)", "(A G)"});
  CHECK(g->element(0).is_identity());
  for (std::uint32_t i = 0; i < g->size(); ++i) {
    CHECK(g->mult(i, g->inv(i)) == 0);
    CHECK(g->mult(0, i) == i);
    CHECK(g->size() % g->order_of(i) == 0);

    Permutation from_word = Permutation::identity(g->degree());
    std::vector<std::uint32_t> w = g->word(i);
    for (std::size_t k = w.size(); k-- > 0;)
      from_word = compose(g->generators()[w[k]], from_word);
    CHECK(from_word == g->element(i));
  }
  for (std::uint32_t i = 0; i < g->size(); ++i)
    for (std::uint32_t j = 0; j < g->size(); ++j)
      CHECK(g->element(g->mult(i, j)) == compose(g->element(i), g->element(j)));
}

TEST_CASE("orbits and stabilisers", "[group]") {
  GroupPtr sym = dna_group({"(A C)", "(A C G T)"});
  auto orbits = sym->orbits();
  REQUIRE(orbits.size() == 1);
  CHECK(orbits[0] == std::vector<std::uint32_t>{0, 1, 2, 3});
  CHECK(sym->stabilizer(0).size() == 6);

  GroupPtr klein = dna_group({"(A G)", "(C T)"});
  auto ko = klein->orbits();
  REQUIRE(ko.size() == 2);
  CHECK(ko[0] == std::vector<std::uint32_t>{0, 2});
  CHECK(ko[1] == std::vector<std::uint32_t>{1, 3});
  CHECK(klein->stabilizer(1).size() == 2);
}

TEST_CASE("abelian character tables", "[group]") {
  GroupPtr z2 = make_group({"0", "1"}, std::vector<std::string>{"(0 1)"});
  auto irr2 = builtin_irreps(*z2);
  REQUIRE(irr2.size() == 2);
  CHECK(irr2[0].label() == "t");
  CHECK(irr2[1].label() == "s");
  CHECK(irr2[0].characters() == std::vector<Scalar>{Scalar(1), Scalar(1)});
  CHECK(irr2[1].characters() == std::vector<Scalar>{Scalar(1), Scalar(-1)});

  GroupPtr klein = dna_group({"(A G)", "(C T)"});
  auto irr4 = builtin_irreps(*klein);
  REQUIRE(irr4.size() == 4);
  CHECK(irr4[0].label() == "t");
  CHECK(irr4[1].label() == "w1");
  CHECK(irr4[2].label() == "w2");
  CHECK(irr4[3].label() == "w3");
  for (const Irrep& ir : irr4)
    for (const Scalar& c : ir.characters())
      CHECK((c == Scalar(1) || c == Scalar(-1)));

  GroupPtr cyclic = dna_group({"(A C G T)"});
  auto irrc = builtin_irreps(*cyclic);
  REQUIRE(irrc.size() == 4);
  CHECK(irrc[0].label() == "t");
  // The unique {1,-1}-valued nontrivial character keeps the label "s".
  CHECK(irrc[1].label() == "s");
  CHECK(irrc[2].label() == "w1");
  CHECK(irrc[3].label() == "w2");
  std::uint32_t r = cyclic->index_of(parse_cycles(kDna, "(A C G T)"));
  CHECK(irrc[1].character(r) == Scalar(-1));
  Scalar i4 = Scalar::zeta(4);
  CHECK((irrc[2].character(r) == i4 || irrc[2].character(r) == i4.pow(3)));
}

TEST_CASE("non-abelian irrep tables", "[group]") {
  GroupPtr s3 = make_group({"0", "1", "2"},
                           std::vector<std::string>{"(0 1)", "(0 1 2)"});
  auto irr = builtin_irreps(*s3);
  REQUIRE(irr.size() == 3);
  CHECK(irr[0].label() == "t");
  CHECK(irr[1].label() == "s");
  CHECK(irr[2].label() == "e");
  CHECK(irr[2].dim() == 2);

  GroupPtr d4 = dna_group({"(A C G T)", "(A G)"});
  auto irrd = builtin_irreps(*d4);
  REQUIRE(irrd.size() == 5);
  CHECK(irrd[0].label() == "t");
  CHECK(irrd[1].label() == "w1");
  CHECK(irrd[2].label() == "w2");
  CHECK(irrd[3].label() == "w3");
  CHECK(irrd[4].label() == "e");
  CHECK(irrd[4].dim() == 2);

  GroupPtr s4 = dna_group({"(A C)", "(A C G T)"});
  auto irrs = builtin_irreps(*s4);
  REQUIRE(irrs.size() == 5);
  CHECK(irrs[0].label() == "t");
  CHECK(irrs[1].label() == "s");
  CHECK(irrs[2].label() == "e");
  CHECK(irrs[3].label() == "f1");
  CHECK(irrs[4].label() == "f2");
  std::size_t dimsq = 0;
  for (const Irrep& ir : irrs) dimsq += ir.dim() * ir.dim();
  CHECK(dimsq == 24);

  Scalar order(24);
  for (std::size_t a = 0; a < irrs.size(); ++a)
    for (std::size_t b = 0; b < irrs.size(); ++b) {
      Scalar sum(0);
      for (std::uint32_t i = 0; i < s4->size(); ++i)
        sum = sum + irrs[a].character(i) * irrs[b].character(s4->inv(i));
      CHECK(sum == (a == b ? order : Scalar(0)));
    }

  std::vector<std::string> five{"0", "1", "2", "3", "4"};
  GroupPtr d5 = make_group(five, std::vector<std::string>{"(0 1 2 3 4)", "(1 4)(2 3)"});
  REQUIRE(d5->size() == 10);
  CHECK_THROWS_AS(builtin_irreps(*d5), error);
}

TEST_CASE("reynolds operator", "[group]") {
  GroupPtr z2 = make_group({"0", "1"}, std::vector<std::string>{"(0 1)"});
  GModule kg = GModule::regular_module(z2);
  std::vector<Scalar> one{Scalar(1), Scalar(0)};
  Scalar half{make_rational(1, 2)};
  CHECK(reynolds(kg, one) == std::vector<Scalar>{half, half});

  GroupPtr trivial = dna_group({});
  GModule tm = natural_module(trivial);
  std::vector<Scalar> v{Scalar(3), Scalar(-1), Scalar(0), Scalar(7)};
  CHECK(reynolds(tm, v) == v);

  GroupPtr s4 = dna_group({"(A C)", "(A C G T)"});
  GModule nat = natural_module(s4);
  Rng rng(11);
  std::vector<Scalar> w(4);
  for (Scalar& c : w) c = Scalar(rng.rational(9));
  std::vector<Scalar> rw = reynolds(nat, w);
  CHECK(reynolds(nat, rw) == rw);
  for (std::uint32_t g = 0; g < s4->size(); ++g)
    CHECK(reynolds(nat, nat.act_vec(g, w)) == rw);
}

TEST_CASE("multiplicities from characters", "[group]") {
  GroupPtr z2 = make_group({"0", "1"}, std::vector<std::string>{"(0 1)"});
  auto irr2 = builtin_irreps(*z2);
  GModule kg = GModule::regular_module(z2);
  CHECK(multiplicities(kg, irr2) == std::vector<std::uint32_t>{1, 1});

  GroupPtr s4 = dna_group({"(A C)", "(A C G T)"});
  auto irrs = builtin_irreps(*s4);
  GModule nat = natural_module(s4);
  std::vector<std::uint32_t> m = multiplicities(nat, irrs);
  CHECK(m[0] == 1);  // trivial summand
  // The other summand is the three-dimensional representation whose
  // character at a transposition is +1.
  std::uint32_t t23 = s4->index_of(parse_cycles(kDna, "(G T)"));
  for (std::size_t i = 1; i < irrs.size(); ++i) {
    bool expected = irrs[i].dim() == 3 && irrs[i].character(t23) == Scalar(1);
    CHECK(m[i] == (expected ? 1u : 0u));
  }

  GroupPtr trivial = dna_group({});
  auto irrt = builtin_irreps(*trivial);
  GModule tm = natural_module(trivial);
  CHECK(multiplicities(tm, irrt) == std::vector<std::uint32_t>{4});
}

TEST_CASE("invariant bases", "[group]") {
  GroupPtr z2 = make_group({"0", "1"}, std::vector<std::string>{"(0 1)"});
  GModule kg = GModule::regular_module(z2);
  auto inv = invariant_basis(kg);
  REQUIRE(inv.size() == 1);
  CHECK(inv[0] == std::vector<Scalar>{Scalar(1), Scalar(1)});

  // The subgroup {e} fixes everything.
  auto full = invariant_basis(kg, {0});
  CHECK(full.size() == 2);

  GModule four = tensor_product(tensor_product(kg, kg), tensor_product(kg, kg));
  CHECK(four.dim() == 16);
  CHECK(four.based());
  CHECK(four.is_permutation());
  auto inv4 = invariant_basis(four);
  CHECK(inv4.size() == 8);
  for (const auto& v : inv4) {
    std::size_t support = 0;
    for (const Scalar& c : v) {
      CHECK((c.is_zero() || c.is_one()));
      if (!c.is_zero()) ++support;
    }
    CHECK(support == 2);  // free orbits of Z2 on the product basis
  }
}

TEST_CASE("weight bases of abelian modules", "[group]") {
  GroupPtr z2 = make_group({"0", "1"}, std::vector<std::string>{"(0 1)"});
  auto irr = builtin_irreps(*z2);
  GModule kg = GModule::regular_module(z2);
  auto wb = weight_basis(kg, irr);
  REQUIRE(wb.size() == 2);
  CHECK(wb[0].chr == 0);
  CHECK(wb[0].coords == std::vector<Scalar>{Scalar(1), Scalar(1)});
  CHECK(wb[1].chr == 1);
  CHECK(wb[1].coords == std::vector<Scalar>{Scalar(1), Scalar(-1)});

  GroupPtr klein = dna_group({"(A G)", "(C T)"});
  auto irrk = builtin_irreps(*klein);
  GModule nat = natural_module(klein);
  auto wbk = weight_basis(nat, irrk);
  REQUIRE(wbk.size() == 4);
  for (const auto& wv : wbk) {
    for (std::uint32_t g = 0; g < klein->size(); ++g) {
      std::vector<Scalar> moved = nat.act_vec(g, wv.coords);
      for (std::size_t k = 0; k < moved.size(); ++k)
        CHECK(moved[k] == irrk[wv.chr].character(g) * wv.coords[k]);
    }
  }

  GroupPtr s4 = dna_group({"(A C)", "(A C G T)"});
  auto irrs = builtin_irreps(*s4);
  GModule nats = natural_module(s4);
  CHECK_THROWS_AS(weight_basis(nats, irrs), error);
}

TEST_CASE("module validation", "[group]") {
  GroupPtr z2 = make_group({"0", "1"}, std::vector<std::string>{"(0 1)"});
  // Action that ignores the relation g*g = e.
  Mat bad(2, 2);
  bad(0, 0) = Scalar(2);
  bad(1, 1) = Scalar(1);
  CHECK_THROWS_AS(
      GModule::matrix_module(z2, {"u", "v"}, {bad}, Mat::identity(2)), error);

  // Non-invariant form.
  Mat swap(2, 2);
  swap(0, 1) = Scalar(1);
  swap(1, 0) = Scalar(1);
  Mat form = Mat::identity(2);
  form(0, 0) = Scalar(2);
  CHECK_THROWS_AS(GModule::matrix_module(z2, {"u", "v"}, {swap}, form), error);

  // The same action with the standard form is fine and matches the
  // permutation module.
  GModule viamat = GModule::matrix_module(z2, {"u", "v"}, {swap}, Mat::identity(2));
  CHECK(viamat.dim() == 2);
  CHECK_FALSE(viamat.is_permutation());
  GModule viaperm = GModule::permutation_module(z2, {"u", "v"},
                                                {parse_cycles({"u", "v"}, "(u v)")});
  for (std::uint32_t g = 0; g < z2->size(); ++g)
    CHECK(viamat.act_mat(g) == viaperm.act_mat(g));
}

TEST_CASE("hom block shapes", "[group]") {
  GroupPtr z2 = make_group({"0", "1"}, std::vector<std::string>{"(0 1)"});
  auto irr = builtin_irreps(*z2);
  GModule kg = GModule::regular_module(z2);
  HomBlocks hb(kg, kg, irr);
  REQUIRE(hb.irrep_count() == 2);
  CHECK(hb.rows(0) == 1);
  CHECK(hb.cols(0) == 1);
  CHECK(hb.rows(1) == 1);
  CHECK(hb.cols(1) == 1);
  CHECK(hb.total() == 2);

  GroupPtr trivial = make_group({"p"}, std::vector<std::string>{});
  auto irrt = builtin_irreps(*trivial);
  GModule u2 = GModule::permutation_module(trivial, {"a", "b"}, {});
  GModule v3 = GModule::permutation_module(trivial, {"a", "b", "c"}, {});
  HomBlocks single(u2, v3, irrt);
  REQUIRE(single.irrep_count() == 1);
  CHECK(single.rows(0) == 3);
  CHECK(single.cols(0) == 2);
  CHECK(single.total() == 6);

  // Splitting the six-leaf tree at its middle vertex: the halves have
  // shapes (4,4) x (1,1) and the whole is (4,4) x (4,4).
  GModule l1 = tensor_product(tensor_product(kg, kg), kg);
  HomBlocks half(kg, l1, irr);
  CHECK(half.rows(0) == 4);
  CHECK(half.rows(1) == 4);
  CHECK(half.cols(0) == 1);
  CHECK(half.cols(1) == 1);
  HomBlocks whole(l1, l1, irr);
  CHECK(whole.rows(0) == 4);
  CHECK(whole.cols(0) == 4);
  CHECK(whole.rows(1) == 4);
  CHECK(whole.cols(1) == 4);
  CHECK(whole.total() == 32);
}

TEST_CASE("hom blocks are functorial", "[group]") {
  GroupPtr s3 = make_group({"0", "1", "2"},
                           std::vector<std::string>{"(0 1)", "(0 1 2)"});
  auto irr = builtin_irreps(*s3);
  GModule u = natural_module(s3);
  GModule v = GModule::regular_module(s3);
  GModule w = tensor_product(u, u);

  Rng rng(23);
  Mat f = average_map(u, v, random_matrix(rng, v.dim(), u.dim()));
  Mat g = average_map(v, w, random_matrix(rng, w.dim(), v.dim()));

  HomBlocks uv(u, v, irr);
  HomBlocks vw(v, w, irr);
  HomBlocks uw(u, w, irr);
  auto bf = uv.blocks_of(f);
  auto bg = vw.blocks_of(g);
  auto bgf = uw.blocks_of(g * f);
  REQUIRE(bf.size() == irr.size());
  for (std::size_t i = 0; i < irr.size(); ++i)
    CHECK(bgf[i] == bg[i] * bf[i]);

  CHECK(uv.map_of(bf) == f);
  CHECK_THROWS_AS(uv.blocks_of(random_matrix(rng, v.dim(), u.dim())), error);
}

TEST_CASE("block basis tensors", "[group]") {
  GroupPtr z2 = make_group({"0", "1"}, std::vector<std::string>{"(0 1)"});
  auto irr = builtin_irreps(*z2);
  GModule kg = GModule::regular_module(z2);
  GModule l1 = tensor_product(tensor_product(kg, kg), kg);
  HomBlocks hb(kg, l1, irr);
  for (std::size_t i = 0; i < hb.irrep_count(); ++i)
    for (std::size_t a = 0; a < hb.rows(i); ++a)
      for (std::size_t b = 0; b < hb.cols(i); ++b) {
        Mat xi = hb.basis_tensor(i, a, b);
        auto blocks = hb.blocks_of(xi);
        for (std::size_t i2 = 0; i2 < hb.irrep_count(); ++i2)
          for (std::size_t a2 = 0; a2 < hb.rows(i2); ++a2)
            for (std::size_t b2 = 0; b2 < hb.cols(i2); ++b2) {
              Scalar expect(i2 == i && a2 == a && b2 == b ? 1 : 0);
              CHECK(blocks[i2](a2, b2) == expect);
            }
      }
}
