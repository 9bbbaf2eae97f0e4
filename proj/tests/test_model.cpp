#include <cmath>
#include <cstdlib>
#include <set>
#include <vector>

#include "doctest.h"
#include "ogp/common.hpp"
#include "ogp/model.hpp"

using namespace ogp;

namespace {

SpinConfig all_plus(int n) { return SpinConfig::Constant(n, 1); }

SpinConfig random_spins(int n, Rng& rng) {
  SpinConfig s(n);
  for (int i = 0; i < n; ++i) s[i] = rng.unit() < 0.5 ? -1 : 1;
  return s;
}

}  // namespace

TEST_CASE("theta counts repeated vertices") {
  SpinConfig s = all_plus(5);
  std::vector<std::int32_t> e1{1, 2, 3, 4};
  CHECK(theta(s, {e1.data(), 4}) == -1);
  s[1] = -1;
  CHECK(theta(s, {e1.data(), 4}) == 1);
  std::vector<std::int32_t> e2{1, 1, 2, 2};
  CHECK(theta(s, {e2.data(), 4}) == -1);
}

TEST_CASE("hamiltonian on hand-checkable graphs") {
  Hypergraph g;
  g.n = 5;
  g.k = 4;
  g.edge_data = {1, 2, 3, 4, 1, 1, 2, 2};
  SpinConfig s(5);
  s << 1, -1, 1, -1, 1;
  CHECK(hamiltonian(g, s) == -2);
  CHECK(cut_density(g, s) == doctest::Approx(-0.4));

  Hypergraph empty;
  empty.n = 5;
  empty.k = 4;
  CHECK(hamiltonian(empty, all_plus(5)) == 0);
}

TEST_CASE("even arity makes the energy sign-symmetric") {
  Rng rng(900);
  for (int rep = 0; rep < 100; ++rep) {
    Hypergraph g = sample_er(4, 1.5, 12, derive_seed(900, "g", rep));
    SpinConfig s = random_spins(12, rng);
    CHECK(hamiltonian(g, s) == hamiltonian(g, -s));
    CHECK(std::llabs(hamiltonian(g, s)) <=
          static_cast<long long>(g.num_edges()));
  }
}

TEST_CASE("magnetization and overlap on small configs") {
  CHECK(magnetization(all_plus(7)) == 1.0);
  SpinConfig s4(4);
  s4 << 1, 1, -1, -1;
  CHECK(magnetization(s4) == 0.0);
  SpinConfig s5(5);
  s5 << 1, 1, 1, 1, -1;
  CHECK(magnetization(s5) == doctest::Approx(0.6));

  SpinConfig a(4), b(4);
  a << 1, 1, 1, 1;
  b << 1, 1, -1, -1;
  CHECK(overlap(a, a) == 1.0);
  CHECK(overlap(a, -a) == -1.0);
  CHECK(overlap(a, b) == 0.0);
  CHECK(overlap(a, b) == overlap(b, a));

  Rng rng(31);
  for (int rep = 0; rep < 50; ++rep) {
    SpinConfig x = random_spins(9, rng), y = random_spins(9, rng);
    const double r = overlap(x, y);
    CHECK(std::abs(r) <= 1.0);
    // values live on the grid {-1 + 2j/n}
    const double j = (r + 1.0) * 9 / 2.0;
    CHECK(std::abs(j - std::round(j)) < 1e-12);
  }
}

TEST_CASE("validation rejects bad model parameters") {
  CHECK_THROWS_AS(sample_er(3, 1.0, 10, 1), ValidationError);
  CHECK_THROWS_AS(sample_er(0, 1.0, 10, 1), ValidationError);
  CHECK_THROWS_AS(sample_er(4, -0.5, 10, 1), ValidationError);
  CHECK_THROWS_AS(sample_er(4, 1.0, 0, 1), ValidationError);
  CHECK_THROWS_AS(sample_coupled(4, 1.0, 10, -0.1, 1), ValidationError);
  CHECK_THROWS_AS(sample_coupled(4, 1.0, 10, 1.1, 1), ValidationError);

  Hypergraph g;
  g.n = 4;
  g.k = 4;
  g.edge_data = {0, 1, 2, 3};
  CHECK_THROWS_AS(hamiltonian(g, all_plus(5)), ValidationError);
  SpinConfig bad(4);
  bad << 1, 0, 1, 1;
  CHECK_THROWS_AS(hamiltonian(g, bad), ValidationError);
}

TEST_CASE("er sampler: empty at lambda zero, reproducible, right mean") {
  const Hypergraph g0 = sample_er(4, 0.0, 10, 99);
  CHECK(g0.num_edges() == 0);

  const Hypergraph a = sample_er(4, 2.0, 50, 7);
  const Hypergraph b = sample_er(4, 2.0, 50, 7);
  CHECK(a.edge_data == b.edge_data);

  double sum = 0.0;
  const int reps = 2000;
  for (int i = 0; i < reps; ++i) {
    const Hypergraph g = sample_er(4, 2.0, 100, derive_seed(5, "er", i));
    sum += static_cast<double>(g.num_edges());
    for (std::int32_t v : g.edge_data) {
      REQUIRE(v >= 0);
      REQUIRE(v < 100);
    }
  }
  CHECK(std::abs(sum / reps - 200.0) < 3.0 * std::sqrt(200.0 / reps));
}

TEST_CASE("coupled sampler endpoints and marginals") {
  const CoupledInstance full = sample_coupled(4, 2.0, 60, 1.0, 3);
  CHECK(full.private_edges_1.empty());
  CHECK(full.private_edges_2.empty());

  const CoupledInstance none = sample_coupled(4, 2.0, 60, 0.0, 3);
  CHECK(none.shared_edges.empty());
  for (std::uint8_t s : none.shared_vertex) CHECK(s == 0);

  const CoupledInstance ci = sample_coupled(4, 2.0, 60, 0.4, 8);
  std::vector<std::uint8_t> incident(60, 0);
  for (std::size_t i = 0; i + 3 < ci.shared_edges.size(); i += 4)
    for (int j = 0; j < 4; ++j) incident[ci.shared_edges[i + j]] = 1;
  CHECK(incident == ci.shared_vertex);

  const Hypergraph g1 = coupled_view(ci, 1);
  CHECK(g1.num_edges() ==
        (ci.shared_edges.size() + ci.private_edges_1.size()) / 4);

  double sum = 0.0;
  const int reps = 2000;
  for (int i = 0; i < reps; ++i) {
    const CoupledInstance c = sample_coupled(4, 2.0, 100, 0.5,
                                             derive_seed(6, "cm", i));
    sum += static_cast<double>(coupled_view(c, 1).num_edges());
  }
  CHECK(std::abs(sum / reps - 200.0) < 3.0 * std::sqrt(200.0 / reps));
}

TEST_CASE("mean-field energies: symmetry, moments, covariance") {
  const MeanFieldInstance mf = sample_mean_field(4, 10, 21);
  Rng rng(77);
  for (int rep = 0; rep < 20; ++rep) {
    SpinConfig s = random_spins(10, rng);
    CHECK(mf_energy(mf, s) == mf_energy(mf, -s));
  }
  const MeanFieldInstance again = sample_mean_field(4, 10, 21);
  CHECK((mf.couplings == again.couplings).all());

  CHECK_THROWS_AS(sample_mean_field(4, 10, 1, 100), ResourceError);

  const int reps = 2000;
  SpinConfig s0 = all_plus(10);
  double sum = 0.0;
  for (int i = 0; i < reps; ++i) {
    const MeanFieldInstance m = sample_mean_field(4, 10, derive_seed(9, "mf", i));
    sum += mf_energy(m, s0);
  }
  CHECK(std::abs(sum / reps) < 3.0 * std::sqrt(10.0 / reps));

  // covariance in the overlap: E H(a) H(b) = n R^k
  const int n = 12;
  for (double r : {0.0, 0.5, 1.0}) {
    SpinConfig a = all_plus(n), b = all_plus(n);
    const int flips = static_cast<int>(std::lround((1.0 - r) * n / 2.0));
    for (int i = 0; i < flips; ++i) b[i] = -1;
    REQUIRE(overlap(a, b) == doctest::Approx(r));
    double acc = 0.0;
    for (int i = 0; i < reps; ++i) {
      const MeanFieldInstance m =
          sample_mean_field(4, n, derive_seed(13, "cov", i));
      acc += mf_energy(m, a) * mf_energy(m, b) / n;
    }
    const double se = std::sqrt((1.0 + std::pow(r, 8.0)) / reps);
    CHECK(std::abs(acc / reps - std::pow(r, 4.0)) < 3.0 * se);
  }
}

TEST_CASE("coupled trees: endpoint structure and offspring mean") {
  for (int rep = 0; rep < 50; ++rep) {
    const CoupledGwTree t0 = sample_coupled_gw(4, 1.0, 0.0, 2,
                                               derive_seed(1, "t0", rep));
    CHECK(t0.nodes[0].shared == 0);
    for (const GwEdge& e : t0.edges) CHECK(e.view != 0);

    const CoupledGwTree t1 = sample_coupled_gw(4, 1.0, 1.0, 2,
                                               derive_seed(1, "t1", rep));
    std::set<std::int32_t> touched;
    for (const GwEdge& e : t1.edges) {
      CHECK(e.view == 0);
      touched.insert(e.vertices.begin(), e.vertices.end());
    }
    for (std::int32_t v : touched) {
      CHECK(t1.nodes[v].shared == 1);
      CHECK(t1.nodes[v].x1 == t1.nodes[v].x2);
    }
  }

  double sum = 0.0;
  const int reps = 5000;
  for (int i = 0; i < reps; ++i) {
    const CoupledGwTree t = sample_coupled_gw(4, 1.0, 0.5, 1,
                                              derive_seed(2, "gw", i));
    int root_edges = 0;
    for (const GwEdge& e : t.edges)
      if (e.vertices[0] == 0) ++root_edges;
    sum += root_edges;
  }
  // mean t*lambda*k + 2(1-t)*lambda*k = 6
  CHECK(std::abs(sum / reps - 6.0) < 3.0 * std::sqrt(6.0 / reps));
}

TEST_CASE("tree views carry the right labels") {
  const CoupledGwTree t = sample_coupled_gw(4, 1.5, 0.5, 2, 44);
  const TreeView v1 = tree_view(t, 1);
  const TreeView v2 = tree_view(t, 2);
  CHECK(v1.root == 0);
  CHECK(v2.root == 0);
  for (const GwEdge& e : t.edges) {
    if (e.view == 1) CHECK(v2.graph.num_edges() <= t.edges.size());
  }
  for (int i = 0; i < v1.labels.size(); ++i) {
    REQUIRE(v1.labels[i] >= 0.0);
    REQUIRE(v1.labels[i] < 1.0);
  }
}

TEST_CASE("json round trips") {
  const Hypergraph g = sample_er(4, 1.0, 12, 5);
  const Hypergraph g2 = hypergraph_from_json(hypergraph_to_json(g));
  CHECK(g2.n == g.n);
  CHECK(g2.k == g.k);
  CHECK(g2.edge_data == g.edge_data);

  const CoupledInstance ci = sample_coupled(4, 1.0, 12, 0.5, 5);
  const CoupledInstance ci2 = coupled_from_json(coupled_to_json(ci));
  CHECK(ci2.t == ci.t);
  CHECK(ci2.shared_edges == ci.shared_edges);
  CHECK(ci2.private_edges_1 == ci.private_edges_1);
  CHECK(ci2.private_edges_2 == ci.private_edges_2);
  CHECK(ci2.shared_vertex == ci.shared_vertex);

  SpinConfig s(4);
  s << 1, -1, -1, 1;
  const SpinConfig s2 = spins_from_json(spins_to_json(s));
  CHECK((s2 == s).all());

  CHECK(spins_from_mask(0b101, 3)[0] == 1);
  CHECK(spins_from_mask(0b101, 3)[1] == -1);
  CHECK(spins_from_mask(0b101, 3)[2] == 1);

  CHECK(hash_hypergraph(g) == hash_hypergraph(g2));
  const MeanFieldInstance mf = sample_mean_field(4, 6, 1);
  CHECK(hash_mean_field(mf) == hash_mean_field(mf));
}
