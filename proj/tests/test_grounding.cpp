#include "doctest.h"

#include <random>
#include <set>

#include "rnm/grounding.hpp"
#include "rnm/kb.hpp"
#include "support/oracles.hpp"

using namespace rnm;

namespace {

const char* kPairsKb = R"(
domain images = {}
domain digits = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}
pred digit(images, digits) learnable
pred link(images, images) evidence
rule : forall x forall y forall i forall j : link(x,y) and digit(x,i) and digit(y,j) implies succ(i,j)
)";

kb::KnowledgeBase citeseer_toy_kb() {
    return kb::parse_kb(
        "domain papers = {}\n"
        "pred AG(papers) learnable\n"
        "pred AI(papers) learnable\n"
        "pred Cite(papers, papers) evidence\n"
        "rule : forall p1 forall p2 : AG(p1) and Cite(p1,p2) implies AG(p2)\n");
}

data::Dataset paper_dataset(int n, const std::vector<std::pair<int, int>>& edges) {
    auto ds = oracle::toy_dataset(n, {"AG", "AI"});
    ds.pattern_domain = "papers";
    for (auto [a, b] : edges)
        ds.evidence.push_back(
            {"Cite", {"p" + std::to_string(a), "p" + std::to_string(b)}, true});
    return ds;
}

}  // namespace

TEST_CASE("atom table layout: 2 patterns x 3 unary predicates -> indices 0..5") {
    auto kb = kb::parse_kb(oracle::toy_kb_header(3));
    auto ds = oracle::toy_dataset(2, {"A0", "A1", "A2"});
    auto table = grounding::build_atom_table(kb, ds);
    CHECK(table.n_learnable == 6);
    CHECK(table.atoms.size() == 6);
    CHECK(table.heads.size() == 3);
    // lexicographic: predicate-major, then constant order
    CHECK(table.atom_name(0) == "A0(p0)");
    CHECK(table.atom_name(1) == "A0(p1)");
    CHECK(table.atom_name(5) == "A2(p1)");
    // groups gather the per-pattern atoms in head order
    REQUIRE(table.groups.size() == 2);
    CHECK(table.groups[0] == std::vector<int>{0, 2, 4});
    CHECK(table.groups[1] == std::vector<int>{1, 3, 5});
}

TEST_CASE("evidence atom with undeclared constant is an error") {
    auto kb = citeseer_toy_kb();
    auto ds = paper_dataset(2, {});
    ds.evidence.push_back({"Cite", {"pX", "p0"}, true});
    CHECK_THROWS_WITH_AS(grounding::build_atom_table(kb, ds), doctest::Contains("pX"),
                         std::runtime_error);
}

TEST_CASE("forall x : A(x) over 5 constants -> 5 single-atom groundings") {
    auto kb = kb::parse_kb(oracle::toy_kb_header(1) + "rule : forall x : A0(x)\n");
    auto ds = oracle::toy_dataset(5, {"A0"});
    auto table = grounding::build_atom_table(kb, ds);
    auto fg = grounding::ground_formula(kb, kb.formulas[0], table);
    CHECK(fg.groundings.size() == 5);
    CHECK(fg.n_total == 5);
    CHECK(fg.n_const_true == 0);
    for (const auto& g : fg.groundings) CHECK(g.atom_indices.size() == 1);
    REQUIRE(fg.table_counts);
    CHECK(fg.table_counts->first == 1);
    CHECK(fg.table_counts->second == 1);
}

TEST_CASE("formula-level truth table counts") {
    auto kb = kb::parse_kb(
        "domain d = {a}\n"
        "pred A(d) learnable\npred B(d) learnable\n"
        "rule : forall x : A(x) implies B(x)\n"
        "rule : forall x : A(x) and B(x)\n");
    auto c0 = grounding::truth_table_counts(kb, kb.formulas[0]);
    CHECK(c0.first == 3);
    CHECK(c0.second == 1);
    auto c1 = grounding::truth_table_counts(kb, kb.formulas[1]);
    CHECK(c1.first == 1);
    CHECK(c1.second == 3);
}

TEST_CASE("citation rule: evidence folding leaves a 2-atom (3,1) residual") {
    auto kb = citeseer_toy_kb();
    auto ds = paper_dataset(4, {{0, 1}, {1, 2}, {2, 0}});
    auto network = grounding::ground_network(kb, ds);
    const auto& fg = network.by_formula[0];
    CHECK(fg.n_total == 16);
    CHECK(fg.groundings.size() == 3);  // one per Cite edge
    CHECK(fg.n_const_true == 13);      // all false-guard pairs
    REQUIRE(fg.table_counts);
    CHECK(fg.table_counts->first == 3);
    CHECK(fg.table_counts->second == 1);
    CHECK(network.stats[0].n_plus == 3);
    CHECK(network.stats[0].n_minus == 1);
    CHECK(network.stats[0].n_groundings == 3);
}

TEST_CASE("self-citation grounds to a folded tautology") {
    auto kb = citeseer_toy_kb();
    auto ds = paper_dataset(2, {{0, 0}});
    auto network = grounding::ground_network(kb, ds);
    const auto& fg = network.by_formula[0];
    // AG(p0) and Cite(p0,p0) implies AG(p0) is constant-true after dedup
    CHECK(fg.groundings.empty());
    CHECK(fg.n_const_true == 4);
}

TEST_CASE("potential_value and averages") {
    auto kb = citeseer_toy_kb();
    auto ds = paper_dataset(3, {{0, 1}, {1, 2}});
    auto network = grounding::ground_network(kb, ds);
    grounding::World world;
    world.values.assign(network.table.size(), 0);
    // atoms: AG(p0..p2)=0..2, AI(p0..p2)=3..5, Cite edges after
    for (size_t a = network.table.n_learnable; a < network.table.size(); ++a)
        world.values[a] = 1;

    SUBCASE("all groundings satisfied") {
        world.values[0] = world.values[1] = world.values[2] = 1;  // all AG true
        double phi = grounding::potential_value(network.by_formula[0], world);
        CHECK(phi == doctest::Approx(9.0));  // 7 const-true + 2 satisfied
        CHECK(grounding::average_satisfaction(network.by_formula[0], world) == 1.0);
    }
    SUBCASE("one violated grounding") {
        world.values[0] = 1;
        world.values[1] = 0;  // AG(p0) and Cite(p0,p1) but not AG(p1)
        world.values[2] = 0;
        double phi = grounding::potential_value(network.by_formula[0], world);
        CHECK(phi == doctest::Approx(8.0));
        CHECK(grounding::average_satisfaction(network.by_formula[0], world) ==
              doctest::Approx(0.5));
    }
    SUBCASE("unobserved atom is an error") {
        world.values[0] = grounding::World::kUnknown;
        CHECK_THROWS(grounding::potential_value(network.by_formula[0], world));
    }
}

TEST_CASE("pruning preserves the potential against the literal grounding") {
    oracle::Rng rng(3);
    auto kb = citeseer_toy_kb();
    std::uniform_int_distribution<int> node(0, 4);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::pair<int, int>> edges;
        for (int k = 0; k < 4; ++k) edges.push_back({node(rng), node(rng)});
        auto ds = paper_dataset(5, edges);
        grounding::GroundingOptions pruned{true, 10'000'000, 20};
        grounding::GroundingOptions literal{false, 10'000'000, 20};
        auto np = grounding::ground_network(kb, ds, pruned);
        auto nl = grounding::ground_network(kb, ds, literal);
        // literal mode keeps listed evidence atoms as clique variables; pairs
        // with no Cite atom are closed-world false, self-pairs are tautologies
        size_t distinct_nonself = 0;
        {
            std::set<std::pair<int, int>> seen;
            for (auto [a, b] : edges)
                if (a != b) seen.insert({a, b});
            distinct_nonself = seen.size();
        }
        CHECK(nl.by_formula[0].groundings.size() == distinct_nonself);
        CHECK(nl.by_formula[0].n_const_true + nl.by_formula[0].n_const_false +
                  nl.by_formula[0].groundings.size() ==
              25);
        grounding::World world;
        world.values.assign(np.table.size(), 0);
        for (auto& v : world.values) v = static_cast<int8_t>(coin(rng));
        for (size_t a = np.table.n_learnable; a < np.table.size(); ++a)
            world.values[a] = np.table.atoms[a].evidence_value ? 1 : 0;
        double pruned_phi = grounding::potential_value(np.by_formula[0], world);
        double literal_phi = grounding::potential_value(nl.by_formula[0], world);
        CHECK(pruned_phi == doctest::Approx(literal_phi));
        // materialized-only sum = literal total minus the folded constants
        double materialized = pruned_phi - static_cast<double>(np.by_formula[0].n_const_true);
        CHECK(materialized ==
              doctest::Approx(literal_phi -
                              static_cast<double>(np.by_formula[0].n_const_true)));
    }
}

TEST_CASE("following-pairs rule folds builtins and drives on the link relation") {
    auto kb = kb::parse_kb(kPairsKb);
    auto ds = data::generate_following_pairs(20, {1.0, 5});
    auto network = grounding::ground_network(kb, ds);
    const auto& fg = network.by_formula[0];
    // per link: 100 digit pairs, 9 folded true by succ, residual not(A and B)
    CHECK(fg.groundings.size() == ds.evidence.size() * 91);
    REQUIRE(fg.table_counts);
    CHECK(fg.table_counts->first == 3);
    CHECK(fg.table_counts->second == 1);
    CHECK(fg.n_total == 20ull * 20 * 10 * 10);

    // a fully observed consistent world satisfies every clique
    grounding::World world = grounding::full_world(network.table, ds);
    CHECK(grounding::average_satisfaction(fg, world) == doctest::Approx(1.0));
}

TEST_CASE("grounding is deterministic") {
    auto kb = kb::parse_kb(kPairsKb);
    auto ds = data::generate_following_pairs(20, {0.5, 9});
    auto n1 = grounding::ground_network(kb, ds);
    auto n2 = grounding::ground_network(kb, ds);
    REQUIRE(n1.by_formula[0].groundings.size() == n2.by_formula[0].groundings.size());
    for (size_t g = 0; g < n1.by_formula[0].groundings.size(); ++g)
        CHECK(n1.by_formula[0].groundings[g].atom_indices ==
              n2.by_formula[0].groundings[g].atom_indices);
    CHECK(grounding::dump_ground_network(n1) == grounding::dump_ground_network(n2));
}

TEST_CASE("grounding cap triggers on blow-up") {
    auto kb = citeseer_toy_kb();
    auto ds = paper_dataset(40, {});
    grounding::GroundingOptions tight;
    tight.prune = false;
    tight.cap = 100;  // 40^2 pairs exceed it
    CHECK_THROWS_WITH_AS(grounding::ground_formula(kb, kb.formulas[0],
                                                   grounding::build_atom_table(kb, ds), tight),
                         doctest::Contains("cap"), std::runtime_error);
}

TEST_CASE("exists quantifier expands into the clique") {
    auto kb = kb::parse_kb(
        "domain d = {}\n"
        "pred A(d) learnable\npred B(d) learnable\n"
        "rule : forall x exists y : A(x) implies B(y)\n");
    auto ds = oracle::toy_dataset(3, {"A", "B"});
    ds.pattern_domain = "d";
    auto table = grounding::build_atom_table(kb, ds);
    auto fg = grounding::ground_formula(kb, kb.formulas[0], table);
    CHECK(fg.groundings.size() == 3);  // one per x
    // each clique: A(x) implies (B(p0) or B(p1) or B(p2)) -> 4 distinct atoms,
    // falsified only by A=1 with every B=0
    for (const auto& g : fg.groundings) CHECK(g.atom_indices.size() == 4);
    REQUIRE(fg.table_counts);
    CHECK(fg.table_counts->first == 15);
    CHECK(fg.table_counts->second == 1);
}

TEST_CASE("mutual exclusivity of one-label groups is respected by worlds") {
    auto kb = kb::parse_kb(kPairsKb);
    auto ds = data::generate_following_pairs(20, {1.0, 2});
    auto network = grounding::ground_network(kb, ds);
    grounding::World world = grounding::full_world(network.table, ds);
    for (const auto& group : network.table.groups) {
        int positives = 0;
        for (int a : group) positives += world.values[a];
        CHECK(positives == 1);
    }
}
