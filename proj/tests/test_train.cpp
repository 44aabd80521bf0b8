#include "doctest.h"

#include <cmath>
#include <random>

#include "rnm/train.hpp"
#include "support/oracles.hpp"

using namespace rnm;

namespace {

// forall x : A(x) implies B(x) over n multi-label patterns; per-pattern
// 2-atom cliques with (n+, n-) = (3, 1)
struct ImplicationFixture {
    kb::KnowledgeBase kb;
    data::Dataset ds;
    grounding::GroundNetwork network;

    explicit ImplicationFixture(int n) {
        kb = kb::parse_kb(
            "domain d = {}\n"
            "pred A(d) learnable\npred B(d) learnable\n"
            "rule : forall x : A(x) implies B(x)\n");
        ds = oracle::toy_dataset(n, {"A", "B"});
        ds.pattern_domain = "d";
        network = grounding::ground_network(kb, ds);
    }

    grounding::World world_with(int satisfied) const {
        // first `satisfied` patterns get (A=1,B=1), the rest (A=1,B=0)
        grounding::World world;
        world.values.assign(network.table.size(), 0);
        for (size_t p = 0; p < ds.size(); ++p) {
            world.values[network.table.groups[p][0]] = 1;
            world.values[network.table.groups[p][1]] = static_cast<int>(p) < satisfied ? 1 : 0;
        }
        return world;
    }
};

// numerically maximize the piecewise log-likelihood over lambda (golden
// section on a concave function)
double maximize_pl(const grounding::FormulaGrounding& fg,
                   const grounding::ConstraintStats& stats, const grounding::World& world) {
    double lo = -60, hi = 60;
    const double phi = (std::sqrt(5.0) - 1) / 2;
    double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
    auto value = [&](double l) { return train::pl_log_likelihood(fg, stats, world, l); };
    double fa = value(a), fb = value(b);
    for (int it = 0; it < 200; ++it) {
        if (fa < fb) {
            lo = a;
            a = b;
            fa = fb;
            b = lo + phi * (hi - lo);
            fb = value(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - phi * (hi - lo);
            fa = value(a);
        }
    }
    return (lo + hi) / 2;
}

}  // namespace

TEST_CASE("local partition closed form") {
    grounding::ConstraintStats stats;
    stats.n_plus = 3;
    stats.n_minus = 1;
    CHECK(train::local_partition(stats, 0.0) == doctest::Approx(4.0));
    CHECK(train::local_partition(stats, std::log(3.0)) == doctest::Approx(10.0));
    CHECK(std::exp(train::log_local_partition(stats, 2.5)) ==
          doctest::Approx(train::local_partition(stats, 2.5)));
    // lambda = 0 always gives 2^n
    grounding::ConstraintStats wide;
    wide.n_plus = 11;
    wide.n_minus = 21;
    CHECK(train::local_partition(wide, 0.0) == doctest::Approx(32.0));
}

TEST_CASE("expected satisfaction") {
    grounding::ConstraintStats stats;
    stats.n_plus = 3;
    stats.n_minus = 1;
    SUBCASE("prior at lambda = 0, cross-checked by enumerating the 4 rows") {
        CHECK(train::expected_satisfaction(stats, 0.0) == doctest::Approx(0.75));
        double z = 0, e = 0;
        for (int row = 0; row < 4; ++row) {
            bool sat = row != 2;  // A=1,B=0 is the unique falsifier of A=>B
            z += std::exp(0.0);
            e += sat ? 1.0 : 0.0;
        }
        CHECK(train::expected_satisfaction(stats, 0.0) == doctest::Approx(e / z));
    }
    SUBCASE("limits") {
        CHECK(train::expected_satisfaction(stats, -50.0) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(train::expected_satisfaction(stats, 50.0) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("closed-form lambda inverts back to the average") {
        double lambda = std::log(0.9 / 0.1) - std::log(3.0);
        CHECK(train::expected_satisfaction(stats, lambda) == doctest::Approx(0.9));
    }
}

TEST_CASE("lambda closed form") {
    grounding::ConstraintStats stats;
    stats.formula = 0;
    stats.n_plus = 3;
    stats.n_minus = 1;
    CHECK(train::lambda_closed_form(0.75, stats) == doctest::Approx(0.0));
    CHECK(train::lambda_closed_form(0.9, stats) == doctest::Approx(std::log(3.0)));
    double eps = 1e-4;
    CHECK(train::lambda_closed_form(1.0, stats, eps) ==
          doctest::Approx(std::log((1 - eps) / eps) - std::log(3.0)));
    grounding::ConstraintStats degenerate;
    degenerate.n_plus = 4;
    degenerate.n_minus = 0;
    CHECK_THROWS(train::lambda_closed_form(0.5, degenerate));
}

TEST_CASE("grad_lambda and the closed form agree with the numerical maximizer") {
    ImplicationFixture fx(8);
    const auto& fg = fx.network.by_formula[0];
    const auto& stats = fx.network.stats[0];

    SUBCASE("lambda = 0, all satisfied, |G| = 4 -> gradient 1 per spec example") {
        ImplicationFixture small(4);
        auto world = small.world_with(4);
        CHECK(train::grad_lambda(small.network.by_formula[0], small.network.stats[0], world,
                                 0.0) == doctest::Approx(4.0 - 4.0 * 0.75));
    }
    SUBCASE("stationarity at the closed form") {
        for (int satisfied = 1; satisfied < 8; ++satisfied) {
            auto world = fx.world_with(satisfied);
            double avg = grounding::average_satisfaction(fg, world);
            double lambda = train::lambda_closed_form(avg, stats, 1e-12);
            CHECK(std::abs(train::grad_lambda(fg, stats, world, lambda)) < 1e-10);
            // and it matches the independent golden-section maximizer
            double numeric = maximize_pl(fg, stats, world);
            CHECK(std::abs(lambda - numeric) < 1e-6);
        }
    }
    SUBCASE("finite differences of the piecewise log-likelihood") {
        auto world = fx.world_with(5);
        for (double lambda : {-2.0, -0.5, 0.0, 0.7, 3.0}) {
            double fd = oracle::central_difference(
                [&](double l) { return train::pl_log_likelihood(fg, stats, world, l); },
                lambda, 1e-5);
            CHECK(oracle::relative_error(train::grad_lambda(fg, stats, world, lambda), fd) <
                  1e-6);
        }
    }
}

TEST_CASE("pseudo-likelihood") {
    ImplicationFixture fx(4);
    const auto& fg = fx.network.by_formula[0];
    auto world = fx.world_with(2);

    SUBCASE("lambda = 0 gives 0.5 factors") {
        for (int atom = 0; atom < 8; ++atom)
            CHECK(train::pseudo_likelihood_prob(fg, world, atom, 0.0) == doctest::Approx(0.5));
    }
    SUBCASE("factor matches the direct flip evaluation") {
        for (double lambda : {-1.0, 0.3, 2.0}) {
            for (int atom = 0; atom < 8; ++atom) {
                double phi = grounding::potential_value(fg, world);
                grounding::World flipped = world;
                flipped.values[atom] ^= 1;
                double phi_flip = grounding::potential_value(fg, flipped);
                double expected = std::exp(lambda * phi) /
                                  (std::exp(lambda * phi) + std::exp(lambda * phi_flip));
                double got = train::pseudo_likelihood_prob(fg, world, atom, lambda);
                CHECK(got == doctest::Approx(expected).epsilon(1e-12));
                CHECK(got > 0.0);
                CHECK(got < 1.0);
            }
        }
    }
}

TEST_CASE("single-atom cliques: PPL equals PL and shares the optimum") {
    auto kb = kb::parse_kb(
        "domain d = {}\npred A(d) learnable\nrule : forall x : A(x)\n");
    auto ds = oracle::toy_dataset(10, {"A"});
    ds.pattern_domain = "d";
    auto network = grounding::ground_network(kb, ds);
    const auto& fg = network.by_formula[0];
    const auto& stats = network.stats[0];

    grounding::World world;
    world.values.assign(network.table.size(), 0);
    for (int p = 0; p < 7; ++p) world.values[p] = 1;  // 7 of 10 satisfied

    for (double lambda : {-1.5, 0.0, 0.8}) {
        // each PPL factor equals the PL probability of its grounding
        for (int atom = 0; atom < 10; ++atom) {
            double phi = world.values[atom];
            double pl = std::exp(lambda * phi) / train::local_partition(stats, lambda);
            CHECK(train::pseudo_likelihood_prob(fg, world, atom, lambda) ==
                  doctest::Approx(pl).epsilon(1e-12));
        }
        CHECK(train::ppl_log_likelihood(fg, world, lambda) ==
              doctest::Approx(train::pl_log_likelihood(fg, stats, world, lambda))
                  .epsilon(1e-12));
    }
    double ppl_opt = train::lambda_ppl_optimum(fg, world);
    double pl_opt = train::lambda_closed_form(0.7, stats, 1e-12);
    CHECK(ppl_opt == doctest::Approx(pl_opt).epsilon(1e-6));
}

TEST_CASE("piecewise log-likelihood is non-decreasing across lambda M-steps") {
    ImplicationFixture fx(10);
    const auto& fg = fx.network.by_formula[0];
    const auto& stats = fx.network.stats[0];
    auto world = fx.world_with(7);
    double lambda = 0.0;
    double prev = train::pl_log_likelihood(fg, stats, world, lambda);
    for (int step = 0; step < 3; ++step) {
        lambda = train::lambda_closed_form(grounding::average_satisfaction(fg, world), stats);
        double cur = train::pl_log_likelihood(fg, stats, world, lambda);
        CHECK(cur >= prev - 1e-12);
        prev = cur;
    }
}

TEST_CASE("exact factorization: disjoint cliques multiply to the true partition") {
    // two rules over disjoint atom sets, 4 patterns x 4 atoms = 16 variables
    auto kb = kb::parse_kb(
        "domain d = {}\n"
        "pred A(d) learnable\npred B(d) learnable\npred C(d) learnable\npred E(d) learnable\n"
        "rule : forall x : A(x) implies B(x)\n"
        "rule : forall x : C(x) and E(x)\n");
    auto ds = oracle::toy_dataset(4, {"A", "B", "C", "E"});
    ds.pattern_domain = "d";
    auto network = grounding::ground_network(kb, ds);

    std::vector<double> lambda = {0.9, -0.4};
    grounding::World unobserved;
    unobserved.values.assign(network.table.size(), grounding::World::kUnknown);
    std::vector<double> f_atom(network.table.size(), 0.0);  // phi0 absent

    double z_exact = oracle::brute_force_partition(network, f_atom, lambda, unobserved);
    double z_piecewise = 1.0;
    for (size_t c = 0; c < network.stats.size(); ++c)
        for (size_t g = 0; g < network.by_formula[c].groundings.size(); ++g)
            z_piecewise *= train::local_partition(network.stats[c], lambda[c]);
    CHECK(oracle::relative_error(z_piecewise, z_exact) < 1e-10);
}

TEST_CASE("em_train with no rules reproduces supervised training exactly") {
    auto kb_with_rule = kb::parse_kb(
        "domain images = {}\n"
        "domain digits = {0,1,2,3,4,5,6,7,8,9}\n"
        "pred digit(images, digits) learnable\n"
        "pred link(images, images) evidence\n"
        "rule : forall x forall y forall i forall j : link(x,y) and digit(x,i) and digit(y,j) implies succ(i,j)\n");
    kb::KnowledgeBase kb_empty = kb_with_rule;
    kb_empty.formulas.clear();

    auto ds = data::generate_following_pairs(20, {1.0, 3});
    train::TrainConfig config;
    config.max_iterations = 4;
    config.optimizer.epochs_per_step = 2;
    config.net.hidden_dims = {16};
    config.seed = 99;

    config.mode = train::TrainMode::RnmEm;
    auto em_state = train::em_train(kb_empty, ds, config);
    config.mode = train::TrainMode::Baseline;
    auto baseline_state = train::em_train(kb_with_rule, ds, config);

    REQUIRE(em_state.log.size() == baseline_state.log.size());
    for (size_t i = 0; i < em_state.log.size(); ++i) {
        CHECK(std::abs(em_state.log[i].train_loss - baseline_state.log[i].train_loss) < 1e-9);
        CHECK(em_state.log[i].train_accuracy == baseline_state.log[i].train_accuracy);
    }
    CHECK(em_state.mlp.weights == baseline_state.mlp.weights);  // bit-identical
}

TEST_CASE("fully observed world: lambda lands on the data satisfaction closed form") {
    auto kb = kb::parse_kb(
        "domain images = {}\n"
        "domain digits = {0,1,2,3,4,5,6,7,8,9}\n"
        "pred digit(images, digits) learnable\n"
        "pred link(images, images) evidence\n"
        "rule : forall x forall y forall i forall j : link(x,y) and digit(x,i) and digit(y,j) implies succ(i,j)\n");
    auto ds = data::generate_following_pairs(20, {0.5, 8});
    train::TrainConfig config;
    config.max_iterations = 3;
    config.optimizer.epochs_per_step = 1;
    config.net.hidden_dims = {8};
    config.seed = 5;

    auto state = train::em_train(kb, ds, config);
    auto network = grounding::ground_network(kb, ds);
    auto world = grounding::full_world(network.table, ds);
    double avg = grounding::average_satisfaction(network.by_formula[0], world);
    double expected = train::lambda_closed_form(avg, network.stats[0], config.epsilon);
    CHECK(state.lambda[0] == doctest::Approx(expected).epsilon(1e-12));
    // log has one row per iteration with the same lambda after step one
    for (const auto& rec : state.log) CHECK(rec.lambda[0] == doctest::Approx(expected));
}

TEST_CASE("sbr/ltn training") {
    auto kb_fixed = kb::parse_kb(
        "domain d = {}\n"
        "pred A(d) learnable\npred B(d) learnable\n"
        "rule @fixed(0.0) : forall x : A(x) implies B(x)\n");
    auto kb_trainable = kb::parse_kb(
        "domain d = {}\n"
        "pred A(d) learnable\npred B(d) learnable\n"
        "rule : forall x : A(x) implies B(x)\n");
    auto ds = oracle::toy_dataset(12, {"A", "B"});
    ds.pattern_domain = "d";
    // supervise half the patterns with alternating labels
    for (int p = 0; p < 6; ++p) {
        ds.y[p] = {static_cast<int8_t>(p % 2), static_cast<int8_t>((p + 1) % 2)};
        ds.y_observed[p] = {1, 1};
    }

    SUBCASE("trainable rules are rejected") {
        train::TrainConfig config;
        CHECK_THROWS_WITH_AS(train::sbr_ltn_train(kb_trainable, ds, config),
                             doctest::Contains("fixed"), std::runtime_error);
    }
    SUBCASE("lambda = 0 equals baseline training") {
        train::TrainConfig config;
        config.max_iterations = 3;
        config.optimizer.epochs_per_step = 2;
        config.net.hidden_dims = {6};
        config.seed = 17;
        config.mode = train::TrainMode::Sbr;
        auto sbr_state = train::sbr_ltn_train(kb_fixed, ds, config);
        config.mode = train::TrainMode::Baseline;
        auto base_state = train::em_train(kb_fixed, ds, config);
        CHECK(sbr_state.mlp.weights == base_state.mlp.weights);
    }
    SUBCASE("objective gradient matches finite differences") {
        auto network = grounding::ground_network(kb_fixed, ds);
        net::Mlp mlp = net::make_mlp({1, 5, 2}, {net::Activation::Sigmoid}, 3);
        std::vector<double> lambda = {1.3};
        std::vector<std::vector<double>> grads;
        train::sbr_objective(network, ds, mlp, lambda, fuzzy::TNorm::Product, &grads);
        for (size_t l = 0; l < grads.size(); ++l) {
            for (size_t k = 0; k < grads[l].size(); ++k) {
                double fd = oracle::central_difference(
                    [&](double w) {
                        net::Mlp m = mlp;
                        m.weights[l][k] = w;
                        return train::sbr_objective(network, ds, m, lambda,
                                                    fuzzy::TNorm::Product);
                    },
                    mlp.weights[l][k], 1e-6);
                if (std::abs(fd) < 1e-8 && std::abs(grads[l][k]) < 1e-8) continue;
                CHECK(oracle::relative_error(grads[l][k], fd) < 1e-4);
            }
        }
    }
}
