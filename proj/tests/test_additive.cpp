#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracle.hpp"
#include "synergy/additive.hpp"

using namespace synergy;

TEST_CASE("rational arithmetic") {
    CHECK(Rational(2, 4) == Rational(1, 2));
    CHECK(Rational(3, -6) == Rational(-1, 2));
    CHECK(Rational(1, 2) < Rational(2, 3));
    CHECK(Rational(7).str() == "7");
    CHECK(Rational(3, 2).str() == "3/2");
    CHECK(parse_rational("3/4") == Rational(3, 4));
    CHECK(parse_rational("5") == Rational(5));
    CHECK_THROWS_AS(parse_rational("1.5"), usage_error);
    CHECK_THROWS_AS(parse_rational("x"), usage_error);
    CHECK_THROWS_AS(Rational(1, 0), usage_error);
}

TEST_CASE("additive joint structure") {
    // (2,2,1): X in {0,1,2} with probabilities {1/4, 1/2, 1/4}
    auto j = additive_joint(AdditiveModel(2, 2, Rational(1)));
    const auto& x = j.vars()[2];
    REQUIRE(x.symbols == std::vector<std::string>{"0", "1", "2"});
    auto px = j.marginalize({"X"});
    CHECK_THAT(px.probs()[0], Catch::Matchers::WithinAbs(0.25, 1e-15));
    CHECK_THAT(px.probs()[1], Catch::Matchers::WithinAbs(0.50, 1e-15));
    CHECK_THAT(px.probs()[2], Catch::Matchers::WithinAbs(0.25, 1e-15));

    // (3,3,3): all nine sums distinct
    auto j333 = additive_joint(AdditiveModel(3, 3, Rational(3)));
    CHECK(j333.vars()[2].size() == 9);

    // (3,3,2): counts {1,1,2,1,2,1,1}/9 over {0..6}
    auto j332 = additive_joint(AdditiveModel(3, 3, Rational(2)));
    REQUIRE(j332.vars()[2].size() == 7);
    auto px332 = j332.marginalize({"X"});
    const std::vector<int> counts = {1, 1, 2, 1, 2, 1, 1};
    for (std::size_t i = 0; i < counts.size(); ++i)
        CHECK_THAT(px332.probs()[i], Catch::Matchers::WithinAbs(counts[i] / 9.0, 1e-15));

    // fractional lambda keeps exact symbols
    auto jhalf = additive_joint(AdditiveModel(2, 2, Rational(1, 2)));
    CHECK(jhalf.vars()[2].symbols == std::vector<std::string>{"0", "1/2", "1", "3/2"});

    CHECK_THROWS_AS(AdditiveModel(1, 2, Rational(1)), usage_error);
    CHECK_THROWS_AS(AdditiveModel(2, 2, Rational(-1)), usage_error);
}

TEST_CASE("exact synergy values") {
    CHECK_THAT(additive_synergy_exact(AdditiveModel(2, 2, Rational(1))),
               Catch::Matchers::WithinAbs(0.34657359027997264, 1e-12));
    // synergy reduces to (1/(n_a n_c)) sum_v count_v ln count_v
    CHECK_THAT(additive_synergy_exact(AdditiveModel(3, 3, Rational(1))),
               Catch::Matchers::WithinAbs((4 * std::log(2.0) + 3 * std::log(3.0)) / 9.0, 1e-12));
    CHECK_THAT(additive_synergy_exact(AdditiveModel(3, 3, Rational(1))),
               Catch::Matchers::WithinAbs(0.6742695098049012, 1e-10));
    CHECK_THAT(additive_synergy_exact(AdditiveModel(3, 3, Rational(2))),
               Catch::Matchers::WithinAbs(0.30806541358219786, 1e-10));
    CHECK_THAT(additive_synergy_exact(AdditiveModel(3, 3, Rational(3))),
               Catch::Matchers::WithinAbs(0.0, 1e-12));
}

TEST_CASE("synergy agrees with the independent oracle across a lambda grid") {
    const std::vector<Rational> grid = {Rational(1),  Rational(2),  Rational(1, 2), Rational(3),
                                        Rational(1, 3), Rational(3, 2), Rational(2, 3), Rational(5),
                                        Rational(4),  Rational(5, 2)};
    for (int n_a = 2; n_a <= 5; ++n_a)
        for (int n_c = 2; n_c <= 5; ++n_c)
            for (const auto& l : grid) {
                auto d = oracle::additive_table(n_a, n_c, l.num, l.den);
                const double want = oracle::cmi(d, {"A"}, {"C"}, {"X"});
                CHECK_THAT(additive_synergy_exact(AdditiveModel(n_a, n_c, l)),
                           Catch::Matchers::WithinAbs(want, 1e-10));
            }
}

TEST_CASE("H(A|X,C) vanishes: synergy equals H(A|X)") {
    for (int n_a = 2; n_a <= 6; ++n_a)
        for (int n_c = 2; n_c <= 6; ++n_c) {
            AdditiveModel m(n_a, n_c, Rational(1));
            auto j = additive_joint(m);
            CHECK(conditional_entropy(j, {"A"}, {"X", "C"}) <= 1e-12);
            CHECK_THAT(additive_synergy_exact(m),
                       Catch::Matchers::WithinAbs(conditional_entropy(j, {"A"}, {"X"}), 1e-10));
        }
}

TEST_CASE("closed-form lower bound") {
    CHECK_THAT(additive_lower_bound(2, 2), Catch::Matchers::WithinAbs(0.34657359027997264, 1e-12));
    CHECK_THAT(additive_lower_bound(3, 3), Catch::Matchers::WithinAbs(0.5076028431382344, 1e-10));
    CHECK_THAT(additive_lower_bound(6, 3), Catch::Matchers::WithinAbs(0.8031075659031721, 1e-10));
    // limit: bracket term vanishes as n_a grows
    CHECK_THAT(additive_lower_bound(100000000, 3),
               Catch::Matchers::WithinAbs(std::log(3.0), 1e-7));
    CHECK_THROWS_AS(additive_lower_bound(2, 3), domain_error);
}

TEST_CASE("bound below exact, tight at n_c = 2") {
    for (int n_c = 2; n_c <= 8; ++n_c)
        for (int n_a = n_c; n_a <= 16; ++n_a) {
            const double exact = additive_synergy_exact(AdditiveModel(n_a, n_c, Rational(1)));
            const double bound = additive_lower_bound(n_a, n_c);
            CHECK(bound <= exact + 1e-10);
            if (n_c == 2) CHECK_THAT(bound, Catch::Matchers::WithinAbs(exact, 1e-10));
        }
    // n_c = 2 closed form: ln 2 (1 - 1/n_a)
    CHECK_THAT(additive_synergy_exact(AdditiveModel(4, 2, Rational(1))),
               Catch::Matchers::WithinAbs(std::log(2.0) * 0.75, 1e-12));
    CHECK_THAT(additive_synergy_exact(AdditiveModel(8, 2, Rational(1))),
               Catch::Matchers::WithinAbs(std::log(2.0) * 0.875, 1e-12));
}

TEST_CASE("lambda sweep prefers balanced mixing") {
    auto rows = lambda_sweep(3, 3, {Rational(1), Rational(2), Rational(3)});
    REQUIRE(rows.size() == 3);
    CHECK_THAT(rows[0].second, Catch::Matchers::WithinAbs(0.6742695098049012, 1e-10));
    CHECK_THAT(rows[1].second, Catch::Matchers::WithinAbs(0.30806541358219786, 1e-10));
    CHECK_THAT(rows[2].second, Catch::Matchers::WithinAbs(0.0, 1e-12));

    // synergy at lambda and 1/lambda coincide (isomorphic collision structure)
    auto sym = lambda_sweep(2, 2, {Rational(1, 2), Rational(1), Rational(2)});
    CHECK_THAT(sym[0].second, Catch::Matchers::WithinAbs(sym[2].second, 1e-12));

    CHECK_THROWS_AS(lambda_sweep(3, 3, {Rational(2), Rational(3)}), usage_error);

    // argmax contains lambda = 1 on a dense grid, for all square sizes
    std::vector<Rational> grid;
    for (int num = 1; num <= 5; ++num)
        for (int den = 1; den <= 4; ++den) grid.emplace_back(num, den);
    for (int n = 2; n <= 8; ++n) {
        auto sweep = lambda_sweep(n, n, grid);
        double best = -1.0;
        for (const auto& [l, s] : sweep) best = std::max(best, s);
        double at_one = 0.0;
        for (const auto& [l, s] : sweep)
            if (l == Rational(1)) at_one = s;
        CHECK(at_one >= best - 1e-12);
    }
}

TEST_CASE("action space sweep") {
    auto rows = action_space_sweep(2, {2, 4, 8});
    REQUIRE(rows.size() == 3);
    CHECK_THAT(rows[0].exact, Catch::Matchers::WithinAbs(0.34657359027997264, 1e-12));
    CHECK_THAT(rows[1].exact, Catch::Matchers::WithinAbs(0.5198603854199589, 1e-10));
    CHECK_THAT(rows[2].exact, Catch::Matchers::WithinAbs(0.6065037829899521, 1e-10));
    for (const auto& r : rows) CHECK(r.bound <= r.exact + 1e-10);
    CHECK(rows[0].bound < rows[1].bound);
    CHECK(rows[1].bound < rows[2].bound);

    auto rows3 = action_space_sweep(3, {3, 6});
    CHECK_THAT(rows3[0].bound, Catch::Matchers::WithinAbs(0.5076028431382344, 1e-10));
    CHECK_THAT(rows3[1].bound, Catch::Matchers::WithinAbs(0.8031075659031721, 1e-10));
}
