#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "mgrid/vfa.hpp"

using namespace mgrid;

namespace {

/// Full pool-adjacent-violators isotonic regression (stack form), the
/// reference the single-violation projection is checked against.
std::vector<double> pav_oracle(const std::vector<double>& y) {
    struct Block {
        double sum;
        int count;
    };
    std::vector<Block> stack;
    for (double v : y) {
        stack.push_back({v, 1});
        while (stack.size() >= 2) {
            const Block& a = stack[stack.size() - 2];
            const Block& b = stack.back();
            if (a.sum / a.count <= b.sum / b.count) break;
            Block merged{a.sum + b.sum, a.count + b.count};
            stack.pop_back();
            stack.pop_back();
            stack.push_back(merged);
        }
    }
    std::vector<double> out;
    for (const Block& b : stack)
        for (int i = 0; i < b.count; ++i) out.push_back(b.sum / b.count);
    return out;
}

}  // namespace

TEST_CASE("evaluate") {
    PiecewiseLinearVfa v = PiecewiseLinearVfa::zeros(3, 15.0, 50.0, 35);

    SUBCASE("empty fill at the left edge") {
        CHECK(v.evaluate(0, 15.0) == 0.0);
    }
    SUBCASE("uniform slopes are linear") {
        for (auto& d : v.slopes[1]) d = 4.0;
        CHECK(v.evaluate(1, 22.5) == doctest::Approx(4.0 * 7.5).epsilon(1e-12));
        CHECK(v.evaluate(1, 50.0) == doctest::Approx(4.0 * 35.0).epsilon(1e-12));
    }
    SUBCASE("matches an explicit segment-fill oracle") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> inc(0.0, 5.0);
        std::uniform_real_distribution<double> q_dist(15.0, 50.0);
        double d = -40.0;
        for (auto& s : v.slopes[2]) {
            d += inc(rng);
            s = d;
        }
        for (int rep = 0; rep < 100; ++rep) {
            const double q = q_dist(rng);
            double expect = 0.0;
            double left = 15.0;
            const double w = v.width();
            for (int a = 0; a < 35; ++a) {
                const double fill = std::clamp(q - left, 0.0, w);
                expect += v.slopes[2][static_cast<size_t>(a)] * fill;
                left += w;
            }
            CHECK(v.evaluate(2, q) == doctest::Approx(expect).epsilon(1e-12));
        }
    }
    SUBCASE("rejects out-of-range queries") {
        CHECK_THROWS_AS(v.evaluate(0, 14.0), std::out_of_range);
        CHECK_THROWS_AS(v.evaluate(0, 51.0), std::out_of_range);
    }
    SUBCASE("convex in q for monotone slopes") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> inc(0.0, 3.0);
        std::uniform_real_distribution<double> q_dist(15.0, 50.0);
        double d = -20.0;
        for (auto& s : v.slopes[0]) {
            d += inc(rng);
            s = d;
        }
        for (int rep = 0; rep < 200; ++rep) {
            const double q1 = q_dist(rng);
            const double q2 = q_dist(rng);
            const double mid = 0.5 * (q1 + q2);
            CHECK(v.evaluate(0, mid) <=
                  0.5 * (v.evaluate(0, q1) + v.evaluate(0, q2)) + 1e-9);
        }
    }
}

TEST_CASE("spar projection") {
    SUBCASE("monotone input is untouched") {
        std::vector<double> d = {1.0, 2.0, 3.0, 4.0};
        spar_project(d, 2);
        CHECK(d == std::vector<double>{1.0, 2.0, 3.0, 4.0});
    }
    SUBCASE("downward violation pools left") {
        std::vector<double> d = {1.0, 5.0, 2.0};
        spar_project(d, 2);
        CHECK(d[0] == 1.0);
        CHECK(d[1] == doctest::Approx(3.5));
        CHECK(d[2] == doctest::Approx(3.5));
    }
    SUBCASE("pooling can reach the front") {
        std::vector<double> d = {4.0, 2.0, 3.0};
        spar_project(d, 1);
        CHECK(d[0] == doctest::Approx(3.0));
        CHECK(d[1] == doctest::Approx(3.0));
        CHECK(d[2] == doctest::Approx(3.0));
    }
    SUBCASE("upward violation pools right") {
        std::vector<double> d = {1.0, 6.0, 2.0, 3.0};
        spar_project(d, 1);
        CHECK(d[0] == 1.0);
        CHECK(d[1] == doctest::Approx(11.0 / 3.0));
        CHECK(d[2] == doctest::Approx(11.0 / 3.0));
        CHECK(d[3] == doctest::Approx(11.0 / 3.0));
    }
    SUBCASE("matches the PAV oracle on random single-violation inputs") {
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> inc(0.01, 2.0);
        std::uniform_real_distribution<double> bump(-8.0, 8.0);
        for (int rep = 0; rep < 1000; ++rep) {
            const int n = 3 + static_cast<int>(rng() % 12);
            std::vector<double> d(static_cast<size_t>(n));
            double v = -5.0;
            for (auto& x : d) {
                v += inc(rng);
                x = v;
            }
            const int idx = static_cast<int>(rng() % static_cast<size_t>(n));
            d[static_cast<size_t>(idx)] += bump(rng);
            std::vector<double> mine = d;
            spar_project(mine, idx);
            const std::vector<double> expect = pav_oracle(d);
            REQUIRE(mine.size() == expect.size());
            for (size_t i = 0; i < mine.size(); ++i)
                CHECK_MESSAGE(mine[i] == doctest::Approx(expect[i]).epsilon(1e-12), "rep ",
                              rep, " i ", i);
        }
    }
}

TEST_CASE("slope updates") {
    const StepsizeRule rule{20.0};

    SUBCASE("harmonic closed form holds exactly") {
        for (int n = 1; n <= 1000; ++n)
            CHECK(rule.alpha(n) * (rule.a_h + n - 1) == doctest::Approx(rule.a_h).epsilon(1e-14));
        CHECK(rule.alpha(1) == 1.0);
    }
    SUBCASE("first update copies the observation") {
        PiecewiseLinearVfa v = PiecewiseLinearVfa::zeros(1, 15.0, 50.0, 35);
        update_slope(v, 0, 0, -42.0, 1, rule);  // leftmost: no projection kicks in
        CHECK(v.slopes[0][0] == -42.0);
        CHECK(v.rows_monotone());
    }
    SUBCASE("an interior first update is pooled by the projection") {
        PiecewiseLinearVfa v = PiecewiseLinearVfa::zeros(1, 15.0, 50.0, 35);
        update_slope(v, 0, 7, -42.0, 1, rule);
        CHECK(v.slopes[0][7] == doctest::Approx(-42.0 / 8.0));
        CHECK(v.slopes[0][0] == doctest::Approx(-42.0 / 8.0));
        CHECK(v.rows_monotone());
    }
    SUBCASE("harmonic blend arithmetic") {
        StepsizeRule half{20.0};  // alpha(21) = 20/40 = 0.5
        PiecewiseLinearVfa v = PiecewiseLinearVfa::zeros(1, 15.0, 50.0, 2);
        v.slopes[0] = {10.0, 30.0};
        update_slope(v, 0, 0, 20.0, 21, half);
        CHECK(v.slopes[0][0] == doctest::Approx(15.0));
        CHECK(v.slopes[0][1] == 30.0);
    }
    SUBCASE("monotonicity survives ten thousand random cycles exactly") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> obs(-120.0, 120.0);
        PiecewiseLinearVfa v = PiecewiseLinearVfa::zeros(4, 15.0, 50.0, 35);
        for (int n = 1; n <= 10000; ++n) {
            const int period = static_cast<int>(rng() % 4);
            const int seg = static_cast<int>(rng() % 35);
            update_slope(v, period, seg, obs(rng), n, rule);
            const auto& row = v.slopes[static_cast<size_t>(period)];
            for (size_t a = 0; a + 1 < row.size(); ++a) REQUIRE(row[a] <= row[a + 1]);
        }
        CHECK(v.rows_monotone());
    }
}

TEST_CASE("json persistence") {
    PiecewiseLinearVfa v = PiecewiseLinearVfa::zeros(5, 15.0, 50.0, 35);
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> inc(0.0, 1.0);
    for (auto& row : v.slopes) {
        double d = -30.0 + inc(rng);
        for (auto& s : row) {
            d += inc(rng);
            s = d;
        }
    }
    const std::string text = v.to_json();
    const PiecewiseLinearVfa back = PiecewiseLinearVfa::from_json(text);
    CHECK(back.q_min == v.q_min);
    CHECK(back.q_max == v.q_max);
    CHECK(back.segment_count == v.segment_count);
    REQUIRE(back.slopes.size() == v.slopes.size());
    for (size_t t = 0; t < v.slopes.size(); ++t)
        for (size_t a = 0; a < v.slopes[t].size(); ++a)
            CHECK(back.slopes[t][a] == v.slopes[t][a]);
    // identical serialization both ways
    CHECK(back.to_json() == text);

    SUBCASE("file round trip") {
        const std::string path = "vfa_test_roundtrip.json";
        v.save(path);
        const PiecewiseLinearVfa loaded = PiecewiseLinearVfa::load(path);
        CHECK(loaded.to_json() == text);
        std::remove(path.c_str());
    }
    SUBCASE("version is enforced") {
        CHECK_THROWS(PiecewiseLinearVfa::from_json("{\"version\": 2}"));
    }
}
