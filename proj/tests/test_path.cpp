#include <doctest.h>

#include <cmath>

#include "renorm/path.hpp"
#include "renorm/quad.hpp"

using namespace renorm;

namespace {
const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

Iet goldenIet() {
    return Iet({kGolden, 1.0 - kGolden}, Permutation::fromMonodromy({2, 1}));
}

BigInt fib(int n) {  // fib(1) = fib(2) = 1
    BigInt a = 0, b = 1;
    for (int i = 0; i < n; ++i) {
        BigInt t = a + b;
        a = b;
        b = t;
    }
    return a;
}
}  // namespace

TEST_CASE("empty window is the identity") {
    InductionLog log = recordInduction(goldenIet(), 10);
    CocycleWindow w = cocycleWindow(log, 3, 3);
    CHECK(w.matrix == BigMat::identity(2));
}

TEST_CASE("golden heights are consecutive Fibonacci numbers") {
    InductionLog log = recordInduction(goldenIet(), 40);
    for (int n = 1; n <= 30; ++n) {
        auto q = heightsAtZorich(log, n);
        // after n alternating steps heights are {F(n+1), F(n+2)} as a set
        BigInt lo = std::min(q[0], q[1]), hi = std::max(q[0], q[1]);
        CHECK(lo == fib(n + 1));
        CHECK(hi == fib(n + 2));
    }
    // window entries over 5 Zorich steps are Fibonacci numbers
    CocycleWindow w5 = cocycleWindow(log, 0, 5);
    std::vector<BigInt> seen;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) seen.push_back(w5.matrix(i, j));
    std::sort(seen.begin(), seen.end());
    CHECK(seen == std::vector<BigInt>{fib(4), fib(5), fib(5), fib(6)});
}

TEST_CASE("window composition law and exact length relation") {
    Rng rng(5);
    Iet t({0.3137, 0.2219, 0.2883, 0.1761}, Permutation::fromMonodromy({4, 3, 2, 1}));
    InductionLog log = recordInduction(t, 60);
    REQUIRE(log.zorichSize() >= 6);
    int n = std::min(6, log.zorichSize());
    for (int k = 0; k <= n; ++k) {
        BigMat lhs = cocycleWindow(log, 0, n).matrix;
        BigMat rhs = cocycleWindow(log, 0, k).matrix * cocycleWindow(log, k, n).matrix;
        CHECK(lhs == rhs);
    }
    // lambda_0 = Q * lambda_n within 1e-12 relative
    CocycleWindow w = cocycleWindow(log, 0, n);
    Vec lamN = log.lengthTrace[log.zorichEnd(n - 1) - 1];
    Vec lam0 = log.startLengths;
    Vec pred = applyMixed(w.matrix, lamN);
    for (int i = 0; i < 4; ++i)
        CHECK(pred[i] == doctest::Approx(lam0[i]).epsilon(1e-12));
}

TEST_CASE("heights compose through concatenated windows") {
    InductionLog log = recordInduction(goldenIet(), 30);
    auto q5 = heightsAtZorich(log, 5);
    auto q9 = heightsAtZorich(log, 9);
    CocycleWindow w = cocycleWindow(log, 5, 9);
    auto composed = w.heightsFromStart(q5);
    CHECK(composed == q9);
}

TEST_CASE("50 random windows are unimodular") {
    Rng rng(99);
    int checked = 0;
    while (checked < 50) {
        int d = 3 + static_cast<int>(rng.below(2));
        auto perms = allIrreducible(d);
        const Permutation& p = perms[rng.below(perms.size())];
        Iet t(rng.simplex(d), p);
        InductionLog log = recordInduction(t, 40);
        if (log.zorichSize() < 2) continue;
        int a = static_cast<int>(rng.below(log.zorichSize() - 1));
        int b = a + 1 + static_cast<int>(rng.below(log.zorichSize() - a - 1));
        BigInt det = determinant(cocycleWindow(log, a, b).matrix);
        CHECK((det == 1 || det == -1));
        ++checked;
    }
}

TEST_CASE("out-of-range windows are rejected") {
    InductionLog log = recordInduction(goldenIet(), 10);
    CHECK_THROWS_AS(cocycleWindow(log, 0, 1000), std::out_of_range);
    CHECK_THROWS_AS(cocycleWindow(log, -1, 2), std::out_of_range);
}

TEST_CASE("shortest positive loop at the swap is (top,bottom)") {
    auto loop = shortestPositiveLoop(Permutation::fromMonodromy({2, 1}));
    REQUIRE(loop.has_value());
    CHECK(loop->types == std::vector<int>{0, 1});
    CHECK(loop->positive());
}

TEST_CASE("positive loops exist for d=3 and d=4 starting permutations") {
    for (auto mono : {std::vector<int>{3, 2, 1}, std::vector<int>{2, 3, 1},
                      std::vector<int>{4, 3, 2, 1}}) {
        auto loop = shortestPositiveLoop(Permutation::fromMonodromy(mono));
        REQUIRE(loop.has_value());
        CHECK(loop->positive());
        CHECK(loop->base == Permutation::fromMonodromy(mono));
    }
}

TEST_CASE("acceleration schedule on the golden path") {
    InductionLog log = recordInduction(goldenIetExact(), 60);
    Schedule s = accelerate(log);
    REQUIRE(s.levels() >= 10);
    // after the first window the marks advance by two Zorich steps
    for (int k = 1; k + 1 <= s.levels(); ++k)
        CHECK(s.zorichIndex[k + 1] - s.zorichIndex[k] == 2);
    // every window matrix is entrywise positive
    for (int k = 0; k + 1 <= s.levels(); ++k) {
        BigMat q = scheduleWindow(log, s, k, k + 1).matrix;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) CHECK(q(i, j) >= 1);
    }
    CHECK(s.sublinearityBound() < 10.0);
}

TEST_CASE("non-positive loop is rejected by accelerate") {
    InductionLog log = recordInduction(goldenIet(), 20);
    RauzyLoop bad;
    bad.base = log.startPerm;
    bad.types = {0};
    bad.matrix = IMat::identity(2);
    bad.matrix.addCol(1, 0);
    CHECK_FALSE(bad.positive());
    CHECK_THROWS_AS(accelerate(log, bad), std::invalid_argument);
}

TEST_CASE("gamma that never occurs raises a diagnostic") {
    // record a path too short to contain the loop after a boundary
    InductionLog log = recordInduction(goldenIet(), 2);
    auto gamma = shortestPositiveLoop(log.startPerm);
    REQUIRE(gamma.has_value());
    CHECK_THROWS_AS(accelerate(log, *gamma), GammaNotFound);
}
