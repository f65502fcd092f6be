#include <catch2/catch_amalgamated.hpp>

#include "umcp/network.hpp"

using namespace umcp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("derived ratios follow the h^2 P / N0 definition") {
    NetworkInstance net;
    net.L = 2;
    net.gains.resize(2, 2);
    net.gains << 1.0, 1.0, 0.5, 2.0;
    net.powers = Eigen::VectorXd::Ones(2);
    net.noise = 1e-3;
    net.backhaul = Eigen::VectorXd::Constant(2, 5.0);

    const DerivedRatios r = derive_ratios(net);
    CHECK_THAT(r.snr[0], WithinRel(1000.0, 1e-12));  // h11^2 P1 = 1000 N0
    CHECK_THAT(r.inr(0, 1), WithinRel(1000.0, 1e-12));
    CHECK_THAT(r.inr(1, 0), WithinRel(250.0, 1e-12));
    CHECK(r.inr(0, 0) == 0.0);
    CHECK(r.inr(1, 1) == 0.0);

    SECTION("all-zero gains give zero ratios") {
        net.gains.setZero();
        const DerivedRatios z = derive_ratios(net);
        CHECK(z.snr.isZero());
        CHECK(z.inr.isZero());
    }
    SECTION("unit cross gain with N0-matched power gives INR = 1") {
        net.noise = 1.0;
        net.gains << 1.0, 1.0, 0.0, 1.0;
        CHECK_THAT(derive_ratios(net).inr(0, 1), WithinAbs(1.0, 1e-15));
    }
}

TEST_CASE("ratios are invariant under common power/noise rescaling") {
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const int L = 1 + static_cast<int>(rng.next_u64() % 5);
        NetworkInstance net = random_instance(rng.next_u64(), L, -10, 40, -20, 30, 0, 8, false);
        const double scale = std::exp(rng.uniform(-5, 5));
        NetworkInstance scaled = net;
        scaled.powers *= scale;
        scaled.noise *= scale;
        const DerivedRatios a = derive_ratios(net);
        const DerivedRatios b = derive_ratios(scaled);
        REQUIRE((a.snr - b.snr).cwiseAbs().maxCoeff() <= 1e-12 * a.snr.cwiseAbs().maxCoeff());
        REQUIRE((a.inr - b.inr).cwiseAbs().maxCoeff() <=
                1e-12 * std::max(1.0, a.inr.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("symmetric two-user factory") {
    const NetworkInstance net = make_symmetric_two_user(1000.0, 100.0, 5.0);
    CHECK_THAT(net.gains(0, 0), WithinRel(std::sqrt(1000.0), 1e-15));
    CHECK_THAT(net.gains(1, 1), WithinRel(std::sqrt(1000.0), 1e-15));
    CHECK_THAT(net.gains(0, 1), WithinRel(10.0, 1e-15));
    CHECK_THAT(net.gains(1, 0), WithinRel(10.0, 1e-15));
    CHECK(net.backhaul[0] == 5.0);
    CHECK(net.backhaul[1] == 5.0);
    CHECK(net.powers[0] == 1.0);
    CHECK(net.noise == 1.0);

    CHECK(make_symmetric_two_user(0, 0, 0).gains.isZero());
    const NetworkInstance weak = make_symmetric_two_user(1000.0, 3.162, 5.0);
    CHECK_THAT(derive_ratios(weak).inr(0, 1), WithinRel(3.162, 1e-12));
    CHECK_THROWS_AS(make_symmetric_two_user(-1, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(make_symmetric_two_user(1, 1, -2), std::invalid_argument);
}

TEST_CASE("soft-handoff chain factory") {
    SECTION("weak flag from direct comparison") {
        CHECK(make_wyner({100, 100}, {50}, {3, 3}).weak_interference);
        CHECK(make_wyner({100, 100, 100}, {100, 100}, {3, 3, 3}).weak_interference);  // boundary
        CHECK_FALSE(make_wyner({100, 100}, {200}, {3, 3}).weak_interference);
    }
    SECTION("length mismatch") {
        CHECK_THROWS_AS(make_wyner({100, 100}, {50, 50}, {3, 3}), std::invalid_argument);
        CHECK_THROWS_AS(make_wyner({100, 100}, {50}, {3}), std::invalid_argument);
    }
    SECTION("bidiagonal sparsity and zero off-pattern ratios") {
        const WynerInstance w = make_wyner({100, 200, 300}, {10, 20}, {3, 3, 3});
        const DerivedRatios r = derive_ratios(w.net);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (i != j && i != j + 1) CHECK(r.inr(i, j) == 0.0);
        CHECK_THAT(r.inr(1, 0), WithinRel(10.0, 1e-12));
        CHECK_THAT(r.inr(2, 1), WithinRel(20.0, 1e-12));
    }
}

TEST_CASE("random instances are deterministic and honor the wyner pattern") {
    const NetworkInstance a = random_instance(7, 4, 0, 30, -10, 20, 0, 6, false);
    const NetworkInstance b = random_instance(7, 4, 0, 30, -10, 20, 0, 6, false);
    CHECK(a.gains == b.gains);
    CHECK(a.backhaul == b.backhaul);

    const NetworkInstance w = random_instance(3, 5, 0, 30, -10, 20, 0, 6, true);
    const WynerInstance wy = as_wyner(w);
    CHECK(wy.weak_interference);  // cross INR drawn below the direct SNR

    // recompute the ratios from the raw gains independently
    const NetworkInstance inst = random_instance(1, 4, 0, 30, -10, 20, 0, 6, false);
    const DerivedRatios r = derive_ratios(inst);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            const double expect = inst.gains(i, j) * inst.gains(i, j) * inst.powers[i] / inst.noise;
            if (i == j)
                CHECK_THAT(r.snr[i], WithinRel(expect, 1e-13));
            else
                CHECK_THAT(r.inr(i, j), WithinAbs(expect, 1e-13 * (1 + expect)));
        }
    }
}

TEST_CASE("instance text round-trip") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        NetworkInstance net = random_instance(rng.next_u64(), 1 + static_cast<int>(rng.next_u64() % 6),
                                              -5, 35, -15, 25, 0, 9, trial % 2 == 0);
        if (trial % 3 == 0) net.backhaul[0] = kInfinity;
        const NetworkInstance back = from_text(to_text(net));
        REQUIRE(back.L == net.L);
        REQUIRE(back.gains == net.gains);
        REQUIRE(back.powers == net.powers);
        REQUIRE(back.backhaul == net.backhaul);
        REQUIRE(back.noise == net.noise);
    }
}

TEST_CASE("instance text parsing") {
    const std::string text =
        "# two users\n"
        "L=2\n"
        "N0=1\n"
        "P 1 1\nP 2 2\n"
        "C 1 5\nC 2 inf\n"
        "h 1 1 3  # direct\n"
        "h 2 2 4\n"
        "h 2 1 0.5\n";
    const NetworkInstance net = from_text(text);
    CHECK(net.L == 2);
    CHECK(net.gains(0, 0) == 3.0);
    CHECK(net.gains(1, 0) == 0.5);
    CHECK(net.gains(0, 1) == 0.0);
    CHECK(net.powers[1] == 2.0);
    CHECK(net.backhaul[1] == kInfinity);

    CHECK_THROWS_AS(from_text("N0=1\n"), std::invalid_argument);
    CHECK_THROWS_AS(from_text("L=2\nN0=1\nh 3 1 1\n"), std::invalid_argument);
    CHECK_THROWS_AS(from_text("L=2\nN0=1\nx 1 1\n"), std::invalid_argument);
}
