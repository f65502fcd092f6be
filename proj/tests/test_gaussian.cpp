#include <catch2/catch_amalgamated.hpp>

#include "umcp/gaussian.hpp"
#include "umcp/rng.hpp"

using namespace umcp;
using Catch::Matchers::WithinAbs;

TEST_CASE("independent blocks have zero mutual information") {
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(3, 3);
    k.diagonal() << 2.0, 3.0, 4.0;
    CHECK_THAT(gaussian_conditional_mi(k, {0}, {1}, {}), WithinAbs(0.0, 1e-12));
    CHECK_THAT(gaussian_conditional_mi(k, {0}, {1}, {2}), WithinAbs(0.0, 1e-12));
}

TEST_CASE("scalar observation through unit noise gives half a bit") {
    // Y = X + Z with unit variances: I(X;Y) = 1/2 log2(2)
    Eigen::MatrixXd k(2, 2);
    k << 1.0, 1.0, 1.0, 2.0;
    CHECK_THAT(gaussian_conditional_mi(k, {0}, {1}, {}), WithinAbs(0.5, 1e-12));
}

TEST_CASE("kernel reproduces the scalar description-rate closed form") {
    Rng rng(17);
    for (int trial = 0; trial < 300; ++trial) {
        const double h = rng.uniform(0.1, 4.0);
        const double p = rng.uniform(0.1, 5.0);
        const double n0 = rng.uniform(0.1, 2.0);
        const double q = rng.uniform(0.05, 3.0);
        const double vy = h * h * p + n0;
        // variables (Y, Yhat = Y + e)
        Eigen::MatrixXd k(2, 2);
        k << vy, vy, vy, vy + q;
        const double mi = gaussian_conditional_mi(k, {0}, {1}, {});
        const double closed = 0.5 * std::log2(1.0 + vy / q);
        REQUIRE_THAT(mi, WithinAbs(closed, 1e-10));
    }
}

TEST_CASE("kernel rejects malformed covariances") {
    Eigen::MatrixXd asym(2, 2);
    asym << 1.0, 0.5, -0.5, 1.0;
    CHECK_THROWS_AS(gaussian_conditional_mi(asym, {0}, {1}, {}), std::invalid_argument);

    Eigen::MatrixXd indef(2, 2);
    indef << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3, -1
    CHECK_THROWS_AS(gaussian_conditional_mi(indef, {0}, {1}, {}), std::invalid_argument);
}

TEST_CASE("rank-deficient blocks fall back to the pseudo-determinant") {
    // X repeated twice: K is singular but I(X; X+Z) must stay finite
    Eigen::MatrixXd k(3, 3);
    k << 1.0, 1.0, 1.0,
         1.0, 1.0, 1.0,
         1.0, 1.0, 2.0;
    const double mi = gaussian_conditional_mi(k, {0, 1}, {2}, {});
    CHECK_THAT(mi, WithinAbs(0.5, 1e-9));
}

TEST_CASE("joint input/output covariance matches direct computation") {
    const NetworkInstance net = make_symmetric_two_user(9.0, 4.0, 3.0);
    Eigen::VectorXd q(2);
    q << 0.5, 0.25;
    const Eigen::MatrixXd k = joint_input_output_covariance(net, q);
    REQUIRE(k.rows() == 4);
    CHECK_THAT(k(0, 0), WithinAbs(1.0, 1e-15));
    CHECK_THAT(k(0, 2), WithinAbs(3.0, 1e-15));               // h11 P1
    CHECK_THAT(k(2, 2), WithinAbs(9.0 + 4.0 + 1.0 + 0.5, 1e-12));
    CHECK_THAT(k(2, 3), WithinAbs(2.0 * 3.0 + 2.0 * 3.0, 1e-12));  // sum h_i1 h_i2 P_i
    CHECK((k - k.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(joint_input_output_covariance(net, Eigen::VectorXd::Constant(2, kInfinity)),
                    std::invalid_argument);
}
