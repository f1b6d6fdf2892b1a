#include <cmath>
#include <limits>
#include <stdexcept>

#include "doctest.h"
#include "traject/tensor.hpp"

using traject::Tensor2;

TEST_CASE("matmul matches a hand-computed product") {
    Tensor2 a(2, 3, {1, 2, 3, 4, 5, 6});
    Tensor2 b(3, 2, {7, 8, 9, 10, 11, 12});
    Tensor2 c = traject::matmul(a, b);
    // row 0: 1*7 + 2*9 + 3*11 = 58, 1*8 + 2*10 + 3*12 = 64
    // row 1: 4*7 + 5*9 + 6*11 = 139, 4*8 + 5*10 + 6*12 = 154
    REQUIRE(c.rows == 2);
    REQUIRE(c.cols == 2);
    CHECK(c.at(0, 0) == 58.0);
    CHECK(c.at(0, 1) == 64.0);
    CHECK(c.at(1, 0) == 139.0);
    CHECK(c.at(1, 1) == 154.0);
}

TEST_CASE("matmul with identity is the identity map") {
    Tensor2 a(3, 3, {1, 2, 3, 4, 5, 6, 7, 8, 9});
    Tensor2 c = traject::matmul(a, Tensor2::identity(3));
    CHECK(traject::max_abs_diff(a, c) == 0.0);
    Tensor2 d = traject::matmul(Tensor2::identity(3), a);
    CHECK(traject::max_abs_diff(a, d) == 0.0);
}

TEST_CASE("matmul rejects mismatched shapes") {
    Tensor2 a(2, 3);
    Tensor2 b(2, 3);
    CHECK_THROWS_AS(traject::matmul(a, b), std::invalid_argument);
}

TEST_CASE("factories produce the advertised contents") {
    Tensor2 f = Tensor2::full(2, 2, 3.5);
    for (double v : f.data) CHECK(v == 3.5);

    Tensor2 z = Tensor2::zeros(3, 1);
    for (double v : z.data) CHECK(v == 0.0);

    Tensor2 s = Tensor2::scalar(-2.0);
    REQUIRE(s.rows == 1);
    REQUIRE(s.cols == 1);
    CHECK(s.at(0, 0) == -2.0);

    Tensor2 eye = Tensor2::identity(2);
    CHECK(eye.at(0, 0) == 1.0);
    CHECK(eye.at(0, 1) == 0.0);
    CHECK(eye.at(1, 0) == 0.0);
    CHECK(eye.at(1, 1) == 1.0);
}

TEST_CASE("all_finite flags NaN and infinity") {
    Tensor2 t(2, 2, {1, 2, 3, 4});
    CHECK(t.all_finite());
    t.at(1, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(t.all_finite());
    t.at(1, 0) = std::numeric_limits<double>::infinity();
    CHECK_FALSE(t.all_finite());
}

TEST_CASE("max_abs_diff reports the largest deviation") {
    Tensor2 a(1, 3, {1, 2, 3});
    Tensor2 b(1, 3, {1, 2.5, 2});
    CHECK(traject::max_abs_diff(a, b) == doctest::Approx(1.0));
    CHECK_THROWS_AS(traject::max_abs_diff(a, Tensor2(2, 3)), std::invalid_argument);
}
