#include <doctest.h>

#include <cmath>
#include <sstream>

#include "smilecnn/tensor.hpp"

using namespace smilecnn;

TEST_SUITE_BEGIN("tensor");

TEST_CASE("zeros fills the whole shape with 0.0") {
    const Tensor t = Tensor::zeros({2, 3});
    CHECK(t.size() == 6);
    for (size_t i = 0; i < t.size(); ++i) CHECK(t[i] == 0.0);

    const Tensor one = Tensor::zeros({1});
    CHECK(one.size() == 1);
    CHECK(one[0] == 0.0);

    CHECK(Tensor::zeros({5, 5, 32}).size() == 800);
}

TEST_CASE("zeros rejects invalid shapes") {
    CHECK_THROWS_AS(Tensor::zeros({}), std::invalid_argument);
    CHECK_THROWS_AS(Tensor::zeros({3, 0, 2}), std::invalid_argument);
}

TEST_CASE("random_uniform stays inside the open interval") {
    Rng rng(42);
    const Tensor t = Tensor::random_uniform({4}, 0.1, rng);
    for (size_t i = 0; i < t.size(); ++i) {
        CHECK(t[i] > -0.1);
        CHECK(t[i] < 0.1);
    }
    CHECK_THROWS_AS(Tensor::random_uniform({4}, 0.0, rng),
                    std::invalid_argument);
    CHECK_THROWS_AS(Tensor::random_uniform({4}, -1.0, rng),
                    std::invalid_argument);
}

TEST_CASE("random_uniform is bitwise reproducible per seed") {
    Rng a(42), b(42), c(43);
    const Tensor ta = Tensor::random_uniform({32}, 0.5, a);
    const Tensor tb = Tensor::random_uniform({32}, 0.5, b);
    const Tensor tc = Tensor::random_uniform({32}, 0.5, c);
    CHECK(ta == tb);
    CHECK(ta != tc);
}

TEST_CASE("matmul identity and hand-checked products") {
    const Tensor eye = Tensor::from_data({2, 2}, {1, 0, 0, 1});
    const Tensor m = Tensor::from_data({2, 2}, {1, 2, 3, 4});
    CHECK(matmul(eye, m) == m);

    const Tensor a = Tensor::from_data({1, 2}, {1, 2});
    const Tensor b = Tensor::from_data({2, 1}, {3, 4});
    const Tensor p = matmul(a, b);
    CHECK(p.shape() == std::vector<size_t>{1, 1});
    CHECK(p[0] == 11.0);
}

TEST_CASE("matmul rejects mismatched inner dimensions") {
    const Tensor a = Tensor::zeros({2, 3});
    const Tensor b = Tensor::zeros({2, 3});
    CHECK_THROWS_AS(matmul(a, b), std::invalid_argument);
}

// independent oracle: naive triple loop
static Tensor matmul_oracle(const Tensor& a, const Tensor& b) {
    Tensor out = Tensor::zeros({a.dim(0), b.dim(1)});
    for (size_t i = 0; i < a.dim(0); ++i)
        for (size_t j = 0; j < b.dim(1); ++j)
            for (size_t k = 0; k < a.dim(1); ++k)
                out.at(i, j) += a.at(i, k) * b.at(k, j);
    return out;
}

TEST_CASE("matmul agrees with the triple-loop oracle on random shapes") {
    Rng rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        const size_t r = 1 + rng.below(12);
        const size_t k = 1 + rng.below(12);
        const size_t c = 1 + rng.below(12);
        const Tensor a = Tensor::random_uniform({r, k}, 2.0, rng);
        const Tensor b = Tensor::random_uniform({k, c}, 2.0, rng);
        const Tensor got = matmul(a, b);
        const Tensor want = matmul_oracle(a, b);
        for (size_t i = 0; i < got.size(); ++i) {
            const double denom = std::max(1.0, std::abs(want[i]));
            CHECK(std::abs(got[i] - want[i]) / denom <= 1e-12);
        }
    }
}

TEST_CASE("reshape keeps the flat data and checks the element count") {
    Rng rng(3);
    const Tensor t = Tensor::random_uniform({3, 4}, 1.0, rng);
    const Tensor r = t.reshape({2, 6});
    CHECK(r.values() == t.values());
    CHECK_THROWS_AS(t.reshape({5, 2}), std::invalid_argument);
}

TEST_CASE("tensor file round-trips bitwise") {
    Rng rng(11);
    const Tensor t = Tensor::random_uniform({3, 2, 4}, 5.0, rng);
    std::stringstream buf;
    write_tensor(buf, t);
    const Tensor back = read_tensor(buf);
    CHECK(back == t);
}

TEST_CASE("truncated tensor file reports the offset") {
    Rng rng(11);
    const Tensor t = Tensor::random_uniform({4, 4}, 1.0, rng);
    std::stringstream buf;
    write_tensor(buf, t);
    std::string bytes = buf.str();
    bytes.resize(bytes.size() / 2);
    std::stringstream cut(bytes);
    CHECK_THROWS_WITH_AS(read_tensor(cut),
                         doctest::Contains("byte offset"), std::runtime_error);
}

TEST_CASE("derive_seed decorrelates ordinals") {
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    CHECK(derive_seed(1, 5) == derive_seed(1, 5));
}

TEST_SUITE_END();
