#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "sdbm/data.hpp"

using namespace sdbm;

TEST_CASE("idx parsing recovers a handcrafted 2x2x2 fixture") {
    std::vector<std::uint8_t> bytes = {
        0x00, 0x00, 0x08, 0x03,              // magic: ubyte, 3 dims
        0x00, 0x00, 0x00, 0x02,              // dim 0 = 2
        0x00, 0x00, 0x00, 0x02,              // dim 1 = 2
        0x00, 0x00, 0x00, 0x02,              // dim 2 = 2
        1, 2, 3, 4, 5, 6, 7, 8,
    };
    const IdxData idx = parse_idx(bytes);
    CHECK(idx.dims == std::vector<std::uint32_t>{2, 2, 2});
    CHECK(idx.payload == std::vector<std::uint8_t>{1, 2, 3, 4, 5, 6, 7, 8});
}

TEST_CASE("idx parsing rejects malformed input") {
    std::vector<std::uint8_t> ok = {0x00, 0x00, 0x08, 0x01, 0x00, 0x00, 0x00, 0x02, 9, 9};
    CHECK_NOTHROW(parse_idx(ok));
    auto bad_magic = ok;
    bad_magic[0] = 0x01;
    CHECK_THROWS(parse_idx(bad_magic));
    auto bad_type = ok;
    bad_type[2] = 0x0d;  // float type unsupported
    CHECK_THROWS(parse_idx(bad_type));
    auto truncated = ok;
    truncated.pop_back();
    CHECK_THROWS(parse_idx(truncated));
}

TEST_CASE("stochastic binarization: extremes, determinism, frequency") {
    std::vector<std::uint8_t> grays = {0, 255, 0, 255};
    const Mat a = stochastic_binarize(grays, 2, 7);
    CHECK(a.rows() == 2);
    CHECK(a.cols() == 2);
    CHECK(a(0, 0) == 0.0);
    CHECK(a(1, 0) == 1.0);
    CHECK(a(0, 1) == 0.0);
    CHECK(a(1, 1) == 1.0);
    CHECK(stochastic_binarize(grays, 2, 7) == a);

    const long n = 100000;
    std::vector<std::uint8_t> mid(n, 128);
    const Mat b = stochastic_binarize(mid, 1, 3);
    const double freq = b.sum() / n;
    const double p = 128.0 / 255.0;
    const double sigma = std::sqrt(p * (1.0 - p) / n);
    CHECK(std::abs(freq - p) < 3.0 * sigma);
}

TEST_CASE("silb container round-trips bit-exactly") {
    Mat x(4, 3);
    x << 1, 0, 1,
         0, 1, 1,
         1, 1, 0,
         0, 0, 1;
    const auto bytes = encode_silb(x, 2, 2);
    CHECK(bytes.size() == 20 + 3);  // header + one byte per 4-pixel image
    const Mat back = parse_silb(bytes);
    CHECK(back == x);

    auto corrupt = bytes;
    corrupt[16] = 5;  // claim 5 images, payload has 3
    CHECK_THROWS(parse_silb(corrupt));
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS(parse_silb(bad));
    CHECK_THROWS(encode_silb(x, 3, 2));  // 3*2 != 4
}

TEST_CASE("bars and stripes enumerates 2^w + 2^h - 2 distinct patterns") {
    const Mat bas = bars_and_stripes(3, 3);
    CHECK(bas.rows() == 9);
    CHECK(bas.cols() == 14);
    std::set<std::vector<double>> seen;
    for (Eigen::Index c = 0; c < bas.cols(); ++c)
        seen.insert(std::vector<double>(bas.col(c).data(), bas.col(c).data() + 9));
    CHECK(seen.size() == 14);
    // every pattern is constant along rows or along columns
    for (Eigen::Index c = 0; c < bas.cols(); ++c) {
        bool rows_const = true, cols_const = true;
        for (int r = 0; r < 3; ++r)
            for (int cc = 0; cc < 3; ++cc) {
                if (bas(r * 3 + cc, c) != bas(r * 3, c)) rows_const = false;
                if (bas(r * 3 + cc, c) != bas(cc, c)) cols_const = false;
            }
        CHECK((rows_const || cols_const));
    }
    CHECK(bars_and_stripes(2, 4).cols() == 4 + 16 - 2);
}

TEST_CASE("parity patterns list exactly the even-weight strings") {
    const Mat p3 = parity_patterns(3);
    CHECK(p3.rows() == 3);
    CHECK(p3.cols() == 4);
    for (Eigen::Index c = 0; c < p3.cols(); ++c)
        CHECK(static_cast<long>(p3.col(c).sum()) % 2 == 0);
    CHECK(parity_patterns(5).cols() == 16);
}

TEST_CASE("independent bernoulli at the extremes is deterministic") {
    Vec probs(2);
    probs << 1.0, 0.0;
    const Mat x = independent_bernoulli(probs, 10, 5);
    for (Eigen::Index c = 0; c < 10; ++c) {
        CHECK(x(0, c) == 1.0);
        CHECK(x(1, c) == 0.0);
    }
    probs << 1.5, 0.0;
    CHECK_THROWS(independent_bernoulli(probs, 1, 0));
}

TEST_CASE("bernoulli baseline equals the negative entropy of the fitted product") {
    Mat x(2, 4);
    x << 1, 1, 0, 0,
         1, 1, 1, 1;
    // coordinate means 0.5 and 1.0
    CHECK(bernoulli_baseline_ll(x) == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("csv export and import round-trip") {
    const Mat x = bars_and_stripes(2, 2);
    std::stringstream ss;
    export_csv(x, ss);
    const Mat back = import_csv(ss);
    CHECK(back == x);

    std::stringstream bad("1,0\n0.5,1\n");
    CHECK_THROWS(import_csv(bad));
    std::stringstream ragged("1,0\n1\n");
    CHECK_THROWS(import_csv(ragged));
}

TEST_CASE("dataset validation") {
    BinaryDataset d;
    d.train = Mat::Zero(3, 2);
    d.test = Mat::Ones(3, 1);
    CHECK_NOTHROW(d.validate());
    d.test = Mat::Ones(4, 1);
    CHECK_THROWS(d.validate());
    d.test = Mat::Constant(3, 1, 0.5);
    CHECK_THROWS(d.validate());
}
