#include "sdbm/data.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "sdbm/rng.hpp"

namespace sdbm {

void BinaryDataset::validate() const {
    if (test.size() > 0 && test.rows() != train.rows())
        throw std::invalid_argument("train/test row length mismatch");
    const auto check = [](const Mat& m) {
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                if (m(i, c) != 0.0 && m(i, c) != 1.0)
                    throw std::invalid_argument("dataset entries must be 0 or 1");
    };
    check(train);
    check(test);
}

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(f),
                                     std::istreambuf_iterator<char>());
}

std::uint32_t be32(const std::uint8_t* p) {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
           (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

std::uint32_t le32(const std::uint8_t* p) {
    return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
           (std::uint32_t{p[3]} << 24);
}

void put_le32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

}  // namespace

IdxData parse_idx(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 4) throw std::runtime_error("IDX file too short");
    if (bytes[0] != 0 || bytes[1] != 0) throw std::runtime_error("bad IDX magic");
    if (bytes[2] != 0x08) throw std::runtime_error("unsupported IDX type byte");
    const int ndims = bytes[3];
    if (ndims < 1 || bytes.size() < 4 + 4 * static_cast<std::size_t>(ndims))
        throw std::runtime_error("truncated IDX header");
    IdxData idx;
    std::size_t total = 1;
    for (int d = 0; d < ndims; ++d) {
        idx.dims.push_back(be32(bytes.data() + 4 + 4 * d));
        total *= idx.dims.back();
    }
    const std::size_t offset = 4 + 4 * static_cast<std::size_t>(ndims);
    if (bytes.size() < offset + total) throw std::runtime_error("truncated IDX payload");
    idx.payload.assign(bytes.begin() + offset, bytes.begin() + offset + total);
    return idx;
}

IdxData load_idx(const std::string& path) { return parse_idx(read_file(path)); }

Mat stochastic_binarize(const std::vector<std::uint8_t>& grays, long example_size,
                        std::uint64_t seed) {
    if (example_size < 1 || grays.size() % static_cast<std::size_t>(example_size) != 0)
        throw std::invalid_argument("payload size is not a multiple of example size");
    const long n = static_cast<long>(grays.size()) / example_size;
    Rng rng(seed);
    Mat out(example_size, n);
    for (long c = 0; c < n; ++c)
        for (long i = 0; i < example_size; ++i) {
            const double p = grays[c * example_size + i] / 255.0;
            out(i, c) = rng.bernoulli(p) ? 1.0 : 0.0;
        }
    return out;
}

std::vector<std::uint8_t> encode_silb(const Mat& examples, std::uint32_t rows,
                                      std::uint32_t cols) {
    if (static_cast<long>(rows) * cols != examples.rows())
        throw std::invalid_argument("rows*cols must equal the example length");
    std::vector<std::uint8_t> out{'S', 'I', 'L', 'B'};
    put_le32(out, 1);
    put_le32(out, rows);
    put_le32(out, cols);
    put_le32(out, static_cast<std::uint32_t>(examples.cols()));
    const long bytes_per = (examples.rows() + 7) / 8;
    for (Eigen::Index c = 0; c < examples.cols(); ++c) {
        std::vector<std::uint8_t> packed(bytes_per, 0);
        for (Eigen::Index i = 0; i < examples.rows(); ++i)
            if (examples(i, c) != 0.0) packed[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
        out.insert(out.end(), packed.begin(), packed.end());
    }
    return out;
}

Mat parse_silb(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 20 || std::memcmp(bytes.data(), "SILB", 4) != 0)
        throw std::runtime_error("bad SILB header");
    if (le32(bytes.data() + 4) != 1) throw std::runtime_error("unsupported SILB version");
    const std::uint32_t rows = le32(bytes.data() + 8);
    const std::uint32_t cols = le32(bytes.data() + 12);
    const std::uint32_t count = le32(bytes.data() + 16);
    const long pixels = static_cast<long>(rows) * cols;
    const long bytes_per = (pixels + 7) / 8;
    if (bytes.size() != 20 + static_cast<std::size_t>(bytes_per) * count)
        throw std::runtime_error("SILB payload size mismatch");
    Mat out(pixels, count);
    for (std::uint32_t c = 0; c < count; ++c) {
        const std::uint8_t* p = bytes.data() + 20 + static_cast<std::size_t>(bytes_per) * c;
        for (long i = 0; i < pixels; ++i) out(i, c) = (p[i / 8] >> (i % 8)) & 1u;
    }
    return out;
}

Mat load_silb(const std::string& path) { return parse_silb(read_file(path)); }

void save_silb(const std::string& path, const Mat& examples, std::uint32_t rows,
               std::uint32_t cols) {
    const auto bytes = encode_silb(examples, rows, cols);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

Mat bars_and_stripes(int width, int height) {
    if (width < 1 || height < 1) throw std::invalid_argument("grid must be at least 1x1");
    const long pixels = static_cast<long>(width) * height;
    std::vector<Vec> patterns;
    // horizontal bars: each row on or off (row-major pixel order)
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << height); ++m) {
        Vec v(pixels);
        for (int r = 0; r < height; ++r)
            for (int c = 0; c < width; ++c)
                v[static_cast<long>(r) * width + c] = static_cast<double>((m >> r) & 1u);
        patterns.push_back(std::move(v));
    }
    // vertical stripes, skipping all-off and all-on already present above
    for (std::uint64_t m = 1; m + 1 < (std::uint64_t{1} << width); ++m) {
        Vec v(pixels);
        for (int r = 0; r < height; ++r)
            for (int c = 0; c < width; ++c)
                v[static_cast<long>(r) * width + c] = static_cast<double>((m >> c) & 1u);
        patterns.push_back(std::move(v));
    }
    Mat out(pixels, static_cast<long>(patterns.size()));
    for (std::size_t i = 0; i < patterns.size(); ++i) out.col(static_cast<long>(i)) = patterns[i];
    return out;
}

Mat parity_patterns(int n) {
    if (n < 1 || n > 30) throw std::invalid_argument("parity size out of range");
    std::vector<std::uint64_t> even;
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << n); ++s)
        if (__builtin_popcountll(s) % 2 == 0) even.push_back(s);
    Mat out(n, static_cast<long>(even.size()));
    for (std::size_t c = 0; c < even.size(); ++c)
        for (int i = 0; i < n; ++i)
            out(i, static_cast<long>(c)) = static_cast<double>((even[c] >> i) & 1u);
    return out;
}

Mat independent_bernoulli(const Vec& probs, long num_examples, std::uint64_t seed) {
    if (num_examples < 1) throw std::invalid_argument("need at least one example");
    for (Eigen::Index i = 0; i < probs.size(); ++i)
        if (probs[i] < 0.0 || probs[i] > 1.0)
            throw std::invalid_argument("probabilities must lie in [0,1]");
    Rng rng(seed);
    Mat out(probs.size(), num_examples);
    for (long c = 0; c < num_examples; ++c)
        for (Eigen::Index i = 0; i < probs.size(); ++i)
            out(i, c) = rng.bernoulli(probs[i]) ? 1.0 : 0.0;
    return out;
}

double bernoulli_baseline_ll(const Mat& examples) {
    if (examples.cols() == 0) throw std::invalid_argument("empty example set");
    const Vec p = examples.rowwise().mean();
    double ll = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const double q = p[i];
        if (q > 0.0) ll += q * std::log(q);
        if (q < 1.0) ll += (1.0 - q) * std::log(1.0 - q);
    }
    return ll;
}

void export_csv(const Mat& examples, std::ostream& out) {
    for (Eigen::Index c = 0; c < examples.cols(); ++c) {
        for (Eigen::Index i = 0; i < examples.rows(); ++i) {
            if (i) out << ",";
            out << (examples(i, c) != 0.0 ? '1' : '0');
        }
        out << "\n";
    }
}

Mat import_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            if (cell != "0" && cell != "1") throw std::runtime_error("CSV entries must be 0 or 1");
            row.push_back(cell == "1" ? 1.0 : 0.0);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error("ragged CSV rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) return Mat(0, 0);
    Mat out(static_cast<long>(rows.front().size()), static_cast<long>(rows.size()));
    for (std::size_t c = 0; c < rows.size(); ++c)
        for (std::size_t i = 0; i < rows[c].size(); ++i)
            out(static_cast<long>(i), static_cast<long>(c)) = rows[c][i];
    return out;
}

}  // namespace sdbm
