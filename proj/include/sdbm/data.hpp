#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "sdbm/model.hpp"

namespace sdbm {

struct Provenance {
    std::string source;
    std::uint64_t binarization_seed = 0;
    bool binarized = false;
};

// Fixed binary dataset: one example per matrix column, entries in {0, 1}.
struct BinaryDataset {
    Mat train;
    Mat test;
    Provenance provenance;

    long num_visible() const { return train.rows(); }
    void validate() const;
};

// Raw IDX container: big-endian magic (00 00, type byte, ndims byte),
// big-endian u32 dimension sizes, row-major unsigned byte payload.
struct IdxData {
    std::vector<std::uint32_t> dims;
    std::vector<std::uint8_t> payload;
};

IdxData load_idx(const std::string& path);
IdxData parse_idx(const std::vector<std::uint8_t>& bytes);

// Each entry independently Bernoulli(gray / 255). One column per example;
// example_size bytes each, consumed in payload order.
Mat stochastic_binarize(const std::vector<std::uint8_t>& grays, long example_size,
                        std::uint64_t seed);

// SILB container: "SILB" magic, u32 version, u32 rows, u32 cols, u32 count
// (all little-endian), then count images of rows*cols bits packed row-major,
// LSB first, each image padded to a whole byte.
Mat load_silb(const std::string& path);
void save_silb(const std::string& path, const Mat& examples, std::uint32_t rows,
               std::uint32_t cols);
Mat parse_silb(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_silb(const Mat& examples, std::uint32_t rows,
                                      std::uint32_t cols);

// All 2^w + 2^h - 2 distinct bar/stripe patterns on a w x h grid (the
// all-on and all-off images coincide between the two orientations).
Mat bars_and_stripes(int width, int height);

// All length-n bitstrings with an even number of ones.
Mat parity_patterns(int n);

// num_examples independent draws with per-coordinate probabilities.
Mat independent_bernoulli(const Vec& probs, long num_examples, std::uint64_t seed);

// Exact average log-likelihood of examples under the factorized Bernoulli
// model fit to the same examples (the "independent" baseline).
double bernoulli_baseline_ll(const Mat& examples);

void export_csv(const Mat& examples, std::ostream& out);
Mat import_csv(std::istream& in);

}  // namespace sdbm
