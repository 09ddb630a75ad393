#pragma once

#include <cmath>
#include <limits>

namespace sdbm {

// Streaming log sum exp in (max, scaled-sum) form. merge() is associative
// but not commutative in floating point; callers combine partial results in
// a fixed order to stay bit-stable under parallelism.
struct LogSumExpAcc {
    double max = -std::numeric_limits<double>::infinity();
    double sum = 0.0;

    void add(double x) {
        if (x <= max) {
            sum += std::exp(x - max);
        } else {
            sum = sum * std::exp(max - x) + 1.0;
            max = x;
        }
    }

    void merge(const LogSumExpAcc& o) {
        if (o.max == -std::numeric_limits<double>::infinity()) return;
        if (max == -std::numeric_limits<double>::infinity()) {
            *this = o;
            return;
        }
        if (o.max <= max) {
            sum += o.sum * std::exp(o.max - max);
        } else {
            sum = sum * std::exp(max - o.max) + o.sum;
            max = o.max;
        }
    }

    double value() const {
        return max == -std::numeric_limits<double>::infinity() ? max : max + std::log(sum);
    }
};

}  // namespace sdbm
