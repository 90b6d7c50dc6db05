#pragma once

#include <cstddef>
#include <functional>

namespace spheroidal {

// Compensated (Kahan) accumulator.
class KahanSum {
public:
    void add(double x) {
        double y = x - comp_;
        double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Runs body(begin, end) over disjoint chunks of [0, n), in parallel when
// threads != 1.  threads <= 0 picks hardware concurrency.  Chunks partition
// the index range so callers can write results by index without locking.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  int threads = 0);

}  // namespace spheroidal
