#include "spheroidal/util.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace spheroidal {

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  int threads) {
    if (n == 0) return;
    unsigned nt = threads > 0 ? unsigned(threads) : std::thread::hardware_concurrency();
    if (nt == 0) nt = 1;
    nt = std::min<unsigned>(nt, unsigned(n));
    if (nt == 1) {
        body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    std::size_t chunk = (n + nt - 1) / nt;
    for (unsigned t = 0; t < nt; ++t) {
        std::size_t b = t * chunk;
        std::size_t e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back(body, b, e);
    }
    for (auto& th : pool) th.join();
}

}  // namespace spheroidal
