#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace oprelay {

struct ExecOptions {
    unsigned threads = 0;  // 0 = hardware concurrency
    std::uint64_t chunk = 65536;
};

inline unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1u : hc;
}

// Runs fn(begin, end, acc) over [0, trials) in fixed-size chunks. Each chunk
// has its own accumulator and the partials are folded in chunk order, so
// the result does not depend on the thread count or scheduling.
template <class Acc, class Fn>
Acc run_trials(std::uint64_t first, std::uint64_t trials, const ExecOptions& opt, Fn&& fn) {
    const std::uint64_t chunk = std::max<std::uint64_t>(1, opt.chunk);
    const std::uint64_t nchunks = (trials + chunk - 1) / chunk;
    std::vector<Acc> parts(nchunks);
    std::atomic<std::uint64_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::uint64_t c = next.fetch_add(1, std::memory_order_relaxed);
            if (c >= nchunks) return;
            std::uint64_t b = first + c * chunk;
            std::uint64_t e = std::min(first + trials, b + chunk);
            fn(b, e, parts[c]);
        }
    };
    unsigned nt = static_cast<unsigned>(
        std::min<std::uint64_t>(resolve_threads(opt.threads), std::max<std::uint64_t>(1, nchunks)));
    if (nt <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nt);
        for (unsigned i = 0; i < nt; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    Acc total{};
    for (auto& p : parts) total += p;
    return total;
}

}  // namespace oprelay
