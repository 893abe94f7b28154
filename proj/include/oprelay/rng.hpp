#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace oprelay {

// Philox4x32-10 counter-based generator.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key);

// Identifies one independent substream: trial t of stream s under seed.
struct RngState {
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;
    std::uint32_t stream = 0;
};

// Sequential reader over a substream. Every block yields two doubles.
class TrialRng {
public:
    explicit TrialRng(const RngState& st)
        : key_{static_cast<std::uint32_t>(st.seed), static_cast<std::uint32_t>(st.seed >> 32)},
          trial_(st.trial),
          stream_(st.stream) {}

    // Uniform on (0, 1]; never returns 0 so -log(u) is finite.
    double uniform() {
        if (have_ == 0) refill();
        return buf_[--have_];
    }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

private:
    void refill();

    PhiloxKey key_;
    std::uint64_t trial_;
    std::uint32_t stream_;
    std::uint32_t block_ = 0;
    double buf_[2] = {0.0, 0.0};
    int have_ = 0;
};

}  // namespace oprelay
