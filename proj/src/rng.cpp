#include "oprelay/rng.hpp"

namespace oprelay {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline double to_unit(std::uint64_t x) {
    // 53 random bits, shifted into (0, 1].
    return static_cast<double>((x >> 11) + 1) * 0x1.0p-53;
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter c, PhiloxKey k) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k[0] += kW0;
            k[1] += kW1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kM0, c[0], hi0, lo0);
        mulhilo(kM1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
}

void TrialRng::refill() {
    PhiloxCounter ctr{block_++, static_cast<std::uint32_t>(trial_),
                      static_cast<std::uint32_t>(trial_ >> 32), stream_};
    PhiloxCounter out = philox4x32_10(ctr, key_);
    std::uint64_t a = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    std::uint64_t b = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    buf_[0] = to_unit(b);
    buf_[1] = to_unit(a);
    have_ = 2;
}

}  // namespace oprelay
