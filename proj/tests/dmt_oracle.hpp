#pragma once

// Scalar re-evaluation of every catalog curve, written directly from the
// closed forms with no shared code path into the library.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "oprelay/dmt_closed.hpp"

namespace oracle {

inline double pos(double x) { return x > 0.0 ? x : 0.0; }

inline std::optional<double> dmt(const oprelay::CurveKey& k, double r) {
    using oprelay::TopologyFamily;
    const std::string& v = k.variant;
    const double n = k.n;
    switch (k.family) {
        case TopologyFamily::OnOff:
            if (v == "genie") return 2 * pos(1 - r);
            if (v == "direct") return pos(1 - r);
            if (v == "orth-af" || v == "orth-df") return pos(1 - r) + pos(1 - 2 * r);
            break;
        case TopologyFamily::Irc:
            if (v == "genie" || v == "cf") return 2 * n * pos(1 - r);
            if (v == "orth-af" || v == "orth-df" || v == "naf") return n * pos(1 - r) + n * pos(1 - 2 * r);
            if (v == "ddf") return r <= 0.5 ? 2 * n * (1 - r) : n * (1 - r) / r;
            if (v == "ddf-simple") return r <= n / (n + 1) ? (n + 1) * (1 - r) : n * (1 - r) / r;
            break;
        case TopologyFamily::Src: {
            if (v == "genie") return pos(1 - r / n) + (2 * n - 1) * pos(1 - r);
            const double s2 = 2 - std::sqrt(2.0), s5 = 3 - std::sqrt(5.0);
            const double cond_low = 1 - r * (1 - r / 2) / (1 - r);
            if (v == "naf") return 2 * pos(1 - 2 * r) + pos(1 - r / 2) + pos(1 - r);
            if (v == "ddf") {
                if (r <= 0.5) return cond_low + 2 * (1 - r) + (1 - r / 2);
                if (r <= s2) return 2 * (1 - r) / r;
                if (r <= 1) return (1 - r) / r + 1 - r / 2;
                return pos(1 - r / 2);
            }
            if (v == "cf") return r <= 6.0 / 7.0 ? 4 * (1 - r) : pos(1 - r / 2);
            if (v == "orth" || v == "orth-af" || v == "orth-df") return 2 * pos(1 - 2 * r) + pos(1 - r / 2);
            if (v == "hybrid-naf") return std::max(2 * pos(1 - r) + 2 * pos(1 - 2 * r), pos(1 - r / 2));
            if (v == "hybrid-ddf") {
                if (r <= 0.5) return 4 * (1 - r);
                if (r <= s5) return 2 * (1 - r) / r;
                return pos(1 - r / 2);
            }
            if (v == "hybrid-cf") return std::max(4 * pos(1 - r), pos(1 - r / 2));
            if (v == "naf-cond") return pos(1 - 2 * r);
            if (v == "cf-cond") return pos(1 - 1.5 * r);
            if (v == "ddf-cond") {
                if (r <= 0.5) return cond_low;
                if (r <= s2) return (1 - r) / r - 1 + r / 2;
                return 0.0;
            }
            if (v == "mode1") return pos(1 - r / 2);
            if (v == "naf-mode2") return pos(1 - r) + pos(1 - 2 * r);
            if (v == "ddf-mode2") return r <= 0.5 ? 2 * (1 - r) : pos((1 - r) / r);
            if (v == "cf-mode2" || v == "genie-mode2") return 2 * pos(1 - r);
            if (v == "genie-mode3") return pos(1 - r);
            break;
        }
        case TopologyFamily::Marc:
        case TopologyFamily::Brc:
            if (v == "genie" || v == "cf") return (n + 1) * pos(1 - r);
            if (v == "orth-af" || v == "orth-df") return (n + 1) * pos(1 - 2 * r);
            if (v == "orth-off") return n * pos(1 - r) + pos(1 - r / 2);
            if (v == "naf") return n * pos(1 - r) + pos(1 - 2 * r);
            if (v == "ddf") return r <= n / (n + 1) ? (n + 1) * (1 - r) : n * (1 - r) / r;
            break;
        case TopologyFamily::XRelay:
            if (v == "genie" || v == "cf") return 6 * pos(1 - r);
            if (v == "naf" || v == "orth-af" || v == "orth-df") return 4 * pos(1 - r) + 2 * pos(1 - 2 * r);
            if (v == "orth-on") return 2 * pos(1 - r) + 4 * pos(1 - 2 * r);
            if (v == "ddf") return r <= 0.5 ? 6 * (1 - r) : 2 * (1 - r) / r + 2 * (1 - r);
            break;
        case TopologyFamily::Gateway:
            if (v == "no-csi") return pos(1 - 2 * r);
            if (v == "full-csi" || v == "one-bit" || v == "genie") return n * pos(1 - 2 * r);
            if (v == "mac-tdma") return r <= n / (n + 1) ? 1 - r / n : n * (1 - r);
            break;
    }
    return std::nullopt;
}

}  // namespace oracle
