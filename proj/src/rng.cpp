#include "llrf/rng.hpp"

#include <cmath>

#include "llrf/phasor.hpp"

namespace llrf {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_stream_seed(std::uint64_t base_seed, std::uint64_t trial_index,
                                 Stream stream) {
    std::uint64_t s = splitmix64(base_seed);
    s = splitmix64(s ^ (0x7f4a7c15ULL + trial_index));
    s = splitmix64(s ^ (0xd1ce4e5bULL + static_cast<std::uint64_t>(stream)));
    return s;
}

double RngStream::uniform() {
    // Top 53 bits of the engine output, scaled to [0, 1).
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double RngStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // u1 in (0, 1] keeps the log finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = kTwoPi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

int RngStream::uniform_int(int lo, int hi) {
    const int span = hi - lo + 1;
    int k = static_cast<int>(uniform() * span);
    if (k >= span) k = span - 1;
    return lo + k;
}

}  // namespace llrf
