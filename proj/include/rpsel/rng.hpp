#pragma once

#include <cstdint>
#include <random>

namespace rpsel {

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Counter-based stream splitting: the stream for path `index` depends only on
// (seed, index), so results do not depend on how paths are distributed over
// workers.
inline std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index) {
    return mix64(seed + 0x9e3779b97f4a7c15ull * (index + 1));
}

// mt19937_64 + Box-Muller. The standard pins down the engine output exactly;
// normals are derived from it with explicit arithmetic (std::normal_distribution
// is implementation-defined).
class NormalRng {
public:
    explicit NormalRng(std::uint64_t seed) : eng_(seed) {}

    // uniform on (0,1]
    double uniform() {
        return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
    }

    double gauss() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 6.283185307179586476925286766559 * u2;
        spare_ = rad * std::sin(ang);
        have_spare_ = true;
        return rad * std::cos(ang);
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace rpsel
