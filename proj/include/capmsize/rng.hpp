#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace capmsize {

// One splitmix64 step; used to hash (seed, stream) pairs into engine seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministic per-stream generator. Uniforms take the top 53 bits of the
// engine output; normals come from Box-Muller rather than
// std::normal_distribution, whose algorithm the standard leaves unspecified.
// Stream k always produces the same draws for a given seed, independent of
// how many other streams exist.
class PathRng {
public:
    PathRng(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t h = seed ^ (0x9e3779b97f4a7c15ull * (stream + 1));
        engine_.seed(splitmix64(h));
    }

    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u = uniform01();
        while (u <= 0.0) u = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u));
        const double theta = 2.0 * kPi * uniform01();
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    Eigen::VectorXd normals(Eigen::Index n) {
        Eigen::VectorXd out(n);
        for (Eigen::Index i = 0; i < n; ++i) out[i] = normal();
        return out;
    }

    // Recorded in ensemble echoes so runs are attributable to a generator.
    static const char* name() { return "mt19937_64/splitmix64-substreams/box-muller"; }

private:
    static constexpr double kPi = 3.141592653589793238462643383279502884;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace capmsize
