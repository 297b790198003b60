#pragma once

#include <cmath>
#include <cstdint>

#include "loopanomaly/geometry.hpp"

namespace la {

// Counter-free splittable random stream: a 64-bit path seed expands into
// xoshiro256++ state via splitmix64.  substream(key) mixes the key into the
// path seed without touching the parent, so the same (seed, key-path) always
// yields the same stream regardless of what the parent generated before.
// That property is what makes common-random-number sweeps and worker-count
// independent parallel reductions work.
class Rng {
  public:
    Rng() : Rng(0) {}
    explicit Rng(std::uint64_t seed) : path_(seed) { reset_state(); }

    Rng substream(std::uint64_t key) const {
        Rng r;
        r.path_ = splitmix64(path_ ^ (0x9E3779B97F4A7C15ULL * (key + 0x632BE59BD9B4E019ULL)));
        r.reset_state();
        return r;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform in (0,1]; never returns 0 so it is safe under log()
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

    Vec2 uniform_in(const Box& box) {
        return {uniform(box.x0, box.x1), uniform(box.y0, box.y1)};
    }

    // Box-Muller; the pair is consumed eagerly to keep the stream position
    // a deterministic function of the call count.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u = uniform();
        const double v = uniform();
        const double r = std::sqrt(-2.0 * std::log(u));
        const double a = 6.283185307179586476925286766559 * v;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    std::uint64_t path_seed() const { return path_; }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static std::uint64_t splitmix64(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    void reset_state() {
        std::uint64_t z = path_;
        for (auto& s : s_) {
            z = splitmix64(z);
            s = z;
        }
        have_spare_ = false;
        spare_ = 0.0;
    }

    std::uint64_t path_;
    std::uint64_t s_[4];
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace la
