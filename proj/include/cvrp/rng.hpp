#ifndef CVRP_RNG_HPP_
#define CVRP_RNG_HPP_

#include <cassert>
#include <cstdint>

namespace cvrp {

    // Deterministic 64-bit generator (xoshiro256** seeded through splitmix64).
    //
    // Every public draw advances the underlying engine exactly once, whatever the
    // outcome. That discipline is what keeps cooperating solvers aligned on the
    // shared stream: the number of draws per simulated change is fixed by the
    // protocol, so identical seeds imply identical streams on every platform.
    // Standard-library distributions are avoided on purpose — they may consume an
    // unspecified number of engine calls.
    class Rng {
    public:
        explicit Rng(std::uint64_t seed) {
            // splitmix64 expansion of the seed into the xoshiro state.
            std::uint64_t x = seed;
            for (auto& word : s) {
                x += 0x9E3779B97F4A7C15ULL;
                std::uint64_t z = x;
                z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
                z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
                word = z ^ (z >> 31);
            }
        }

        // Uniform 64-bit word. One draw.
        std::uint64_t next_u64() {
            const std::uint64_t result = rotl(s[1] * 5, 7) * 9;
            const std::uint64_t t = s[1] << 17;
            s[2] ^= s[0];
            s[3] ^= s[1];
            s[1] ^= s[2];
            s[0] ^= s[3];
            s[2] ^= t;
            s[3] = rotl(s[3], 45);
            ++draws;
            return result;
        }

        // Uniform double in [0, 1) with 53 random bits. One draw.
        double next_double() {
            return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        }

        // Uniform integer in [0, bound). One draw (Lemire multiply-shift).
        int next_int(int bound) {
            assert(bound > 0);
            const auto r = static_cast<unsigned __int128>(next_u64());
            return static_cast<int>((r * static_cast<std::uint64_t>(bound)) >> 64);
        }

        // Fair coin. One draw.
        bool next_bool() {
            return (next_u64() >> 63) != 0;
        }

        // Fisher-Yates shuffle; consumes exactly max(n - 1, 0) draws.
        template <typename T>
        void shuffle(T* data, int n) {
            for (int i = n - 1; i > 0; --i) {
                const int j = next_int(i + 1);
                T tmp = data[i];
                data[i] = data[j];
                data[j] = tmp;
            }
        }

        // Number of engine advances so far (draw-schedule checks in tests).
        std::uint64_t draw_count() const {
            return draws;
        }

    private:
        static std::uint64_t rotl(std::uint64_t x, int k) {
            return (x << k) | (x >> (64 - k));
        }

        std::uint64_t s[4] = {};
        std::uint64_t draws = 0;
    };

}  // namespace cvrp

#endif
