#pragma once

#include <cstdint>
#include <random>

namespace mlcert {

// splitmix64 step; used to derive decorrelated substream seeds from a master
// seed. Stable across platforms, unlike std::seed_seq.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Seed for substream `stream` of master seed `master`. Distinct streams are
// decorrelated; identical (master, stream) pairs always map to the same seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t s = master;
    std::uint64_t mixed = splitmix64(s);
    s = mixed ^ (stream * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
    return splitmix64(s);
}

// Uniform doubles in [0, 1) from mt19937_64 with a fixed 53-bit mapping.
// std::uniform_real_distribution is implementation-defined; this mapping is
// bit-reproducible for a given seed on every platform.
class UniformSource {
public:
    explicit UniformSource(std::uint64_t seed) : engine_(seed) {}

    double next_unit() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform index in [0, n); n must be > 0. Rejection-free modulo is fine
    // here because n is tiny relative to 2^64.
    std::size_t next_index(std::size_t n) {
        return static_cast<std::size_t>(engine_() % n);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace mlcert
