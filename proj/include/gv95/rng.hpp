#ifndef GV95_RNG_HPP
#define GV95_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace gv95 {

// All randomness in a session is derived from one master seed. Each
// subsystem gets its own stream keyed by name, so adding a subsystem
// (or reordering draws inside one) never perturbs the others.

constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stream id for a named subsystem, optionally indexed (sweep points,
// parallel workers).
inline std::uint64_t stream_id(std::uint64_t master, std::string_view name,
                               std::uint64_t index = 0) {
    std::uint64_t h = splitmix64(master ^ fnv1a64(name));
    return splitmix64(h + 0x632be59bd9b4e019ULL * (index + 1));
}

inline std::mt19937_64 make_stream(std::uint64_t master, std::string_view name,
                                   std::uint64_t index = 0) {
    std::uint64_t s = stream_id(master, name, index);
    std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                      static_cast<std::uint32_t>(splitmix64(s)),
                      static_cast<std::uint32_t>(splitmix64(s) >> 32)};
    return std::mt19937_64(seq);
}

} // namespace gv95

#endif
