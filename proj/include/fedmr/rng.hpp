#pragma once

#include <cstdint>
#include <random>

namespace fedmr {

// splitmix64 finalizer; good avalanche, cheap, stable across platforms.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Combines seed components into one stream value. Every piece of randomness
// in the engine is keyed by an explicit (seed, stream, ...) tuple so that
// runs replay exactly and the independent seed streams never alias.
inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (splitmix64(b) + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix(mix(a, b), c);
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
    return std::mt19937_64(seed);
}

// Stream tags separating the independent sources of randomness.
namespace stream {
inline constexpr std::uint64_t model_init = 0x01;
inline constexpr std::uint64_t batch_order = 0x02;
inline constexpr std::uint64_t client_sampling = 0x03;
inline constexpr std::uint64_t recombine = 0x04;
inline constexpr std::uint64_t partition = 0x05;
inline constexpr std::uint64_t data_train = 0x06;
inline constexpr std::uint64_t data_test = 0x07;
} // namespace stream

// Seed derivations used by the orchestrator. Exposed so tests can replay
// individual stages of a run without going through the round loop.
inline std::uint64_t model_init_seed(std::uint64_t init_seed, int model_index) {
    return mix(init_seed, stream::model_init, static_cast<std::uint64_t>(model_index));
}

inline std::uint64_t batch_order_seed(std::uint64_t data_seed, int round, int client_id) {
    return mix(mix(data_seed, stream::batch_order),
               mix(static_cast<std::uint64_t>(round), static_cast<std::uint64_t>(client_id)));
}

inline std::uint64_t sampling_seed(std::uint64_t sampling_seed_base, int round) {
    return mix(sampling_seed_base, stream::client_sampling, static_cast<std::uint64_t>(round));
}

inline std::uint64_t recombine_seed(std::uint64_t recombine_seed_base, int round) {
    return mix(recombine_seed_base, stream::recombine, static_cast<std::uint64_t>(round));
}

inline std::uint64_t partition_seed(std::uint64_t data_seed) {
    return mix(data_seed, stream::partition);
}

} // namespace fedmr
