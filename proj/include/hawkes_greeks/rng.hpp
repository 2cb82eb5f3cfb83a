#pragma once

#include <array>
#include <cstdint>

namespace hawkes_greeks {

// Philox4x32-10 block function (Salmon et al.).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

enum class Purpose : std::uint32_t {
    base_points = 1,
    brownian = 2,
    bridge = 3,
    reference = 4,
    test = 15,
};

struct StreamId {
    std::uint64_t seed = 0;
    std::uint64_t path = 0;
};

/// Sequential draws from one (seed, path, purpose, substream) stream.
/// Two streams with different keys never share a Philox block.
class CounterStream {
public:
    CounterStream(StreamId id, Purpose purpose, std::uint32_t substream = 0);

    std::uint64_t next_u64();
    /// Uniform on the open interval (0, 1).
    double uniform();
    double normal();
    double exponential(double rate);

private:
    void refill();

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 4> block_{};
    int used_ = 4;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace hawkes_greeks
