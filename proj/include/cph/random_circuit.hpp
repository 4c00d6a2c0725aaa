#ifndef CPH_RANDOM_CIRCUIT_HPP
#define CPH_RANDOM_CIRCUIT_HPP

#include "cph/netlist.hpp"

#include <array>
#include <cstdint>
#include <string>

namespace cph {

struct KindMix {
    // weights indexed by ElementKind order V, I, C, L, R, G
    std::array<double, 6> weight{1, 1, 3, 3, 2, 2};

    // "V:1,C:3,R:2" or a plain letter string such as "CCRL" (one unit per letter).
    static KindMix parse(const std::string& text);
};

struct RandomCircuitOptions {
    std::size_t nodes = 5;
    std::size_t edges = 8;
    KindMix kinds;
    std::uint64_t seed = 1;
    double value_min = 1e-3;  // parameters are log-uniform in [value_min, value_max]
    double value_max = 1e3;
    std::size_t max_retries = 1000;
};

// Random spanning tree plus random extra edges, regenerated until the
// voltage-cycle and current-cutset conditions hold. Deterministic per seed.
CircuitSpec random_circuit(const RandomCircuitOptions& opts);

}  // namespace cph

#endif
