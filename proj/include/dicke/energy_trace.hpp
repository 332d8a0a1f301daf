#pragma once

#include <vector>

namespace dicke {

/// Time-resolved stored energy per molecule on a uniform grid.
/// `inversion`, `photon_number` and `photon_ratio` are optional (may be empty).
struct EnergyTrace {
    std::vector<double> times;          ///< ps
    std::vector<double> energy;         ///< meV per molecule
    std::vector<double> inversion;      ///< ⟨σ^z⟩
    std::vector<double> photon_number;  ///< ⟨a†a⟩
    std::vector<double> photon_ratio;   ///< ⟨a†a⟩/N
};

}  // namespace dicke
