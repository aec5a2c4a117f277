#pragma once

#include "qnkit/model.hpp"

#include <cstdint>
#include <vector>

namespace qnkit {

enum class PamVariant { Basic, Improved, Two };

const char* to_string(PamVariant variant);

struct PamResult {
    PamVariant variant = PamVariant::Basic;
    std::vector<double> throughput;  ///< per chain
    std::vector<double> utilization; ///< per station, sum_k tau_mk T_k
    std::vector<bool> scaled;        ///< per chain: utilization scaling applied
    double total_throughput = 0.0;
};

/// Counts inner (station, chain) evaluations, for checking the O(MK) and
/// O(MK^2) cost claims.
struct PamCounter {
    std::uint64_t station_chain_terms = 0;
};

/// Proportional queue-length estimate followed by one MVA step.
PamResult pam_basic(const MultichainModel& model, PamCounter* counter = nullptr);

/// pam_basic plus per-chain scaling so that no visited station exceeds
/// utilization one.
PamResult pam_improved(const MultichainModel& model, PamCounter* counter = nullptr);

/// Proportional estimates at N - 1_k - 1_h, two exact MVA steps, then the
/// same scaling as pam_improved.
PamResult pam_two(const MultichainModel& model, PamCounter* counter = nullptr);

} // namespace qnkit
