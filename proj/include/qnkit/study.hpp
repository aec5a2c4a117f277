#pragma once

#include "qnkit/bounds.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qnkit {

/// Randomized accuracy study of the UJA series against exact convolution.
///
/// Each sample draws M stations with demands X0 (1 + u), u uniform on
/// [-a, a] where a = c sqrt(3) gives coefficient of variation c, and c itself
/// is uniform on [cv_min, cv_max]. The population is the k in
/// [population_min, population_max] whose exact mean utilization is closest
/// to the centre of the band; the draw is rejected when that utilization falls
/// outside [utilization_lo, utilization_hi].
struct StudyConfig {
    int samples = 1000;
    int stations_min = 18;
    int stations_max = 18;
    double cv_min = 0.0;
    double cv_max = 0.3;
    int population_min = 1;
    int population_max = 200;
    std::uint64_t seed = 42;
    double utilization_lo = 0.35;
    double utilization_hi = 0.45;
    int order = 2;
    /// Optional bounds section evaluated on every sample.
    std::vector<BoundMethod> bounds;
    int bound_level = 2;
    /// Optional PAM section: number of random multichain models.
    int pam_samples = 0;
    /// Draw attempts allowed per requested sample before giving up.
    int attempts_per_sample = 20;
};

/// Throws ParseError with a field path on malformed or out-of-range input.
StudyConfig parse_study_config(const std::string& text);
StudyConfig load_study_config(const std::string& path);

struct StudySample {
    int index = 0;    ///< draw attempt that produced the sample
    int stations = 0;
    double target_cv = 0.0;
    double cv = 0.0;
    int population = 0;
    double utilization = 0.0;
    double exact = 0.0;
    std::vector<double> approx;  ///< T_0..T_order; NaN where the series diverged
    std::vector<double> error;   ///< relative errors, +inf where diverged
    std::vector<BoundInterval> bounds;
};

struct ErrorSummary {
    std::string name;
    int count = 0;
    int diverged = 0;
    double mean = 0.0;
    double p50 = 0.0;
    double p90 = 0.0;
    double p95 = 0.0;
    double p99 = 0.0;
    double max = 0.0;
    double within10 = 0.0; ///< fraction with relative error <= 0.10
    double within15 = 0.0;
};

struct BoundSummary {
    std::string name;
    int count = 0;
    int violations = 0;
    double mean_error_measure = 0.0;
};

struct PamSummary {
    std::string name;
    int count = 0;
    double mean = 0.0;
    double max = 0.0;
    double max_utilization = 0.0;
};

struct StudyResult {
    StudyConfig config;
    int attempts = 0;
    std::vector<StudySample> samples;
    std::vector<ErrorSummary> errors; ///< one per order 0..order
    std::vector<BoundSummary> bounds;
    std::vector<PamSummary> pam;
};

/// Throws ModelError when fewer than `samples` draws land in the utilization
/// band within the attempt budget.
StudyResult run_study(const StudyConfig& config);

/// Summary of relative errors (nearest-rank percentiles).
ErrorSummary summarize_errors(std::string name, std::vector<double> errors);

/// Plain-text report; identical bytes for identical configs.
std::string format_study_report(const StudyResult& result);

} // namespace qnkit
