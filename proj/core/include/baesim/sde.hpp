#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "baesim/linres.hpp"
#include "baesim/params.hpp"
#include "baesim/trace.hpp"

namespace baesim::sde {

/// Time-domain oracle configuration. The drift, its step propagator and the
/// noise covariance are evaluated exactly (matrix exponential over dt), so dt
/// only has to satisfy the sampling constraint below, not an accuracy one.
struct SdeConfig {
    double dt = 0.0;             // s; dt * max(kappa, gamma_eff, |delta|, |Delta|) < 0.1
    std::uint64_t n_steps = 0;   // recorded samples (after burn-in)
    int n_segments = 64;         // >= 8, Welch periodograms at 50% overlap
    std::uint64_t seed = 1;
    std::uint64_t burn_in = 0;   // discarded settling steps
};

/// Throws std::invalid_argument when the config invariants fail for the model.
void validate(const SdeConfig& cfg, const linres::ScatteringModel& m);

/// Sampled fluctuation records. a/b are point samples of the intracavity and
/// mechanical fields; a_out/a_in are step-averaged output and input-noise
/// records (the input record is what the heterodyne estimator interferes
/// against, so it is part of the trajectory).
struct Trajectory {
    double dt = 0.0;
    std::vector<std::complex<double>> a;
    std::vector<std::complex<double>> b;
    std::vector<std::complex<double>> a_out;
    std::vector<std::complex<double>> a_in;
};

/// Integrates the linearized Langevin equations as classical complex SDEs with
/// symmetrized noise strengths (vacuum 1/2, mechanical n_bath + 1/2). One RNG
/// stream; identical inputs give bit-identical trajectories. Divergence (from
/// an unstable model) raises InstabilityError carrying the step index.
Trajectory integrate(const linres::ScatteringModel& m, const SdeConfig& cfg);

struct PsdOptions {
    /// Subtract the periodogram of the known input record instead of its mean.
    /// Exact-mean control variate; removes most of the vacuum-floor variance.
    bool vacuum_control_variate = true;
    double band = 0.0;        // crop to +-band rad/s; 0: |delta| + 10 gamma_eff
    std::uint64_t seg_len = 0; // frame length (power of two); 0: from trajectory/servo
};

/// Welch estimate (Hann, 50% overlap) of the heterodyne PSD from a trajectory.
/// Vacuum floor is 1 by construction. Throws StatisticsError when the record
/// cannot supply cfg.n_segments frames.
SpectrumTrace estimate_psd(const Trajectory& t, const DetectionParams& detect,
                           const linres::ScatteringModel& m, const SdeConfig& cfg,
                           const PsdOptions& opt = {});

/// Segment-streamed sampler for long runs: integrates in independent blocks
/// (per-block RNG streams derived from cfg.seed), accumulates periodograms,
/// and reduces in fixed block order. Results are independent of n_threads.
/// Run length is n_segments frames of seg_len; cfg.n_steps is ignored.
SpectrumTrace sample_heterodyne_psd(const linres::ScatteringModel& m,
                                    const DetectionParams& detect, const SdeConfig& cfg,
                                    int n_threads = 1, const PsdOptions& opt = {});

/// Flat little-endian checkpoint: magic "BAES", u32 version, f64 dt, u64 count,
/// then four interleaved re/im double arrays (a, b, a_out, a_in).
void write_trajectory(const Trajectory& t, const std::string& path);
Trajectory read_trajectory(const std::string& path);

class StatisticsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace baesim::sde
