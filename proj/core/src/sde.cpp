#include "baesim/sde.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <random>
#include <thread>

#include <fftw3.h>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "baesim/errors.hpp"

namespace baesim::sde {

namespace {

using Mat8 = Eigen::Matrix<double, 8, 8>;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Vec4 = Eigen::Matrix<double, 4, 1>;
using Mat4d = Eigen::Matrix<double, 4, 4>;

constexpr double inv_sqrt2 = 0.70710678118654752440;

/// Real quadrature drift in the basis (X_a, Y_a, X_b, Y_b).
Mat4d quadrature_drift(const linres::ScatteringModel& m) {
    const double gd = m.g_plus - m.g_minus;
    const double gs = m.g_plus + m.g_minus;
    Mat4d a = Mat4d::Zero();
    a(0, 0) = -m.kappa / 2;
    a(0, 1) = -m.delta_cav;
    a(0, 3) = gd;
    a(1, 0) = m.delta_cav;
    a(1, 1) = -m.kappa / 2;
    a(1, 2) = gs;
    a(2, 2) = -m.gamma_eff / 2;
    a(2, 3) = -m.delta_mech;
    a(2, 1) = gd;
    a(3, 2) = m.delta_mech;
    a(3, 3) = -m.gamma_eff / 2;
    a(3, 0) = gs;
    return a;
}

/// Exact one-step map of the augmented system (state, integrated optical
/// quadratures, integrated optical noise). The propagator and the joint noise
/// covariance come from a Van Loan block exponential, so the discrete chain
/// samples the continuous solution without step-size bias.
struct ExactStepper {
    Mat4d f_uu;                        // state propagator
    Eigen::Matrix<double, 2, 4> g_su;  // integrated-quadrature response to the state
    Mat8 noise_l;                      // factor of the joint increment covariance
    double sqrt_kappa;
    double dt;

    ExactStepper(const linres::ScatteringModel& m, double dt_) : dt(dt_) {
        sqrt_kappa = std::sqrt(m.kappa);
        const Mat4d a = quadrature_drift(m);

        Mat8 atil = Mat8::Zero();
        atil.topLeftCorner<4, 4>() = a;
        atil(4, 0) = 1.0;  // d/dt int X_a = X_a
        atil(5, 1) = 1.0;

        Eigen::Matrix<double, 8, 4> b = Eigen::Matrix<double, 8, 4>::Zero();
        b(0, 0) = sqrt_kappa;
        b(1, 1) = sqrt_kappa;
        b(2, 2) = std::sqrt(m.gamma_eff);
        b(3, 3) = std::sqrt(m.gamma_eff);
        b(6, 0) = 1.0;  // raw optical noise integrals share the same channels
        b(7, 1) = 1.0;

        Eigen::Matrix<double, 4, 1> intensity;
        intensity << 0.5, 0.5, m.n_bath + 0.5, m.n_bath + 0.5;
        const Mat8 qc = b * intensity.asDiagonal() * b.transpose();

        Eigen::Matrix<double, 16, 16> vl = Eigen::Matrix<double, 16, 16>::Zero();
        vl.topLeftCorner<8, 8>() = -atil * dt;
        vl.topRightCorner<8, 8>() = qc * dt;
        vl.bottomRightCorner<8, 8>() = atil.transpose() * dt;
        const Eigen::Matrix<double, 16, 16> e = vl.exp();

        const Mat8 ftil = e.bottomRightCorner<8, 8>().transpose();
        Mat8 q = ftil * e.topRightCorner<8, 8>();
        q = 0.5 * (q + q.transpose()).eval();

        // The raw covariance spans ~20 decades (state variances vs integrated
        // noise), so factor the rescaled, correlation-like matrix: otherwise the
        // eigensolver's absolute error floor wipes out the small cross blocks
        // whose cancellations set the output's white level.
        Vec8 scale;
        for (int i = 0; i < 8; ++i) scale(i) = std::sqrt(std::max(q(i, i), 1e-300));
        Mat8 corr;
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) corr(i, j) = q(i, j) / (scale(i) * scale(j));
        Eigen::SelfAdjointEigenSolver<Mat8> es(corr);
        Mat8 sqrt_l = Mat8::Zero();
        for (int i = 0; i < 8; ++i)
            sqrt_l(i, i) = std::sqrt(std::max(0.0, es.eigenvalues()(i)));
        noise_l = scale.asDiagonal() * es.eigenvectors() * sqrt_l;

        f_uu = ftil.topLeftCorner<4, 4>();
        g_su = ftil.block<2, 4>(4, 0);
    }

    struct Outputs {
        std::complex<double> a, b, a_out, a_in;
    };

    /// Advances u and returns the records for the elapsed step.
    template <typename Rng>
    Outputs step(Vec4& u, Rng&& normal8) const {
        Vec8 xi;
        for (int i = 0; i < 8; ++i) xi(i) = normal8();
        const Vec8 n = noise_l * xi;
        const Eigen::Matrix<double, 2, 1> s_inc = g_su * u + n.segment<2>(4);
        const Eigen::Matrix<double, 2, 1> v_inc = n.segment<2>(6);
        u = (f_uu * u + n.head<4>()).eval();

        Outputs o;
        o.a = {u(0) * inv_sqrt2, u(1) * inv_sqrt2};
        o.b = {u(2) * inv_sqrt2, u(3) * inv_sqrt2};
        const double norm = inv_sqrt2 / dt;
        o.a_in = {v_inc(0) * norm, v_inc(1) * norm};
        o.a_out = {o.a_in.real() - sqrt_kappa * s_inc(0) * norm,
                   o.a_in.imag() - sqrt_kappa * s_inc(1) * norm};
        return o;
    }
};

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// 128-layer ziggurat tables (Marsaglia-Tsang) scaled for 51-bit integers.
struct ZigguratTables {
    static constexpr double r = 3.442619855899;
    std::uint64_t kn[128];
    double wn[128];
    double fn[128];

    ZigguratTables() {
        const double m1 = 0x1.0p51;
        const double vn = 9.91256303526217e-3;
        double dn = r, tn = r;
        double q = vn / std::exp(-0.5 * dn * dn);
        kn[0] = std::uint64_t((dn / q) * m1);
        kn[1] = 0;
        wn[0] = q / m1;
        wn[127] = dn / m1;
        fn[0] = 1.0;
        fn[127] = std::exp(-0.5 * dn * dn);
        for (int i = 126; i >= 1; --i) {
            dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
            kn[i + 1] = std::uint64_t((dn / tn) * m1);
            tn = dn;
            fn[i] = std::exp(-0.5 * dn * dn);
            wn[i] = dn / m1;
        }
    }
};

const ZigguratTables zig{};

/// Deterministic Gaussian stream: mt19937_64 through a ziggurat rejection layer.
struct GaussianStream {
    std::mt19937_64 eng;

    explicit GaussianStream(std::uint64_t seed) : eng(seed) {}

    double uniform() { return double(eng() >> 11) * 0x1.0p-53; }

    double operator()() {
        for (;;) {
            const std::uint64_t bits = eng();
            const unsigned iz = unsigned(bits & 127);
            const std::int64_t hz = std::int64_t(bits) >> 12;  // 51-bit + sign
            if (std::uint64_t(hz < 0 ? -hz : hz) < zig.kn[iz]) return double(hz) * zig.wn[iz];

            if (iz == 0) {
                // Tail of the base strip.
                double x, y;
                do {
                    double u;
                    do { u = uniform(); } while (u <= 0.0);
                    x = -std::log(u) / zig.r;
                    do { u = uniform(); } while (u <= 0.0);
                    y = -std::log(u);
                } while (y + y < x * x);
                return hz >= 0 ? zig.r + x : -zig.r - x;
            }
            const double x = double(hz) * zig.wn[iz];
            if (zig.fn[iz] + uniform() * (zig.fn[iz - 1] - zig.fn[iz]) <
                std::exp(-0.5 * x * x))
                return x;
        }
    }
};

constexpr double overflow_guard = 1e9;

} // namespace

void validate(const SdeConfig& cfg, const linres::ScatteringModel& m) {
    std::vector<std::string> v;
    const double fastest = std::max({m.kappa, m.gamma_eff, std::abs(m.delta_mech),
                                     std::abs(m.delta_cav)});
    if (!(cfg.dt > 0)) v.push_back("dt must be > 0");
    if (cfg.dt * fastest >= 0.1)
        v.push_back("dt too coarse: dt * max(kappa, gamma_eff, |delta|, |Delta|) must be < 0.1");
    if (cfg.n_steps == 0) v.push_back("n_steps must be > 0");
    if (cfg.n_segments < 8) v.push_back("n_segments must be >= 8");
    if (!(m.gamma_eff > 0) || !(m.kappa > 0)) v.push_back("model rates must be > 0");
    if (m.n_bath < 0) v.push_back("n_bath must be >= 0");
    if (!v.empty()) throw ConfigError(std::move(v));
}

Trajectory integrate(const linres::ScatteringModel& m, const SdeConfig& cfg) {
    validate(cfg, m);
    const ExactStepper stepper(m, cfg.dt);
    GaussianStream rng(cfg.seed);

    Trajectory t;
    t.dt = cfg.dt;
    t.a.reserve(cfg.n_steps);
    t.b.reserve(cfg.n_steps);
    t.a_out.reserve(cfg.n_steps);
    t.a_in.reserve(cfg.n_steps);

    Vec4 u = Vec4::Zero();
    for (std::uint64_t k = 0; k < cfg.burn_in; ++k) {
        stepper.step(u, rng);
        if (u.norm() > overflow_guard)
            throw InstabilityError("sde::integrate: divergence during burn-in at step " +
                                       std::to_string(k),
                                   double(k));
    }
    for (std::uint64_t k = 0; k < cfg.n_steps; ++k) {
        const auto o = stepper.step(u, rng);
        if (u.norm() > overflow_guard)
            throw InstabilityError(
                "sde::integrate: divergence at step " + std::to_string(k), double(k));
        t.a.push_back(o.a);
        t.b.push_back(o.b);
        t.a_out.push_back(o.a_out);
        t.a_in.push_back(o.a_in);
    }
    return t;
}

namespace {

std::mutex fftw_mutex;

/// One reusable Hann/FFT workspace.
struct WelchPlan {
    std::uint64_t n;
    std::vector<double> window;
    double window_norm;  // sum of squares
    fftw_plan plan;
    std::vector<std::complex<double>> in, out;

    explicit WelchPlan(std::uint64_t n_) : n(n_), in(n_), out(n_) {
        window.resize(n);
        window_norm = 0.0;
        for (std::uint64_t i = 0; i < n; ++i) {
            window[i] = 0.5 * (1.0 - std::cos(two_pi * double(i) / double(n)));
            window_norm += window[i] * window[i];
        }
        std::lock_guard<std::mutex> lock(fftw_mutex);
        plan = fftw_plan_dft_1d(int(n), reinterpret_cast<fftw_complex*>(in.data()),
                                reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD,
                                FFTW_ESTIMATE);
    }
    ~WelchPlan() {
        std::lock_guard<std::mutex> lock(fftw_mutex);
        fftw_destroy_plan(plan);
    }
    WelchPlan(const WelchPlan&) = delete;
    WelchPlan& operator=(const WelchPlan&) = delete;

    /// Accumulates dt |FFT(w x)|^2 / sum(w^2) into acc (unshifted bin order).
    void accumulate(const std::complex<double>* x, double dt, std::vector<double>& acc) {
        for (std::uint64_t i = 0; i < n; ++i) in[i] = x[i] * window[i];
        fftw_execute(plan);
        const double scale = dt / window_norm;
        for (std::uint64_t i = 0; i < n; ++i) acc[i] += scale * std::norm(out[i]);
    }
};

std::uint64_t floor_pow2(std::uint64_t x) {
    std::uint64_t p = 1;
    while (p * 2 <= x) p *= 2;
    return p;
}

/// Averaged periodograms -> calibrated heterodyne trace. The step-averaging
/// transfer |sinc(w dt / 2)|^2 is divided out of the narrowband part; the
/// aliased white floor already sums to an exactly flat level.
SpectrumTrace assemble_trace(const std::vector<double>& pout, const std::vector<double>& pin,
                             std::uint64_t n, double dt, double eta, double band,
                             bool control_variate) {
    SpectrumTrace t;
    const double dw = two_pi / (double(n) * dt);
    const std::int64_t half = std::int64_t(n) / 2;
    for (std::int64_t j = -half; j < half; ++j) {
        const double w = double(j) * dw;
        if (std::abs(w) > band) continue;
        // The heterodyne combination reads the photocurrent band at -w, and the
        // forward DFT already stores physics frequency -w_k at bin k, so the two
        // reflections cancel: bin j carries the reported offset +w_j.
        const std::uint64_t bin = std::uint64_t((j + std::int64_t(n)) % std::int64_t(n));
        const double ref = control_variate ? pin[bin] : 0.5;
        const double x = 0.5 * w * dt;
        const double sinc = x == 0.0 ? 1.0 : std::sin(x) / x;
        const double signal = (pout[bin] - ref) / (sinc * sinc);
        const double psd = 1.0 + eta * signal;
        t.freq_offsets.push_back(w);
        t.psd.push_back(std::max(0.0, psd));
    }
    return t;
}

} // namespace

SpectrumTrace estimate_psd(const Trajectory& t, const DetectionParams& detect,
                           const linres::ScatteringModel& m, const SdeConfig& cfg,
                           const PsdOptions& opt) {
    const std::uint64_t len = t.a_out.size();
    if (len == 0 || t.a_in.size() != len)
        throw StatisticsError("estimate_psd: trajectory lacks output/input records");
    const std::uint64_t want = std::uint64_t(cfg.n_segments);
    std::uint64_t seg = opt.seg_len ? opt.seg_len : floor_pow2(2 * len / (want + 1));
    if (seg < 64 || seg > len)
        throw StatisticsError("estimate_psd: record too short for requested segments");

    WelchPlan plan(seg);
    std::vector<double> pout(seg, 0.0), pin(seg, 0.0);
    const std::uint64_t hop = seg / 2;
    std::uint64_t frames = 0;
    for (std::uint64_t start = 0; start + seg <= len; start += hop, ++frames) {
        plan.accumulate(t.a_out.data() + start, t.dt, pout);
        plan.accumulate(t.a_in.data() + start, t.dt, pin);
    }
    if (frames < want)
        throw StatisticsError("estimate_psd: only " + std::to_string(frames) + " of " +
                              std::to_string(cfg.n_segments) + " segments available");
    for (auto& x : pout) x /= double(frames);
    for (auto& x : pin) x /= double(frames);

    const double band =
        opt.band > 0 ? opt.band : std::abs(m.delta_mech) + 10.0 * m.gamma_eff;
    SpectrumTrace out = assemble_trace(pout, pin, seg, t.dt, detect.eta, band,
                                       opt.vacuum_control_variate);
    out.meta.generator = "sde";
    out.meta.timestamp = iso_timestamp();
    out.meta.fields["seed"] = std::to_string(cfg.seed);
    out.meta.fields["dt_s"] = std::to_string(t.dt);
    out.meta.fields["n_segments"] = std::to_string(frames);
    return out;
}

SpectrumTrace sample_heterodyne_psd(const linres::ScatteringModel& m,
                                    const DetectionParams& detect, const SdeConfig& cfg,
                                    int n_threads, const PsdOptions& opt) {
    SdeConfig checked = cfg;
    if (checked.n_steps == 0) checked.n_steps = 1;  // duration comes from n_segments here
    validate(checked, m);
    if (!linres::is_stable(m))
        throw InstabilityError("sample_heterodyne_psd: model is dynamically unstable", 0.0);

    // Frame length from the resolution servo: >= 12 bins per effective linewidth.
    std::uint64_t seg = opt.seg_len;
    if (seg == 0) {
        const double t_seg = two_pi * 12.0 / m.gamma_eff;
        seg = 64;
        while (double(seg) * cfg.dt < t_seg && seg < (1ULL << 26)) seg *= 2;
    }

    const int total_frames = std::max(cfg.n_segments, 8);
    const int n_blocks = std::min(8, std::max(1, total_frames / 8));
    const int frames_per_block = (total_frames + n_blocks - 1) / n_blocks;
    const std::uint64_t burn =
        cfg.burn_in ? cfg.burn_in : std::uint64_t(8.0 / (m.gamma_eff * cfg.dt));

    struct BlockAcc {
        std::vector<double> pout, pin;
        std::uint64_t frames = 0;
    };
    std::vector<BlockAcc> acc(n_blocks);
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::string fail_msg;
    std::mutex fail_mutex;

    auto worker = [&]() {
        WelchPlan plan(seg);
        std::vector<std::complex<double>> buf_out(seg), buf_in(seg);
        const ExactStepper stepper(m, cfg.dt);
        const std::uint64_t hop = seg / 2;
        for (int blk = next.fetch_add(1); blk < n_blocks; blk = next.fetch_add(1)) {
            if (failed.load()) return;
            BlockAcc& a = acc[blk];
            a.pout.assign(seg, 0.0);
            a.pin.assign(seg, 0.0);
            GaussianStream rng(splitmix64(cfg.seed ^ (0x5b1ce5ULL + std::uint64_t(blk))));
            Vec4 u = Vec4::Zero();
            try {
                for (std::uint64_t k = 0; k < burn; ++k) {
                    stepper.step(u, rng);
                    if (u.norm() > overflow_guard)
                        throw InstabilityError("sde: divergence during burn-in", double(k));
                }
                // Prime the first half-frame, then stream hop-sized chunks.
                for (std::uint64_t i = 0; i < hop; ++i) {
                    const auto o = stepper.step(u, rng);
                    buf_out[i] = o.a_out;
                    buf_in[i] = o.a_in;
                }
                for (int f = 0; f < frames_per_block; ++f) {
                    for (std::uint64_t i = hop; i < seg; ++i) {
                        const auto o = stepper.step(u, rng);
                        buf_out[i] = o.a_out;
                        buf_in[i] = o.a_in;
                    }
                    if (u.norm() > overflow_guard)
                        throw InstabilityError("sde: divergence", double(f));
                    plan.accumulate(buf_out.data(), cfg.dt, a.pout);
                    plan.accumulate(buf_in.data(), cfg.dt, a.pin);
                    a.frames++;
                    std::copy(buf_out.begin() + hop, buf_out.end(), buf_out.begin());
                    std::copy(buf_in.begin() + hop, buf_in.end(), buf_in.begin());
                }
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(fail_mutex);
                failed = true;
                fail_msg = e.what();
                return;
            }
        }
    };

    const int nt = std::max(1, std::min(n_threads, n_blocks));
    if (nt == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failed.load()) throw InstabilityError("sample_heterodyne_psd: " + fail_msg, 0.0);

    // Fixed-order reduction keeps the result identical for any thread count.
    std::vector<double> pout(seg, 0.0), pin(seg, 0.0);
    std::uint64_t frames = 0;
    for (const auto& a : acc) {
        for (std::uint64_t i = 0; i < seg; ++i) {
            pout[i] += a.pout[i];
            pin[i] += a.pin[i];
        }
        frames += a.frames;
    }
    for (auto& x : pout) x /= double(frames);
    for (auto& x : pin) x /= double(frames);

    const double band =
        opt.band > 0 ? opt.band : std::abs(m.delta_mech) + 10.0 * m.gamma_eff;
    SpectrumTrace out = assemble_trace(pout, pin, seg, cfg.dt, detect.eta, band,
                                       opt.vacuum_control_variate);
    out.meta.generator = "sde";
    out.meta.timestamp = iso_timestamp();
    out.meta.fields["seed"] = std::to_string(cfg.seed);
    out.meta.fields["dt_s"] = std::to_string(cfg.dt);
    out.meta.fields["n_segments"] = std::to_string(frames);
    out.meta.fields["seg_len"] = std::to_string(seg);
    return out;
}

void write_trajectory(const Trajectory& t, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    const char magic[4] = {'B', 'A', 'E', 'S'};
    const std::uint32_t version = 1;
    const std::uint64_t n = t.a.size();
    f.write(magic, 4);
    f.write(reinterpret_cast<const char*>(&version), 4);
    f.write(reinterpret_cast<const char*>(&t.dt), 8);
    f.write(reinterpret_cast<const char*>(&n), 8);
    for (const auto* arr : {&t.a, &t.b, &t.a_out, &t.a_in})
        f.write(reinterpret_cast<const char*>(arr->data()),
                std::streamsize(arr->size() * sizeof(std::complex<double>)));
    if (!f) throw IoError("write failed: " + path);
}

Trajectory read_trajectory(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    char magic[4];
    std::uint32_t version = 0;
    Trajectory t;
    std::uint64_t n = 0;
    f.read(magic, 4);
    if (std::memcmp(magic, "BAES", 4) != 0) throw IoError(path + ": not a trajectory file");
    f.read(reinterpret_cast<char*>(&version), 4);
    if (version != 1) throw IoError(path + ": unsupported version");
    f.read(reinterpret_cast<char*>(&t.dt), 8);
    f.read(reinterpret_cast<char*>(&n), 8);
    for (auto* arr : {&t.a, &t.b, &t.a_out, &t.a_in}) {
        arr->resize(n);
        f.read(reinterpret_cast<char*>(arr->data()),
               std::streamsize(n * sizeof(std::complex<double>)));
    }
    if (!f) throw IoError(path + ": truncated trajectory file");
    return t;
}

} // namespace baesim::sde
