#include "copra/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace copra {

namespace {

constexpr double kDbPerNeper = 10.0 / 2.302585092994045684;  // 10 / ln(10)

double to_db(double linear) {
    return 10.0 * std::log10(linear);
}

// Minimal loading applied to a numerically singular sample covariance.
double minimal_loading(const HermitianEigensystem& es) {
    return 1e-8 * es.lambda().sum() / static_cast<double>(es.size());
}

template <typename F>
void guarded(TrialRecord& rec, Method m, F&& body) {
    try {
        rec.sinr[method_index(m)] = body();
    } catch (const std::exception& e) {
        rec.sinr[method_index(m)].reset();
        rec.failure[method_index(m)] = e.what();
    }
}

}  // namespace

double output_sinr(const BeamformerWeights& w, const Scenario& scenario,
                   const ComplexMatrix& interference_noise) {
    if (w.w.size() != scenario.a_true.size())
        throw std::invalid_argument("output_sinr: weight length mismatch");
    if (!w.w.allFinite())
        throw std::invalid_argument("output_sinr: weights are not finite");
    const double denom = w.w.dot(interference_noise * w.w).real();
    if (!(denom > 0.0))
        throw std::invalid_argument("output_sinr: zero interference-plus-noise power (w = 0?)");
    return scenario.soi_power * std::norm(w.w.dot(scenario.a_true)) / denom;
}

double output_sinr(const BeamformerWeights& w, const Scenario& scenario) {
    return output_sinr(w, scenario, interference_noise_covariance(scenario));
}

bool TrialRecord::method_fell_back(Method m) const {
    switch (m) {
    case Method::Copra: return gamma_b_fallback || gamma_z_fallback;
    case Method::SampleMvdr: return mvdr_loaded;
    default: return false;
    }
}

TrialRecord run_trial(const ExperimentConfig& cfg, std::uint64_t trial_index,
                      std::uint64_t master_seed) {
    RandomStream rng(substream_seed(master_seed, trial_index));
    const Scenario scenario = draw_scenario(rng, cfg.scenario());
    const SnapshotSet snaps = synthesize_snapshots(scenario, cfg.n_snapshots, rng);
    const HermitianEigensystem es = hermitian_evd(sample_covariance(snaps));
    const ComplexMatrix c_in = interference_noise_covariance(scenario);
    const ComplexVector& a = scenario.a_presumed;

    TrialRecord rec;
    rec.trial_index = trial_index;
    rec.soi_doa_deg = scenario.soi_doa_deg;
    rec.soi_error_deg = scenario.soi_error_deg;
    rec.interferer_doas_deg = scenario.interferer_doas_deg;

    guarded(rec, Method::Optimal,
            [&] { return output_sinr(optimal_weights(scenario), scenario, c_in); });

    if (cfg.enabled(Method::SampleMvdr)) {
        guarded(rec, Method::SampleMvdr, [&] {
            BeamformerWeights w;
            try {
                w = mvdr_weights(es, a);
            } catch (const NumericalError&) {
                w = diagonal_loading_weights(es, a, minimal_loading(es));
                w.method = Method::SampleMvdr;
                rec.mvdr_loaded = true;
            }
            return output_sinr(w, scenario, c_in);
        });
    }

    if (cfg.enabled(Method::DiagonalLoading)) {
        guarded(rec, Method::DiagonalLoading, [&] {
            return output_sinr(diagonal_loading_weights(es, a, cfg.diagonal_loading), scenario, c_in);
        });
    }

    const bool need_split = cfg.enabled(Method::Copra);
    if (need_split) {
        guarded(rec, Method::Copra, [&] {
            const EigenSplit split = split_eigenvalues(es, cfg.rho);
            rec.n1 = split.n1;
            rec.n2 = split.n2;
            rec.copra = copra_gammas(es, split, a, snaps, cfg.copra_options());
            rec.gamma_b = rec.copra.gamma_b();
            rec.gamma_z = rec.copra.gamma_z();
            rec.gamma_b_fallback = rec.copra.b.fallback_used;
            rec.gamma_z_fallback = rec.copra.z.fallback_used;
            return output_sinr(copra_weights(es, rec.gamma_b, rec.gamma_z, a), scenario, c_in);
        });
    }

    if (cfg.enabled(Method::QuasiRls)) {
        guarded(rec, Method::QuasiRls, [&] {
            rec.quasi_gamma_b = quasi_optimal_gamma(es, a, cfg.quasi_grid);
            if (cfg.gamma_z_policy == GammaZPolicy::Averaged) {
                rec.quasi_gamma_z =
                    quasi_optimal_gamma(es, averaged_snapshot_energy(es, snaps), cfg.quasi_grid);
            } else {
                std::vector<double> gammas;
                for (Eigen::Index t = 0; t < snaps.n_snapshots(); ++t)
                    gammas.push_back(quasi_optimal_gamma(es, ComplexVector(snaps.snapshots.col(t)),
                                                         cfg.quasi_grid));
                std::sort(gammas.begin(), gammas.end());
                rec.quasi_gamma_z = gammas[(gammas.size() - 1) / 2];
            }
            return output_sinr(
                copra_weights(es, rec.quasi_gamma_b, rec.quasi_gamma_z, a, Method::QuasiRls),
                scenario, c_in);
        });
    }
    return rec;
}

std::vector<TrialRecord> run_trials(const ExperimentConfig& cfg, std::uint64_t master_seed,
                                    int workers) {
    cfg.validate();
    const auto n = static_cast<std::size_t>(cfg.trials);
    std::vector<TrialRecord> records(n);

    unsigned n_workers = workers > 0 ? static_cast<unsigned>(workers)
                                     : std::max(1u, std::thread::hardware_concurrency());
    n_workers = static_cast<unsigned>(std::min<std::size_t>(n_workers, n));

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                records[i] = run_trial(cfg, i, master_seed);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
            }
        }
    };
    if (n_workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_workers);
        for (unsigned k = 0; k < n_workers; ++k)
            pool.emplace_back(work);
    }
    if (error)
        std::rethrow_exception(error);
    return records;
}

std::string_view sweep_kind_name(SweepKind k) {
    return k == SweepKind::Snr ? "snr" : "snapshots";
}

SweepSpec SweepSpec::from_config(const ExperimentConfig& cfg, SweepKind kind) {
    SweepSpec spec;
    spec.kind = kind;
    if (kind == SweepKind::Snr)
        spec.values = cfg.snr_db_grid;
    else
        spec.values.assign(cfg.snapshot_grid.begin(), cfg.snapshot_grid.end());
    return spec;
}

SweepPoint aggregate(double value, const std::vector<TrialRecord>& records,
                     const ExperimentConfig& cfg) {
    SweepPoint point;
    point.value = value;
    const double n_records = static_cast<double>(records.size());
    for (Method m : kAllMethods) {
        MethodStats& st = point.methods[method_index(m)];
        st.enabled = cfg.enabled(m);
        if (!st.enabled)
            continue;
        // Summation runs in trial order, so results do not depend on threading.
        double sum = 0, sum_sq = 0;
        int count = 0, fallbacks = 0;
        for (const TrialRecord& r : records) {
            if (r.method_fell_back(m))
                ++fallbacks;
            const auto& s = r.sinr[method_index(m)];
            if (!s)
                continue;
            const double v = cfg.sinr_aggregation == SinrAggregation::Linear ? *s : to_db(*s);
            sum += v;
            sum_sq += v * v;
            ++count;
        }
        st.count = count;
        st.fallback_rate = n_records > 0 ? fallbacks / n_records : 0.0;
        if (count == 0) {
            st.mean_sinr_db = std::nan("");
            st.stderr_db = std::nan("");
            continue;
        }
        const double mean = sum / count;
        const double var = count > 1 ? std::max(0.0, (sum_sq - count * mean * mean) / (count - 1)) : 0.0;
        const double se = std::sqrt(var / count);
        if (cfg.sinr_aggregation == SinrAggregation::Linear) {
            st.mean_sinr_db = to_db(mean);
            st.stderr_db = kDbPerNeper * se / mean;
        } else {
            st.mean_sinr_db = mean;
            st.stderr_db = se;
        }
    }
    int fb_b = 0, fb_z = 0;
    for (const TrialRecord& r : records) {
        fb_b += r.gamma_b_fallback;
        fb_z += r.gamma_z_fallback;
    }
    if (n_records > 0) {
        point.gamma_b_fallback_rate = fb_b / n_records;
        point.gamma_z_fallback_rate = fb_z / n_records;
    }
    return point;
}

SweepResult run_sweep(const ExperimentConfig& cfg, const SweepSpec& spec,
                      std::uint64_t master_seed) {
    cfg.validate();
    if (spec.values.empty())
        throw std::invalid_argument("run_sweep: sweep has no points");
    SweepResult result;
    result.kind = spec.kind;
    result.trials = cfg.trials;
    result.seed = master_seed;
    result.config = cfg;
    result.config.seed = master_seed;

    for (double value : spec.values) {
        ExperimentConfig point_cfg = cfg;
        if (spec.kind == SweepKind::Snr) {
            if (!std::isfinite(value))
                throw std::invalid_argument("run_sweep: SNR values must be finite");
            point_cfg.snr_db = value;
        } else {
            if (!(value >= 1.0) || value != std::floor(value))
                throw std::invalid_argument("run_sweep: snapshot counts must be positive integers");
            point_cfg.n_snapshots = static_cast<int>(value);
        }
        const auto records = run_trials(point_cfg, master_seed, cfg.workers);
        result.points.push_back(aggregate(value, records, cfg));
    }
    return result;
}

}  // namespace copra
