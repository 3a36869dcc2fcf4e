#include "stokolmo/engine.hpp"

#include "stokolmo/parallel.hpp"
#include "stokolmo/rng.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace stokolmo {

void SimConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw std::invalid_argument("t_max must be positive");
    if (!(burn_in >= 0.0) || !(burn_in < t_max)) throw std::invalid_argument("burn_in must lie in [0, t_max)");
    if (!std::isfinite(blowup_log_threshold) || !std::isfinite(extinct_log_threshold))
        throw std::invalid_argument("thresholds must be finite");
    if (n_paths < 1) throw std::invalid_argument("n_paths must be at least 1");
    if (steps() < 1) throw std::invalid_argument("t_max must cover at least one step");
}

std::size_t SimConfig::steps() const { return static_cast<std::size_t>(std::llround(t_max / dt)); }

std::size_t SimConfig::burn_in_steps() const { return static_cast<std::size_t>(std::llround(burn_in / dt)); }

nlohmann::json SimConfig::to_json() const {
    return {{"dt", dt},
            {"t_max", t_max},
            {"burn_in", burn_in},
            {"seed", seed},
            {"n_paths", n_paths},
            {"blowup_log_threshold", blowup_log_threshold},
            {"extinct_log_threshold", extinct_log_threshold}};
}

SimulationError::SimulationError(std::uint64_t path_id, double time, std::vector<double> state, const std::string& cause)
    : std::runtime_error([&] {
          std::ostringstream os;
          os << "path " << path_id << " failed at t = " << time << ", X = (";
          for (std::size_t i = 0; i < state.size(); ++i) os << (i ? ", " : "") << state[i];
          os << "): " << cause;
          return os.str();
      }()),
      path_id_(path_id),
      time_(time),
      state_(std::move(state)) {}

namespace {

// Integrates one path. observe(k, y, x) is called for the initial state (k = 0)
// and after every step; k is the index of the state on the time grid.
template <class Observer>
PathEvents integrate(const KolmogorovModel& model, std::span<const double> x0, const SimConfig& cfg,
                     std::uint64_t path_id, Observer&& observe) {
    const int n = model.n();
    if (static_cast<int>(x0.size()) != n) throw std::invalid_argument("initial state has the wrong dimension");
    for (double v : x0)
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("initial state must be strictly positive");

    const std::size_t steps = cfg.steps();
    const double dt = cfg.dt;
    const double sqdt = std::sqrt(dt);
    const Eigen::MatrixXd& L = model.noise_factor();
    std::vector<double> half_sigma(n);
    for (int i = 0; i < n; ++i) half_sigma[i] = 0.5 * model.sigma()(i, i);

    std::vector<double> y(n), x(n), f(n), g(n), z(n);
    for (int i = 0; i < n; ++i) {
        y[i] = std::log(x0[i]);
        x[i] = x0[i];
    }
    PathEvents ev;
    ev.extinction_time.assign(n, std::numeric_limits<double>::quiet_NaN());
    for (int i = 0; i < n; ++i)
        if (y[i] < cfg.extinct_log_threshold) ev.extinction_time[i] = 0.0;
    observe(std::size_t{0}, std::span<const double>(y), std::span<const double>(x));

    NormalStream normals(cfg.seed, path_id);
    for (std::size_t k = 0; k < steps; ++k) {
        try {
            model.evaluate(x, f, g);
        } catch (const DomainError& e) {
            throw SimulationError(path_id, static_cast<double>(k) * dt, x, e.what());
        }
        const std::uint64_t base = static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(n);
        for (int i = 0; i < n; ++i) z[i] = normals(base + static_cast<std::uint64_t>(i));
        const double t_next = static_cast<double>(k + 1) * dt;
        bool exploded = false;
        for (int i = 0; i < n; ++i) {
            double dE = 0.0;
            for (int j = 0; j <= i; ++j) dE += L(i, j) * z[j];
            y[i] += (f[i] - half_sigma[i] * g[i] * g[i]) * dt + g[i] * dE * sqdt;
            if (y[i] > cfg.blowup_log_threshold) exploded = true;
            if (y[i] < cfg.extinct_log_threshold && std::isnan(ev.extinction_time[i])) ev.extinction_time[i] = t_next;
        }
        for (int i = 0; i < n; ++i) x[i] = std::exp(y[i]);
        observe(k + 1, std::span<const double>(y), std::span<const double>(x));
        if (exploded) {
            ev.blowup = true;
            ev.blowup_time = t_next;
            break;
        }
    }
    return ev;
}

std::string format_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

Trajectory simulate_path(const KolmogorovModel& model, std::span<const double> x0, const SimConfig& cfg,
                         std::uint64_t path_id, int record_every) {
    cfg.validate();
    if (record_every < 1) throw std::invalid_argument("record_every must be positive");
    Trajectory traj;
    traj.n = model.n();
    traj.dt = cfg.dt;
    traj.burn_in = cfg.burn_in;
    const std::size_t steps = cfg.steps();
    std::vector<double> last_y;
    std::size_t last_k = 0;
    traj.events = integrate(model, x0, cfg, path_id, [&](std::size_t k, std::span<const double> y, std::span<const double>) {
        if (k % static_cast<std::size_t>(record_every) == 0) {
            traj.times.push_back(static_cast<double>(k) * cfg.dt);
            traj.log_states.emplace_back(y.begin(), y.end());
        }
        last_y.assign(y.begin(), y.end());
        last_k = k;
    });
    (void)steps;
    if (traj.times.empty() || traj.times.back() != static_cast<double>(last_k) * cfg.dt) {
        traj.times.push_back(static_cast<double>(last_k) * cfg.dt);
        traj.log_states.push_back(last_y);
    }
    return traj;
}

std::string Trajectory::to_csv() const {
    std::string out = "t";
    for (int i = 0; i < n; ++i) out += ",x" + std::to_string(i + 1);
    out += ",flags\n";
    std::vector<bool> reported(n, false);
    for (std::size_t k = 0; k < times.size(); ++k) {
        out += format_g(times[k]);
        for (int i = 0; i < n; ++i) out += "," + format_g(std::exp(log_states[k][i]));
        std::string flags;
        for (int i = 0; i < n; ++i) {
            const double te = events.extinction_time[i];
            if (!reported[i] && !std::isnan(te) && te <= times[k]) {
                flags += (flags.empty() ? "" : ";") + std::string("extinct") + std::to_string(i + 1);
                reported[i] = true;
            }
        }
        if (events.blowup && k + 1 == times.size()) flags += (flags.empty() ? "" : ";") + std::string("blowup");
        out += "," + flags + "\n";
    }
    return out;
}

LyapunovEstimate empirical_lyapunov(const Trajectory& traj, int species) {
    if (traj.times.size() < 2) throw std::invalid_argument("trajectory too short");
    std::size_t b = 0;
    while (b + 1 < traj.times.size() && traj.times[b] < traj.burn_in - 0.5 * traj.dt) ++b;
    const std::size_t e = traj.times.size() - 1;
    LyapunovEstimate est;
    est.blowup = traj.events.blowup;
    if (e == b) {
        // exploded before burn-in finished: measure from the start
        b = 0;
    }
    est.rate = (traj.log_states[e][species] - traj.log_states[b][species]) / (traj.times[e] - traj.times[b]);
    return est;
}

OccupationHistogram occupation_histogram(const Trajectory& traj, const HistogramGrid& grid) {
    OccupationHistogram h(traj.n, grid, traj.times.size() > 1 ? traj.times[1] - traj.times[0] : traj.dt);
    const std::size_t count = traj.log_states.size() > 1 ? traj.log_states.size() - 1 : traj.log_states.size();
    for (std::size_t k = 0; k < count; ++k) h.add(traj.log_states[k]);
    return h;
}

std::size_t EnsembleResult::blowup_count() const {
    std::size_t c = 0;
    for (const auto& p : paths) c += p.events.blowup ? 1 : 0;
    return c;
}

std::vector<double> EnsembleResult::lyapunov_samples(int species) const {
    std::vector<double> v;
    const double span = config.t_max - static_cast<double>(config.burn_in_steps()) * config.dt;
    for (const auto& p : paths) {
        if (p.events.blowup) continue;
        v.push_back((p.y_end[species] - p.y_burn[species]) / span);
    }
    return v;
}

MeanSE EnsembleResult::lyapunov(int species) const { return mean_se(lyapunov_samples(species)); }

MeanSE EnsembleResult::occupation_mean(int species) const {
    std::vector<double> v;
    for (const auto& p : paths)
        if (!p.events.blowup) v.push_back(p.mean_x[species]);
    return mean_se(v);
}

std::vector<double> EnsembleResult::pooled_batch_means(int k) const {
    std::vector<double> out(batches, 0.0);
    for (int b = 0; b < batches; ++b) {
        std::vector<double> v;
        for (const auto& p : paths)
            if (p.batch_counts[b] > 0) v.push_back(p.batch_means[static_cast<std::size_t>(b) * observable_dim + k]);
        out[b] = v.empty() ? std::numeric_limits<double>::quiet_NaN() : pairwise_sum(v) / static_cast<double>(v.size());
    }
    return out;
}

EnsembleResult simulate_ensemble(const KolmogorovModel& model, std::span<const double> x0, const SimConfig& cfg,
                                 const EnsembleOptions& options) {
    cfg.validate();
    const int n = model.n();
    const std::size_t steps = cfg.steps();
    const std::size_t burn = cfg.burn_in_steps();
    const std::size_t post = steps - burn;
    const HistogramGrid grid = options.grid.value_or(HistogramGrid::for_dimension(n));
    const int dim = options.observable ? options.observable_dim : 0;
    const int batches = dim > 0 ? options.batches : 0;
    if (dim > 0 && (batches < 1 || static_cast<std::size_t>(batches) > post))
        throw std::invalid_argument("batch count must be between 1 and the number of post burn-in steps");

    EnsembleResult result;
    result.n = n;
    result.config = cfg;
    result.batches = batches;
    result.observable_dim = dim;
    result.paths.resize(static_cast<std::size_t>(cfg.n_paths));

    const unsigned threads = resolve_threads(cfg.threads);
    std::vector<OccupationHistogram> pooled(threads);
    std::vector<std::vector<OccupationHistogram>> windowed(threads);
    for (unsigned w = 0; w < threads; ++w) {
        if (options.histogram) pooled[w] = OccupationHistogram(n, grid, cfg.dt);
        for (int k = 0; k < options.windows; ++k) windowed[w].emplace_back(n, grid, cfg.dt);
    }

    parallel_for(result.paths.size(), threads, [&](std::size_t id, unsigned worker) {
        PathSummary& s = result.paths[id];
        s.mean_x.assign(n, 0.0);
        s.batch_means.assign(static_cast<std::size_t>(batches) * dim, 0.0);
        s.batch_counts.assign(batches, 0);
        std::vector<double> obs(dim);
        std::vector<double> sum_x(n, 0.0);
        std::size_t counted = 0;
        std::size_t last_k = 0;
        s.events = integrate(model, x0, cfg, id, [&](std::size_t k, std::span<const double> y, std::span<const double> x) {
            last_k = k;
            if (k == 0) s.y_start.assign(y.begin(), y.end());
            if (k == burn) s.y_burn.assign(y.begin(), y.end());
            s.y_before_end = k == 0 ? std::vector<double>(y.begin(), y.end()) : s.y_end;
            s.y_end.assign(y.begin(), y.end());
            if (k >= steps) return;  // final state closes the last interval
            if (options.windows > 0) windowed[worker][k * options.windows / steps].add(y);
            if (k < burn) return;
            if (options.histogram) pooled[worker].add(y);
            for (int i = 0; i < n; ++i) sum_x[i] += x[i];
            ++counted;
            if (dim > 0) {
                options.observable(x, obs);
                const std::size_t b = (k - burn) * static_cast<std::size_t>(batches) / post;
                double* row = &s.batch_means[b * dim];
                for (int j = 0; j < dim; ++j) row[j] += obs[j];
                ++s.batch_counts[b];
            }
        });
        s.t_end = static_cast<double>(last_k) * cfg.dt;
        if (s.y_burn.empty()) s.y_burn = s.y_start;
        for (int i = 0; i < n; ++i) s.mean_x[i] = counted ? sum_x[i] / static_cast<double>(counted) : 0.0;
        for (int b = 0; b < batches; ++b)
            if (s.batch_counts[b] > 0)
                for (int j = 0; j < dim; ++j) s.batch_means[static_cast<std::size_t>(b) * dim + j] /= s.batch_counts[b];
    });

    if (options.histogram) {
        result.occupation = OccupationHistogram(n, grid, cfg.dt);
        for (const auto& h : pooled) result.occupation->merge(h);
    }
    for (int k = 0; k < options.windows; ++k) {
        OccupationHistogram h(n, grid, cfg.dt);
        for (unsigned w = 0; w < threads; ++w) h.merge(windowed[w][k]);
        result.windows.push_back(std::move(h));
    }
    return result;
}

}  // namespace stokolmo
