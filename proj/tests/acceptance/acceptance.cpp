// One line per acceptance criterion; exit status 1 if any fails.
#include "stokolmo/boundary.hpp"
#include "stokolmo/classifier.hpp"
#include "stokolmo/food_chain.hpp"
#include "stokolmo/lp.hpp"
#include "stokolmo/verify.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace stokolmo;

namespace {

KolmogorovModel bundled(const std::string& name) { return load_model(STOKOLMO_MODELS_DIR "/" + name + ".json"); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int k, const std::string& title, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream line;
    line.precision(4);
    line << (o.pass ? "[PASS]" : "[FAIL]") << " criterion " << k << ": " << title << " | " << o.detail << " | " << secs
         << " s (budget " << budget_s << " s)";
    if (secs > budget_s) line << " over budget";
    std::cout << line.str() << std::endl;
    if (!o.pass) ++failures;
}

std::string fmt(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.6g", v);
    return b;
}

// Closed-form rates of a two-species LV model with diagonal noise and g = 1.
struct TwoSpeciesOracle {
    double d1, d2;        // rates at the origin
    bool mu1, mu2;        // edge measures exist
    double l21, l12;      // lambda_2(mu1), lambda_1(mu2)

    explicit TwoSpeciesOracle(const KolmogorovModel& m) {
        const auto& lv = *m.lv();
        const auto& S = m.sigma();
        d1 = lv.a[0] - S(0, 0) / 2;
        d2 = lv.a[1] - S(1, 1) / 2;
        mu1 = d1 > 0;
        mu2 = d2 > 0;
        l21 = d2 + lv.B(1, 0) * (d1 / -lv.B(0, 0));
        l12 = d1 + lv.B(0, 1) * (d2 / -lv.B(1, 1));
    }

    std::string regime() const {
        if (d1 < 0 && d2 < 0) return "total-extinction";
        if (mu1 && mu2 && l21 > 0 && l12 > 0) return "persistent";
        if (mu1 && mu2 && l21 < 0 && l12 < 0) return "bistable";
        return "single-extinction";
    }
};

std::string regime_of(const Classification& c) {
    switch (c.verdict.kind) {
        case Verdict::Kind::Persistent: return "persistent";
        case Verdict::Kind::Extinction: {
            const auto& m1 = c.verdict.partition->m1;
            if (m1.size() == 2) return "bistable";
            if (c.table()->measures[m1[0]].support.empty()) return "total-extinction";
            return "single-extinction";
        }
        default: return to_string(c.verdict.kind);
    }
}

double grid_maximin(const Eigen::MatrixXd& lam, double h) {
    const int steps = static_cast<int>(std::lround(1.0 / h));
    const Eigen::Index rows = lam.rows();
    double best = -std::numeric_limits<double>::infinity();
    if (lam.cols() == 2) {
        for (int a = 0; a <= steps; ++a) {
            const double p = a * h;
            double v = std::numeric_limits<double>::infinity();
            for (Eigen::Index r = 0; r < rows; ++r) v = std::min(v, p * lam(r, 0) + (1 - p) * lam(r, 1));
            best = std::max(best, v);
        }
        return best;
    }
    for (int a = 0; a <= steps; ++a)
        for (int b = 0; a + b <= steps; ++b) {
            const double p1 = a * h, p2 = b * h, p3 = 1 - p1 - p2;
            double v = std::numeric_limits<double>::infinity();
            for (Eigen::Index r = 0; r < rows; ++r) v = std::min(v, p1 * lam(r, 0) + p2 * lam(r, 1) + p3 * lam(r, 2));
            best = std::max(best, v);
        }
    return best;
}

std::pair<int, std::string> run_cli(const std::string& env, const std::string& args) {
    FILE* pipe = popen((env + " '" STOKOLMO_CLI "' " + args).c_str(), "r");
    if (!pipe) throw std::runtime_error("popen failed");
    std::string out;
    std::array<char, 1 << 14> buf{};
    std::size_t got;
    while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

}  // namespace

int main() {
    const SimConfig budget;  // dt 1e-3, T 500, burn-in 50, 200 paths

    criterion(1, "logistic edge moment (2a-sigma)/(2b) = 1.5 within 2%", 60, [&] {
        const KolmogorovModel m = bundled("logistic");
        const double target = (2 * 2.0 - 1.0) / (2 * 1.0);
        const double quad = stationary_density_1d(m, 0).mean();
        const double x0[] = {1.0};
        const EnsembleResult ens = simulate_ensemble(m, x0, budget);
        const MeanSE mc = ens.occupation_mean(0);
        const bool ok = std::abs(quad - target) <= 0.02 * target && std::abs(mc.mean - target) <= 0.02 * target;
        return Outcome{ok, "quadrature " + fmt(quad) + ", Monte Carlo " + fmt(mc.mean) + " +- " + fmt(3 * mc.se)};
    });

    criterion(2, "invasion rates vanish on the support of every ergodic measure", 120, [&] {
        std::vector<std::pair<std::string, KolmogorovModel>> models;
        for (const auto& e : std::filesystem::directory_iterator(STOKOLMO_MODELS_DIR)) {
            const std::string name = e.path().stem().string();
            if (name.rfind("food_chain", 0) == 0)
                models.emplace_back(name, food_chain_model(load_food_chain(e.path().string())));
            else
                models.emplace_back(name, load_model(e.path().string()));
        }
        std::sort(models.begin(), models.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        int checked = 0;
        double worst = 0;
        std::string bad;
        for (const auto& [name, m] : models) {
            const BoundaryAnalysis b = find_boundary_measures(m);
            for (Eigen::Index r = 0; r < b.table.lambda.rows(); ++r)
                for (int i : b.measures[r].support.species()) {
                    ++checked;
                    const double excess = std::abs(b.table.lambda(r, i)) - std::max(1e-10, b.table.ci(r, i));
                    worst = std::max(worst, std::abs(b.table.lambda(r, i)));
                    if (excess > 0) bad += " " + name + ":" + b.measures[r].name();
                }
        }
        return Outcome{bad.empty() && checked > 0, std::to_string(models.size()) + " models, " + std::to_string(checked) +
                                                        " support entries, max |lambda| " + fmt(worst) +
                                                        (bad.empty() ? "" : ", violations" + bad)};
    });

    criterion(3, "four-regime reproduction and extinct exponent -6.5", 300, [&] {
        const std::array<std::pair<const char*, const char*>, 4> cases = {{{"lv_coexist", "persistent"},
                                                                           {"lv_extinction", "single-extinction"},
                                                                           {"lv_bistable", "bistable"},
                                                                           {"lv_total_extinction", "total-extinction"}}};
        bool ok = true;
        std::string detail;
        for (const auto& [name, expected] : cases) {
            const KolmogorovModel m = bundled(name);
            const TwoSpeciesOracle oracle(m);
            const Classification c = classify(m);
            const std::string got = regime_of(c);
            ok = ok && got == expected && oracle.regime() == expected;
            // the certificate margin must match an exhaustive search over weights
            if (c.verdict.kind == Verdict::Kind::Persistent) {
                const double grid = grid_maximin(c.table()->lambda, 1e-4);
                ok = ok && std::abs(2 * c.verdict.certificate->rho_star - grid) < 1e-3;
            }
            detail += std::string(name) + "=" + got + " ";
        }

        const KolmogorovModel ext = bundled("lv_extinction");
        const TwoSpeciesOracle oracle(ext);
        const double x0[] = {1.0, 1.0};
        const EnsembleResult ens = simulate_ensemble(ext, x0, budget);
        const MeanSE ly = ens.lyapunov(1);
        const bool exp_ok = std::abs(oracle.l21 - (-6.5)) < 1e-12 && std::abs(ly.mean - oracle.l21) <= 3 * ly.se &&
                            3 * ly.se <= 0.3;
        detail += "| lambda_2 " + fmt(ly.mean) + " +- " + fmt(3 * ly.se) + " (closed form " + fmt(oracle.l21) + ")";

        const KolmogorovModel co = bundled("lv_coexist");
        VerifyConfig vc;
        vc.sim = budget;
        const EnsembleReport rep = verify_verdict(co, classify(co), vc);
        const double tv_final = rep.tv_curve.empty() ? 1.0 : rep.tv_curve.back();
        detail += " | persistent TV final " + fmt(tv_final);
        return Outcome{ok && exp_ok && tv_final < 0.05 && rep.passed, detail};
    });

    criterion(4, "bistable basins sum to one from (1,1)", 300, [&] {
        const KolmogorovModel m = bundled("lv_bistable");
        const double x0[] = {1.0, 1.0};
        const BasinEstimate b = estimate_basin_probabilities(m, {Face::of({0}), Face::of({1})}, x0, budget);
        const std::size_t assigned = b.counts[0] + b.counts[1];
        const double unassigned = 1.0 - static_cast<double>(assigned) / static_cast<double>(b.total);
        const double p1 = static_cast<double>(b.counts[0]) / static_cast<double>(assigned);
        const double p2 = static_cast<double>(b.counts[1]) / static_cast<double>(assigned);
        const bool ok = unassigned <= 0.05 && std::abs(p1 + p2 - 1) < 1e-12 && p1 > 0.1 && p2 > 0.1;
        return Outcome{ok, "P(mu1) " + fmt(p1) + ", P(mu2) " + fmt(p2) + ", unassigned " + fmt(unassigned)};
    });

    criterion(5, "food chain depths and agreement with the general classifier", 120, [&] {
        bool ok = true;
        std::string detail;
        for (const auto& [name, depth] : {std::pair{"food_chain_persist", 3}, std::pair{"food_chain_apex_extinct", 2}}) {
            const FoodChainParams p = load_food_chain(STOKOLMO_MODELS_DIR "/" + std::string(name) + ".json");
            const FoodChainVerdict v = classify_food_chain(p);
            const Classification c = classify(food_chain_model(p));
            std::vector<int> general;
            if (c.verdict.kind == Verdict::Kind::Persistent)
                for (int i = 0; i < p.n(); ++i) general.push_back(i);
            else if (c.verdict.kind == Verdict::Kind::Extinction && c.verdict.partition->m1.size() == 1)
                general = c.table()->measures[c.verdict.partition->m1[0]].support.species();
            ok = ok && v.j_star == depth && general == v.survivors();
            detail += std::string(name) + " j*=" + std::to_string(v.j_star) + " ";
        }
        const FoodChainParams p = load_food_chain(STOKOLMO_MODELS_DIR "/food_chain_persist.json");
        double residual = 1;
        const std::vector<double> x2 = food_chain_equilibrium(p, 2, &residual);
        ok = ok && std::abs(x2[0] - 5.0 / 3) < 1e-12 && std::abs(x2[1] - 11.0 / 6) < 1e-12 && residual < 1e-10;
        detail += "| x(2) = (" + fmt(x2[0]) + ", " + fmt(x2[1]) + "), residual " + fmt(residual);
        return Outcome{ok, detail};
    });

    criterion(6, "cooperative blow-up", 120, [&] {
        const KolmogorovModel m = bundled("coop_blowup");
        const CheckResult t = check_tightness(m);
        const bool reason = t.status == CheckStatus::Fail && t.rationale.find("b_1b_2-c_1c_2<0") != std::string::npos;
        SimConfig cfg = budget;
        cfg.t_max = 100;
        cfg.burn_in = 10;
        const double x0[] = {1.0, 1.0};
        const BlowupSignature s = detect_blowup_signature(m, x0, cfg);
        const double frac = static_cast<double>(s.blowups) / static_cast<double>(s.paths);
        return Outcome{reason && frac >= 0.99 && s.detected,
                       "tightness " + to_string(t.status) + ", blown up " + fmt(frac) + ", slope " + fmt(s.slope.mean) +
                           " +- " + fmt(3 * s.slope.se)};
    });

    criterion(7, "maximin LP matches a 1e-4 grid on 25 random tables", 60, [&] {
        std::mt19937_64 rng(20240601);
        std::uniform_real_distribution<double> u(-2, 2);
        double worst = 0;
        for (int k = 0; k < 25; ++k) {
            const int n = 2 + k % 2;
            const int rows = 2 + k % 4;
            Eigen::MatrixXd lam(rows, n);
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < n; ++c) lam(r, c) = u(rng);
            worst = std::max(worst, std::abs(maximin_weights(lam).t_star - grid_maximin(lam, 1e-4)));
        }
        return Outcome{worst < 1e-3, "max |t_lp - t_grid| " + fmt(worst)};
    });

    criterion(8, "verify reports are byte-identical across thread counts", 600, [&] {
        const std::string args = "verify '" STOKOLMO_MODELS_DIR "/lv_bistable.json' --seed 77";
        const auto a = run_cli("STOKOLMO_THREADS=1", args);
        const auto b = run_cli("STOKOLMO_THREADS=3", args);
        const auto c = run_cli("STOKOLMO_THREADS=3", args);
        const bool ok = a.first == 0 && !a.second.empty() && a.second == b.second && b.second == c.second;
        return Outcome{ok, std::to_string(a.second.size()) + " bytes, exit " + std::to_string(a.first) +
                               (a.second == b.second ? ", identical" : ", differ")};
    });

    return failures == 0 ? 0 : 1;
}
