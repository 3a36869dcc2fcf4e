#include "stokolmo/food_chain.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace stokolmo {

namespace {

std::vector<double> read_vector(const nlohmann::json& doc, const char* key) {
    if (!doc.contains(key)) throw ModelError(std::string("$.") + key, "missing");
    const auto& v = doc.at(key);
    if (!v.is_array()) throw ModelError(std::string("$.") + key, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number())
            throw ModelError(std::string("$.") + key + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back(v[i].get<double>());
    }
    return out;
}

double stochastic_rate(const FoodChainParams& p, int j) {
    return j == 0 ? p.a0[0] - 0.5 * p.sigma[0] : p.a0[j] + 0.5 * p.sigma[j];
}

}  // namespace

void FoodChainParams::validate() const {
    const std::size_t k = a0.size();
    if (k < 2 || k > 16) throw ModelError("$.a0", "chain length must be between 2 and 16");
    if (self.size() != k) throw ModelError("$.self", "expected " + std::to_string(k) + " entries");
    if (up.size() != k - 1) throw ModelError("$.up", "expected " + std::to_string(k - 1) + " entries");
    if (down.size() != k - 1) throw ModelError("$.down", "expected " + std::to_string(k - 1) + " entries");
    if (sigma.size() != k) throw ModelError("$.sigma_diag", "expected " + std::to_string(k) + " entries");
    if (!(self[0] > 0)) throw ModelError("$.self[0]", "prey self-limitation must be positive");
    auto nonneg = [](const std::vector<double>& v, const char* key) {
        for (std::size_t i = 0; i < v.size(); ++i)
            if (!(v[i] >= 0) || !std::isfinite(v[i]))
                throw ModelError(std::string("$.") + key + "[" + std::to_string(i) + "]", "must be finite and nonnegative");
    };
    nonneg(a0, "a0");
    nonneg(self, "self");
    nonneg(up, "up");
    nonneg(down, "down");
    for (std::size_t i = 0; i < k; ++i)
        if (!(sigma[i] > 0) || !std::isfinite(sigma[i]))
            throw ModelError("$.sigma_diag[" + std::to_string(i) + "]", "must be positive");
}

nlohmann::json FoodChainParams::to_json() const {
    return {{"a0", a0}, {"self", self}, {"up", up}, {"down", down}, {"sigma_diag", sigma}};
}

FoodChainParams parse_food_chain(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ModelError("$", "expected an object");
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        static const char* allowed[] = {"a0", "self", "up", "down", "sigma_diag", "name", "description", "x0"};
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) throw ModelError("$." + it.key(), "unknown key");
    }
    FoodChainParams p;
    p.a0 = read_vector(doc, "a0");
    p.self = read_vector(doc, "self");
    p.up = read_vector(doc, "up");
    p.down = read_vector(doc, "down");
    p.sigma = doc.contains("sigma_diag") ? read_vector(doc, "sigma_diag") : std::vector<double>(p.a0.size(), 1.0);
    p.validate();
    return p;
}

FoodChainParams load_food_chain(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError(path, "cannot open food chain file");
    std::ostringstream buf;
    buf << in.rdbuf();
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw ModelError("$", std::string("invalid JSON: ") + e.what());
    }
    return parse_food_chain(doc);
}

KolmogorovModel food_chain_model(const FoodChainParams& p) {
    p.validate();
    const int n = p.n();
    LotkaVolterra lv;
    lv.a.resize(n);
    lv.B = Eigen::MatrixXd::Zero(n, n);
    lv.g = Eigen::VectorXd::Ones(n);
    for (int j = 0; j < n; ++j) {
        lv.a[j] = j == 0 ? p.a0[0] : -p.a0[j];
        lv.B(j, j) = -p.self[j];
        if (j > 0) lv.B(j, j - 1) = p.up[j - 1];
        if (j + 1 < n) lv.B(j, j + 1) = -p.down[j];
    }
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) sigma(j, j) = p.sigma[j];
    return KolmogorovModel::lotka_volterra(std::move(lv), std::move(sigma));
}

std::vector<double> food_chain_equilibrium(const FoodChainParams& p, int depth, double* residual) {
    if (depth < 1 || depth > p.n()) throw std::invalid_argument("depth out of range");
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(depth, depth);
    Eigen::VectorXd rhs(depth);
    A(0, 0) = -p.self[0];
    if (depth > 1) A(0, 1) = -p.down[0];
    rhs[0] = -stochastic_rate(p, 0);
    for (int r = 1; r < depth; ++r) {
        A(r, r - 1) = p.up[r - 1];
        A(r, r) = -p.self[r];
        if (r + 1 < depth) A(r, r + 1) = -p.down[r];
        rhs[r] = stochastic_rate(p, r);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) throw std::domain_error("singular equilibrium system at depth " + std::to_string(depth));
    const Eigen::VectorXd x = lu.solve(rhs);
    if (residual) *residual = (A * x - rhs).lpNorm<Eigen::Infinity>();
    return {x.data(), x.data() + depth};
}

std::vector<int> FoodChainVerdict::survivors() const {
    std::vector<int> s;
    for (int j = 0; j < j_star; ++j) s.push_back(j);
    return s;
}

nlohmann::json FoodChainVerdict::to_json() const {
    nlohmann::json rates = nlohmann::json::array();
    for (const auto& r : extinct_rates) rates.push_back({{"species", r.species + 1}, {"lambda", r.lambda}});
    std::vector<int> surv;
    for (int s : survivors()) surv.push_back(s + 1);
    return {{"kind", to_string(kind)}, {"j_star", j_star},   {"a_tilde", a_tilde},     {"invasion_rates", invasion},
            {"equilibria", x},       {"residuals", residuals}, {"extinct_rates", rates}, {"survivors", surv},
            {"reasons", reasons}};
}

FoodChainVerdict classify_food_chain(const FoodChainParams& p, double tol) {
    p.validate();
    const int n = p.n();
    FoodChainVerdict v;
    for (int j = 0; j < n; ++j) v.a_tilde.push_back(stochastic_rate(p, j));
    v.invasion.push_back(v.a_tilde[0]);

    int depth = 0;  // deepest level with every invasion rate positive
    while (depth < n) {
        const double rate = v.invasion.back();
        if (std::abs(rate) <= tol) {
            v.kind = Verdict::Kind::Inconclusive;
            v.reasons.push_back("invasion rate of level " + std::to_string(depth + 1) + " is zero");
            v.j_star = depth;
            return v;
        }
        if (rate < 0) break;
        ++depth;
        double res = 0.0;
        std::vector<double> x;
        try {
            x = food_chain_equilibrium(p, depth, &res);
        } catch (const std::domain_error& e) {
            v.kind = Verdict::Kind::Inconclusive;
            v.reasons.push_back(e.what());
            v.j_star = depth - 1;
            return v;
        }
        v.x.push_back(x);
        v.residuals.push_back(res);
        for (double xi : x)
            if (!(xi > 0)) {
                v.kind = Verdict::Kind::Inconclusive;
                v.reasons.push_back("equilibrium at depth " + std::to_string(depth) + " is not positive");
                v.j_star = depth - 1;
                return v;
            }
        if (depth < n) v.invasion.push_back(-v.a_tilde[depth] + p.up[depth - 1] * x[depth - 1]);
    }
    v.j_star = depth;
    if (depth == n) {
        v.kind = Verdict::Kind::Persistent;
        v.reasons.push_back("every predator level can invade the chain below it");
        return v;
    }
    v.kind = Verdict::Kind::Extinction;
    for (int k = depth; k < n; ++k) {
        // rate of level k+1 against the depth-j* stationary distribution
        double lam;
        if (k == 0)
            lam = v.a_tilde[0];
        else if (k == depth)
            lam = v.invasion.back();
        else
            lam = -v.a_tilde[k];
        v.extinct_rates.push_back({k, lam, 0.0});
    }
    v.reasons.push_back("levels " + std::to_string(depth + 1) + ".." + std::to_string(n) + " cannot invade");
    return v;
}

}  // namespace stokolmo
