#include "stokolmo/model.hpp"

#include <bit>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace stokolmo {

ModelError::ModelError(std::string path, const std::string& message)
    : std::runtime_error(path + ": " + message), path_(std::move(path)) {}

FactorizationError::FactorizationError(int minor, const std::string& message)
    : std::runtime_error(message), minor_(minor) {}

Face Face::of(std::initializer_list<int> species) {
    return of(std::span<const int>(species.begin(), species.size()));
}

Face Face::of(std::span<const int> species) {
    std::uint32_t mask = 0;
    for (int i : species) mask |= 1u << i;
    return Face(mask);
}

int Face::size() const noexcept { return std::popcount(mask_); }

std::vector<int> Face::species() const {
    std::vector<int> out;
    for (int i = 0; i < 32; ++i)
        if (contains(i)) out.push_back(i);
    return out;
}

std::string Face::label() const {
    std::string s = "{";
    bool first = true;
    for (int i : species()) {
        if (!first) s += ",";
        s += std::to_string(i + 1);
        first = false;
    }
    return s + "}";
}

Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& sigma) {
    const Eigen::Index n = sigma.rows();
    if (sigma.cols() != n) throw FactorizationError(0, "covariance matrix is not square");
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = sigma(j, j);
        for (Eigen::Index k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
        if (!(d > 1e-14 * scale)) {
            throw FactorizationError(static_cast<int>(j + 1),
                                     "covariance is not positive definite: leading minor of order " +
                                         std::to_string(j + 1) + " is not positive");
        }
        L(j, j) = std::sqrt(d);
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double s = sigma(i, j);
            for (Eigen::Index k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
            L(i, j) = s / L(j, j);
        }
    }
    return L;
}

namespace {

std::vector<Expression> lv_drift_expressions(const LotkaVolterra& lv) {
    std::vector<Expression> out;
    const auto n = lv.a.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        auto acc = Expression::constant(lv.a(i)).root();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (lv.B(i, j) == 0.0) continue;
            auto term = std::make_shared<ExprNode>();
            term->kind = ExprNode::Kind::Binary;
            term->binary = BinaryOp::Mul;
            term->lhs = Expression::constant(lv.B(i, j)).root();
            term->rhs = Expression::variable(static_cast<int>(j)).root();
            auto sum = std::make_shared<ExprNode>();
            sum->kind = ExprNode::Kind::Binary;
            sum->binary = BinaryOp::Add;
            sum->lhs = acc;
            sum->rhs = term;
            acc = sum;
        }
        out.emplace_back(acc);
    }
    return out;
}

void validate_sigma(const Eigen::MatrixXd& sigma, int n) {
    if (sigma.rows() != n || sigma.cols() != n)
        throw ModelError("$.sigma", "expected a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
    for (int i = 0; i < n; ++i) {
        if (!(sigma(i, i) > 0.0))
            throw ModelError("$.sigma[" + std::to_string(i) + "][" + std::to_string(i) + "]",
                             "diagonal entries must be positive");
        for (int j = 0; j < i; ++j) {
            const double tol = 1e-12 * std::max(1.0, std::max(std::abs(sigma(i, j)), std::abs(sigma(j, i))));
            if (std::abs(sigma(i, j) - sigma(j, i)) > tol)
                throw ModelError("$.sigma[" + std::to_string(i) + "][" + std::to_string(j) + "]",
                                 "sigma must be symmetric");
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
    const double min_eig = eig.eigenvalues().minCoeff();
    if (min_eig < -1e-12 * std::max(1.0, eig.eigenvalues().maxCoeff())) {
        std::ostringstream os;
        os << "sigma is not positive semidefinite (eigenvalue " << min_eig << ")";
        throw ModelError("$.sigma", os.str());
    }
    try {
        (void)cholesky_factor(sigma);
    } catch (const FactorizationError& e) {
        throw ModelError("$.sigma", std::string("sigma is singular; degenerate noise is not supported (") + e.what() + ")");
    }
}

}  // namespace

void KolmogorovModel::finish(Eigen::MatrixXd sigma) {
    validate_sigma(sigma, n_);
    sigma_ = std::move(sigma);
    factor_ = cholesky_factor(sigma_);
    if (species_map_.empty()) {
        species_map_.resize(n_);
        for (int i = 0; i < n_; ++i) species_map_[i] = i;
    }
}

KolmogorovModel KolmogorovModel::lotka_volterra(LotkaVolterra lv, Eigen::MatrixXd sigma) {
    KolmogorovModel m;
    m.n_ = static_cast<int>(lv.a.size());
    if (m.n_ < 1) throw ModelError("$.lv.a", "at least one species is required");
    if (lv.B.rows() != m.n_ || lv.B.cols() != m.n_) throw ModelError("$.lv.B", "expected an n x n matrix");
    if (lv.g.size() != m.n_) throw ModelError("$.lv.g", "expected n entries");
    m.f_ = lv_drift_expressions(lv);
    for (int i = 0; i < m.n_; ++i) m.g_.push_back(Expression::constant(lv.g(i)));
    m.lv_ = std::move(lv);
    m.finish(std::move(sigma));
    return m;
}

KolmogorovModel KolmogorovModel::general(std::vector<Expression> f, std::vector<Expression> g, Eigen::MatrixXd sigma) {
    KolmogorovModel m;
    m.n_ = static_cast<int>(f.size());
    if (m.n_ < 1) throw ModelError("$.general.f", "at least one species is required");
    if (static_cast<int>(g.size()) != m.n_) throw ModelError("$.general.g", "expected n expressions");
    for (int i = 0; i < m.n_; ++i) {
        if (f[i].arity() > m.n_)
            throw ModelError("$.general.f[" + std::to_string(i) + "]", "references a variable beyond x" + std::to_string(m.n_));
        if (g[i].arity() > m.n_)
            throw ModelError("$.general.g[" + std::to_string(i) + "]", "references a variable beyond x" + std::to_string(m.n_));
    }
    m.f_ = std::move(f);
    m.g_ = std::move(g);
    m.finish(std::move(sigma));
    return m;
}

double KolmogorovModel::drift(int i, std::span<const double> x) const {
    if (lv_) {
        double s = lv_->a(i);
        for (int j = 0; j < n_; ++j) s += lv_->B(i, j) * x[j];
        return s;
    }
    return f_[i].evaluate(x);
}

double KolmogorovModel::noise(int i, std::span<const double> x) const {
    if (lv_) return lv_->g(i);
    return g_[i].evaluate(x);
}

void KolmogorovModel::evaluate(std::span<const double> x, std::span<double> f, std::span<double> g) const {
    if (lv_) {
        for (int i = 0; i < n_; ++i) {
            double s = lv_->a(i);
            for (int j = 0; j < n_; ++j) s += lv_->B(i, j) * x[j];
            f[i] = s;
            g[i] = lv_->g(i);
        }
        return;
    }
    for (int i = 0; i < n_; ++i) {
        f[i] = f_[i].evaluate(x);
        g[i] = g_[i].evaluate(x);
    }
}

double KolmogorovModel::log_growth(int i, std::span<const double> x) const {
    const double g = noise(i, x);
    return drift(i, x) - 0.5 * sigma_(i, i) * g * g;
}

nlohmann::json KolmogorovModel::to_json() const {
    using nlohmann::json;
    auto matrix = [](const Eigen::MatrixXd& m) {
        json rows = json::array();
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            json row = json::array();
            for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
            rows.push_back(row);
        }
        return rows;
    };
    auto vector = [](const Eigen::VectorXd& v) {
        json out = json::array();
        for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
        return out;
    };
    json doc;
    doc["n"] = n_;
    if (lv_) {
        doc["lv"] = {{"a", vector(lv_->a)}, {"B", matrix(lv_->B)}, {"g", vector(lv_->g)}};
    } else {
        json f = json::array(), g = json::array();
        for (const auto& e : f_) f.push_back(e.to_string());
        for (const auto& e : g_) g.push_back(e.to_string());
        doc["general"] = {{"f", f}, {"g", g}};
    }
    doc["sigma"] = matrix(sigma_);
    return doc;
}

namespace {

double number_at(const nlohmann::json& v, const std::string& path) {
    if (!v.is_number()) throw ModelError(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ModelError(path, "expected a finite number");
    return d;
}

Eigen::VectorXd vector_at(const nlohmann::json& doc, const char* key, int n, const std::string& parent) {
    const std::string path = parent + "." + key;
    if (!doc.contains(key)) throw ModelError(path, "missing field");
    const auto& v = doc.at(key);
    if (!v.is_array() || static_cast<int>(v.size()) != n)
        throw ModelError(path, "expected an array of " + std::to_string(n) + " numbers");
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) out(i) = number_at(v[i], path + "[" + std::to_string(i) + "]");
    return out;
}

Eigen::MatrixXd matrix_at(const nlohmann::json& doc, const char* key, int n, const std::string& parent) {
    const std::string path = parent + "." + key;
    if (!doc.contains(key)) throw ModelError(path, "missing field");
    const auto& m = doc.at(key);
    if (!m.is_array() || static_cast<int>(m.size()) != n)
        throw ModelError(path, "expected " + std::to_string(n) + " rows");
    Eigen::MatrixXd out(n, n);
    for (int i = 0; i < n; ++i) {
        const std::string row_path = path + "[" + std::to_string(i) + "]";
        if (!m[i].is_array() || static_cast<int>(m[i].size()) != n)
            throw ModelError(row_path, "expected " + std::to_string(n) + " columns");
        for (int j = 0; j < n; ++j) out(i, j) = number_at(m[i][j], row_path + "[" + std::to_string(j) + "]");
    }
    return out;
}

std::vector<Expression> expressions_at(const nlohmann::json& doc, const char* key, int n) {
    const std::string path = std::string("$.general.") + key;
    if (!doc.contains(key)) throw ModelError(path, "missing field");
    const auto& v = doc.at(key);
    if (!v.is_array() || static_cast<int>(v.size()) != n)
        throw ModelError(path, "expected an array of " + std::to_string(n) + " expressions");
    std::vector<Expression> out;
    for (int i = 0; i < n; ++i) {
        const std::string item = path + "[" + std::to_string(i) + "]";
        if (v[i].is_number()) {
            out.push_back(Expression::constant(number_at(v[i], item)));
            continue;
        }
        if (!v[i].is_string()) throw ModelError(item, "expected an expression string");
        try {
            out.push_back(Expression::parse(v[i].get<std::string>()));
        } catch (const ExpressionSyntaxError& e) {
            throw ModelError(item, e.what());
        }
        if (out.back().arity() > n)
            throw ModelError(item, "references a variable beyond x" + std::to_string(n));
    }
    return out;
}

}  // namespace

KolmogorovModel parse_model(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ModelError("$", "expected a JSON object");
    static const std::vector<std::string> allowed{"n", "lv", "general", "sigma", "name", "x0", "description"};
    for (const auto& [key, _] : doc.items())
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ModelError("$." + key, "unknown field");
    if (!doc.contains("n")) throw ModelError("$.n", "missing field");
    if (!doc.at("n").is_number_integer()) throw ModelError("$.n", "expected an integer");
    const int n = doc.at("n").get<int>();
    if (n < 1 || n > 16) throw ModelError("$.n", "species count must be between 1 and 16");
    const bool has_lv = doc.contains("lv");
    const bool has_general = doc.contains("general");
    if (has_lv == has_general) throw ModelError("$", "exactly one of \"lv\" and \"general\" is required");
    Eigen::MatrixXd sigma = matrix_at(doc, "sigma", n, "$");
    if (doc.contains("x0")) {
        const auto& x0 = doc.at("x0");
        if (!x0.is_array() || static_cast<int>(x0.size()) != n)
            throw ModelError("$.x0", "expected an array of " + std::to_string(n) + " numbers");
        for (int i = 0; i < n; ++i)
            if (!(number_at(x0[i], "$.x0[" + std::to_string(i) + "]") > 0.0))
                throw ModelError("$.x0[" + std::to_string(i) + "]", "initial state must be positive");
    }
    if (has_lv) {
        const auto& block = doc.at("lv");
        if (!block.is_object()) throw ModelError("$.lv", "expected an object");
        for (const auto& [key, _] : block.items())
            if (key != "a" && key != "B" && key != "g") throw ModelError("$.lv." + key, "unknown field");
        LotkaVolterra lv{vector_at(block, "a", n, "$.lv"), matrix_at(block, "B", n, "$.lv"),
                         vector_at(block, "g", n, "$.lv")};
        return KolmogorovModel::lotka_volterra(std::move(lv), std::move(sigma));
    }
    const auto& block = doc.at("general");
    if (!block.is_object()) throw ModelError("$.general", "expected an object");
    for (const auto& [key, _] : block.items())
        if (key != "f" && key != "g") throw ModelError("$.general." + key, "unknown field");
    return KolmogorovModel::general(expressions_at(block, "f", n), expressions_at(block, "g", n), std::move(sigma));
}

KolmogorovModel parse_model(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ModelError("$", std::string("invalid JSON: ") + e.what());
    }
    return parse_model(doc);
}

KolmogorovModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError(path, "cannot open model file");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    return parse_model(std::string_view(text));
}

KolmogorovModel restrict_to_face(const KolmogorovModel& model, Face face) {
    const std::vector<int> kept = face.species();
    const int k = static_cast<int>(kept.size());
    if (k == 0) throw std::invalid_argument("restrict_to_face: face must be nonempty");
    for (int i : kept)
        if (i >= model.n()) throw std::invalid_argument("restrict_to_face: species index out of range");

    Eigen::MatrixXd sigma(k, k);
    for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) sigma(r, c) = model.sigma()(kept[r], kept[c]);

    KolmogorovModel out;
    out.n_ = k;
    out.species_map_.resize(k);
    for (int r = 0; r < k; ++r) out.species_map_[r] = model.species_map()[kept[r]];

    if (model.lv()) {
        const auto& src = *model.lv();
        LotkaVolterra lv{Eigen::VectorXd(k), Eigen::MatrixXd(k, k), Eigen::VectorXd(k)};
        for (int r = 0; r < k; ++r) {
            lv.a(r) = src.a(kept[r]);
            lv.g(r) = src.g(kept[r]);
            for (int c = 0; c < k; ++c) lv.B(r, c) = src.B(kept[r], kept[c]);
        }
        out.f_ = lv_drift_expressions(lv);
        for (int r = 0; r < k; ++r) out.g_.push_back(Expression::constant(lv.g(r)));
        out.lv_ = std::move(lv);
    } else {
        std::vector<int> remap(model.n(), -1);
        for (int r = 0; r < k; ++r) remap[kept[r]] = r;
        for (int r = 0; r < k; ++r) {
            out.f_.push_back(model.drift_expressions()[kept[r]].remap_variables(remap));
            out.g_.push_back(model.noise_expressions()[kept[r]].remap_variables(remap));
        }
    }
    out.finish(std::move(sigma));
    return out;
}

std::vector<double> embed(Face face, int n, std::span<const double> face_state) {
    std::vector<double> x(n, 0.0);
    std::size_t k = 0;
    for (int i = 0; i < n; ++i)
        if (face.contains(i)) x[i] = face_state[k++];
    return x;
}

}  // namespace stokolmo
