#pragma once

#include "stokolmo/expression.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stokolmo {

/// Invalid model input. path() is a JSON-pointer-like location ("$.lv.B[1]").
class ModelError : public std::runtime_error {
public:
    ModelError(std::string path, const std::string& message);
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// Raised by cholesky_factor; minor() is the 1-based order of the leading
/// principal minor that is not positive.
class FactorizationError : public std::runtime_error {
public:
    FactorizationError(int minor, const std::string& message);
    int minor() const noexcept { return minor_; }

private:
    int minor_;
};

/// A subset of species, stored as a bit mask (bit i = species i, zero-based).
class Face {
public:
    constexpr Face() = default;
    constexpr explicit Face(std::uint32_t mask) : mask_(mask) {}

    static Face full(int n) { return Face(n >= 32 ? ~0u : ((1u << n) - 1u)); }
    static Face of(std::initializer_list<int> species);
    static Face of(std::span<const int> species);

    constexpr std::uint32_t mask() const noexcept { return mask_; }
    constexpr bool contains(int i) const noexcept { return (mask_ >> i) & 1u; }
    constexpr bool empty() const noexcept { return mask_ == 0; }
    int size() const noexcept;
    /// Proper subset.
    constexpr bool strictly_inside(Face other) const noexcept {
        return (mask_ & other.mask_) == mask_ && mask_ != other.mask_;
    }
    constexpr bool subset_of(Face other) const noexcept { return (mask_ & other.mask_) == mask_; }
    std::vector<int> species() const;
    /// "{1,2}" with one-based indices; "{}" for the origin.
    std::string label() const;

    constexpr Face operator&(Face o) const noexcept { return Face(mask_ & o.mask_); }
    constexpr bool operator==(const Face&) const = default;

private:
    std::uint32_t mask_ = 0;
};

/// Structured Lotka-Volterra drift with constant noise amplitudes:
/// f_i(x) = a_i + sum_j B_ij x_j, g_i(x) = g_i.
struct LotkaVolterra {
    Eigen::VectorXd a;
    Eigen::MatrixXd B;
    Eigen::VectorXd g;
};

/// dX_i = X_i f_i(X) dt + X_i g_i(X) dE_i with E = Gamma^T B(t), Gamma^T Gamma = Sigma.
///
/// Immutable after construction. Either `lv()` is set, or the drift and noise
/// amplitudes are general expressions; `drift_expressions()` is always
/// available (derived from the structured form when present).
class KolmogorovModel {
public:
    static KolmogorovModel lotka_volterra(LotkaVolterra lv, Eigen::MatrixXd sigma);
    static KolmogorovModel general(std::vector<Expression> f, std::vector<Expression> g, Eigen::MatrixXd sigma);

    int n() const noexcept { return n_; }
    const std::optional<LotkaVolterra>& lv() const noexcept { return lv_; }
    bool is_lv() const noexcept { return lv_.has_value(); }
    const std::vector<Expression>& drift_expressions() const noexcept { return f_; }
    const std::vector<Expression>& noise_expressions() const noexcept { return g_; }
    const Eigen::MatrixXd& sigma() const noexcept { return sigma_; }
    /// Lower-triangular factor L = Gamma^T with L L^T = Sigma.
    const Eigen::MatrixXd& noise_factor() const noexcept { return factor_; }
    /// Species of the original model that this (possibly restricted) model describes.
    const std::vector<int>& species_map() const noexcept { return species_map_; }

    double drift(int i, std::span<const double> x) const;
    double noise(int i, std::span<const double> x) const;
    /// Evaluate all f_i and g_i at x.
    void evaluate(std::span<const double> x, std::span<double> f, std::span<double> g) const;

    /// Per-capita growth rate used by invasion rates: f_i - sigma_ii g_i^2 / 2.
    double log_growth(int i, std::span<const double> x) const;

    nlohmann::json to_json() const;

private:
    KolmogorovModel() = default;
    void finish(Eigen::MatrixXd sigma);

    int n_ = 0;
    std::optional<LotkaVolterra> lv_;
    std::vector<Expression> f_;
    std::vector<Expression> g_;
    Eigen::MatrixXd sigma_;
    Eigen::MatrixXd factor_;
    std::vector<int> species_map_;

    friend KolmogorovModel restrict_to_face(const KolmogorovModel&, Face);
};

KolmogorovModel parse_model(std::string_view text);
KolmogorovModel parse_model(const nlohmann::json& doc);
KolmogorovModel load_model(const std::string& path);

/// Lower-triangular L with L L^T = sigma (so Gamma = L^T). Throws
/// FactorizationError naming the first non-positive leading minor.
Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& sigma);

/// Subsystem obtained by pinning x_j = 0 for every j outside `face`.
KolmogorovModel restrict_to_face(const KolmogorovModel& model, Face face);

/// Embed a state of the face subsystem into the full state space (zeros elsewhere).
std::vector<double> embed(Face face, int n, std::span<const double> face_state);

}  // namespace stokolmo
