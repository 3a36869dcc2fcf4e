#include "stokolmo/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stokolmo {

namespace {
constexpr double kPivotTol = 1e-12;
}

SimplexResult simplex_maximize(const Eigen::VectorXd& c, const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                               int max_pivots) {
    const int m = static_cast<int>(A.rows());
    const int nv = static_cast<int>(A.cols());
    if (c.size() != nv || b.size() != m) throw std::invalid_argument("simplex: dimension mismatch");
    if ((b.array() < 0).any()) throw std::invalid_argument("simplex: right-hand side must be nonnegative");

    // Tableau columns: structural, slack, rhs. Last row holds -c (reduced costs).
    const int cols = nv + m + 1;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m + 1, cols);
    T.topLeftCorner(m, nv) = A;
    T.block(0, nv, m, m).setIdentity();
    T.col(cols - 1).head(m) = b;
    T.row(m).head(nv) = -c.transpose();
    std::vector<int> basis(m);
    for (int r = 0; r < m; ++r) basis[r] = nv + r;

    SimplexResult res;
    for (;;) {
        int enter = -1;
        for (int j = 0; j < nv + m; ++j)
            if (T(m, j) < -kPivotTol) {
                enter = j;
                break;
            }
        if (enter < 0) break;
        int leave = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int r = 0; r < m; ++r) {
            const double a = T(r, enter);
            if (a <= kPivotTol) continue;
            const double ratio = T(r, cols - 1) / a;
            if (ratio < best - 1e-14 || (std::abs(ratio - best) <= 1e-14 && basis[r] < basis[leave])) {
                best = ratio;
                leave = r;
            }
        }
        if (leave < 0) {
            res.status = SimplexResult::Status::Unbounded;
            return res;
        }
        if (++res.pivots > max_pivots) {
            res.status = SimplexResult::Status::IterationLimit;
            return res;
        }
        T.row(leave) /= T(leave, enter);
        for (int r = 0; r <= m; ++r)
            if (r != leave && T(r, enter) != 0.0) T.row(r) -= T(r, enter) * T.row(leave);
        basis[leave] = enter;
    }
    res.x = Eigen::VectorXd::Zero(nv);
    for (int r = 0; r < m; ++r)
        if (basis[r] < nv) res.x[basis[r]] = std::max(0.0, T(r, cols - 1));
    res.value = c.dot(res.x);
    return res;
}

MaximinResult maximin_weights(const Eigen::MatrixXd& lambda, double eps) {
    const int rows = static_cast<int>(lambda.rows());
    const int n = static_cast<int>(lambda.cols());
    if (rows == 0 || n == 0) throw std::invalid_argument("maximin_weights: empty table");
    if (!(n * eps < 1.0)) throw std::invalid_argument("maximin_weights: eps too large for the number of species");

    MaximinResult out;
    out.p.assign(n, 1.0);
    if (n > 1) {
        // p_i = eps + q_i, q_n eliminated through sum p = 1, t = L + t'.
        // Every right-hand side is >= 1, so the origin is feasible.
        const double L = std::min(0.0, lambda.minCoeff()) - 1.0;
        const double free_mass = 1.0 - n * eps;
        const int nv = n;  // q_1..q_{n-1}, t'
        Eigen::MatrixXd A(rows + 1, nv);
        Eigen::VectorXd b(rows + 1);
        for (int r = 0; r < rows; ++r) {
            for (int i = 0; i < n - 1; ++i) A(r, i) = -(lambda(r, i) - lambda(r, n - 1));
            A(r, n - 1) = 1.0;
            b[r] = eps * lambda.row(r).sum() + free_mass * lambda(r, n - 1) - L;
        }
        A.row(rows).setZero();
        A.row(rows).head(n - 1).setOnes();
        b[rows] = free_mass;
        Eigen::VectorXd c = Eigen::VectorXd::Zero(nv);
        c[n - 1] = 1.0;
        const SimplexResult s = simplex_maximize(c, A, b.cwiseMax(0.0));
        if (s.status != SimplexResult::Status::Optimal) throw std::runtime_error("maximin_weights: simplex did not converge");
        double used = 0.0;
        for (int i = 0; i < n - 1; ++i) {
            out.p[i] = eps + s.x[i];
            used += s.x[i];
        }
        out.p[n - 1] = eps + std::max(0.0, free_mass - used);
        double total = 0.0;
        for (double v : out.p) total += v;
        for (double& v : out.p) v /= total;
        out.pivots = s.pivots;
    }
    out.t_star = std::numeric_limits<double>::infinity();
    for (int r = 0; r < rows; ++r) {
        double v = 0.0;
        for (int i = 0; i < n; ++i) v += out.p[i] * lambda(r, i);
        if (v < out.t_star) {
            out.t_star = v;
            out.argmin = r;
        }
    }
    return out;
}

std::string to_string(Decision d) {
    switch (d) {
        case Decision::Yes: return "yes";
        case Decision::No: return "no";
        case Decision::Undetermined: return "undetermined";
    }
    return "undetermined";
}

PersistenceTest persistence_test(const Eigen::MatrixXd& lambda, const Eigen::MatrixXd& ci, double tol) {
    PersistenceTest t;
    if (lambda.rows() == 0) {
        t.decision = Decision::Yes;
        t.pessimistic.t_star = t.optimistic.t_star = std::numeric_limits<double>::infinity();
        t.pessimistic.p = t.optimistic.p = std::vector<double>(lambda.cols(), 1.0 / std::max<Eigen::Index>(1, lambda.cols()));
        return t;
    }
    t.pessimistic = maximin_weights(lambda - ci);
    t.optimistic = maximin_weights(lambda + ci);
    if (t.pessimistic.t_star > tol)
        t.decision = Decision::Yes;
    else if (t.optimistic.t_star < -tol)
        t.decision = Decision::No;
    else
        t.decision = Decision::Undetermined;
    return t;
}

}  // namespace stokolmo
