#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace stokolmo {

struct SimplexResult {
    enum class Status { Optimal, Unbounded, IterationLimit };
    Status status = Status::Optimal;
    Eigen::VectorXd x;
    double value = 0.0;
    int pivots = 0;
};

/// maximise c^T x subject to A x <= b, x >= 0, with b >= 0 (the origin is
/// feasible). Dense tableau, Bland's rule.
SimplexResult simplex_maximize(const Eigen::VectorXd& c, const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                               int max_pivots = 100000);

struct MaximinResult {
    std::vector<double> p;
    double t_star = 0.0;  // min over rows of sum_i p_i lambda(row, i), recomputed from p
    int argmin = 0;
    int pivots = 0;
};

/// max over p in the simplex with p_i >= eps of min_rows sum_i p_i lambda(row, i).
MaximinResult maximin_weights(const Eigen::MatrixXd& lambda, double eps = 1e-6);

enum class Decision { Yes, No, Undetermined };
std::string to_string(Decision d);

struct PersistenceTest {
    Decision decision = Decision::Undetermined;
    MaximinResult pessimistic;  // on lambda - ci
    MaximinResult optimistic;   // on lambda + ci
};

/// Yes if the pessimistic table has margin > tol, No if even the optimistic
/// table has margin < -tol, Undetermined otherwise. An empty table is Yes with
/// margin +inf (nothing to invade).
PersistenceTest persistence_test(const Eigen::MatrixXd& lambda, const Eigen::MatrixXd& ci, double tol);

}  // namespace stokolmo
