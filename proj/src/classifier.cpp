#include "stokolmo/classifier.hpp"

#include <sstream>
#include <stdexcept>

namespace stokolmo {

namespace {

// Decision copy of a table column block: entries on a measure's own support are
// exactly zero, so their Monte Carlo or quadrature noise is dropped.
Eigen::MatrixXd off_support(const InvasionRateTable& table, const Eigen::MatrixXd& m) {
    Eigen::MatrixXd out = m;
    for (Eigen::Index r = 0; r < out.rows(); ++r)
        for (int i : table.measures[r].support.species()) out(r, i) = 0.0;
    return out;
}

Eigen::MatrixXd take(const Eigen::MatrixXd& m, const std::vector<int>& rows, const std::vector<int>& cols) {
    Eigen::MatrixXd out(rows.size(), cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c) out(r, c) = m(rows[r], cols[c]);
    return out;
}

std::vector<int> all_indices(Eigen::Index k) {
    std::vector<int> v(k);
    for (Eigen::Index i = 0; i < k; ++i) v[i] = static_cast<int>(i);
    return v;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

nlohmann::json PersistenceCertificate::to_json() const { return {{"p", p}, {"rho_star", rho_star}}; }

PersistenceCheck check_persistence(const InvasionRateTable& table, double tol) {
    PersistenceCheck out;
    const PersistenceTest t = persistence_test(off_support(table, table.lambda), off_support(table, table.ci), tol);
    out.decision = t.decision;
    out.t_star = t.pessimistic.t_star;
    if (t.decision == Decision::Yes) {
        out.certificate = PersistenceCertificate{t.pessimistic.p, 0.5 * t.pessimistic.t_star};
        out.argmin = t.pessimistic.argmin;
        return out;
    }
    out.argmin = t.decision == Decision::No ? t.optimistic.argmin : t.pessimistic.argmin;
    const ErgodicMeasure& mu = table.measures[out.argmin];
    if (t.decision == Decision::No) {
        out.refusal = "no positive weights make every boundary measure invadable; best margin " +
                      fmt(t.optimistic.t_star) + " attained at " + mu.name();
    } else {
        out.refusal = "persistence margin not sign-decidable (pessimistic " + fmt(t.pessimistic.t_star) +
                      ", optimistic " + fmt(t.optimistic.t_star) + ") at " + mu.name();
        bool low = false;
        for (Eigen::Index i = 0; i < table.low_confidence.cols(); ++i) low = low || table.low_confidence(out.argmin, i);
        if (low) out.refusal += "; low-confidence entries: tighten Monte Carlo budget";
    }
    return out;
}

Decision check_extinction_measure(int mu, const InvasionRateTable& table, double tol) {
    const Face support = table.measures.at(mu).support;
    bool undetermined = false;
    for (int i = 0; i < table.species(); ++i) {
        if (support.contains(i)) continue;
        const Sign s = sign_of(table.lambda(mu, i), table.ci(mu, i), tol);
        if (s == Sign::Positive) return Decision::No;
        if (s == Sign::Undetermined) undetermined = true;
    }
    if (!support.empty()) {
        std::vector<int> rows;
        for (std::size_t k = 0; k < table.measures.size(); ++k)
            if (table.measures[k].support.strictly_inside(support)) rows.push_back(static_cast<int>(k));
        const std::vector<int> cols = support.species();
        const PersistenceTest t = persistence_test(take(off_support(table, table.lambda), rows, cols),
                                                   take(off_support(table, table.ci), rows, cols), tol);
        if (t.decision == Decision::No) return Decision::No;
        if (t.decision == Decision::Undetermined) undetermined = true;
    }
    return undetermined ? Decision::Undetermined : Decision::Yes;
}

MeasurePartition partition_measures(const InvasionRateTable& table, double tol) {
    MeasurePartition part;
    for (std::size_t k = 0; k < table.measures.size(); ++k) {
        const Decision d = check_extinction_measure(static_cast<int>(k), table, tol);
        if (d == Decision::Yes) {
            part.m1.push_back(static_cast<int>(k));
        } else {
            part.m2.push_back(static_cast<int>(k));
            if (d == Decision::Undetermined) {
                part.decidable = false;
                part.reasons.push_back("attractor condition for " + table.measures[k].name() + " is not sign-decidable");
            }
        }
    }
    if (part.m2.empty()) {
        part.m2_status = "vacuous";
    } else {
        const std::vector<int> cols = all_indices(table.species());
        const PersistenceTest t =
            persistence_test(take(off_support(table, table.lambda), part.m2, cols),
                             take(off_support(table, table.ci), part.m2, cols), tol);
        part.m2_status = t.decision == Decision::Yes ? "pass" : t.decision == Decision::No ? "fail" : "undetermined";
        if (t.decision != Decision::Yes)
            part.reasons.push_back("convex combinations of the non-attracting measures are not uniformly invadable (margin " +
                                   fmt(t.pessimistic.t_star) + ")");
    }
    return part;
}

nlohmann::json MeasurePartition::to_json(const InvasionRateTable& table) const {
    std::vector<std::string> a, b;
    for (int k : m1) a.push_back(table.measures[k].name());
    for (int k : m2) b.push_back(table.measures[k].name());
    return {{"m1", a}, {"m2", b}, {"m2_status", m2_status}, {"decidable", decidable}, {"reasons", reasons}};
}

std::string to_string(Verdict::Kind k) {
    switch (k) {
        case Verdict::Kind::Persistent: return "Persistent";
        case Verdict::Kind::Extinction: return "Extinction";
        case Verdict::Kind::BlowUpRisk: return "BlowUpRisk";
        case Verdict::Kind::Inconclusive: return "Inconclusive";
    }
    return "Inconclusive";
}

nlohmann::json Verdict::to_json(const InvasionRateTable* table) const {
    nlohmann::json j;
    j["kind"] = to_string(kind);
    j["reasons"] = reasons;
    if (certificate) j["certificate"] = certificate->to_json();
    if (partition && table) j["partition"] = partition->to_json(*table);
    if (!predictions.empty()) {
        nlohmann::json preds = nlohmann::json::array();
        for (const auto& p : predictions) {
            nlohmann::json rates = nlohmann::json::array();
            for (const auto& r : p.rates) rates.push_back({{"species", r.species + 1}, {"lambda", r.lambda}, {"ci", r.ci}});
            preds.push_back({{"measure", table ? table->measures[p.measure].name() : std::to_string(p.measure)},
                             {"rates", rates}});
        }
        j["predicted_rates"] = preds;
    }
    if (!conclusion.empty()) j["conclusion"] = conclusion;
    return j;
}

Verdict verdict_from_table(const InvasionRateTable& table, const AssumptionReport& assumptions, double tol) {
    Verdict v;
    const PersistenceCheck pc = check_persistence(table, tol);
    const MeasurePartition part = partition_measures(table, tol);
    if (pc.decision == Decision::Yes && !part.m1.empty())
        throw std::logic_error("invasion table certifies persistence while " + table.measures[part.m1.front()].name() +
                               " is attracting");
    if (pc.decision == Decision::Yes) {
        v.kind = Verdict::Kind::Persistent;
        v.certificate = pc.certificate;
        v.reasons.push_back("every boundary ergodic measure is invaded under the certificate weights");
        return v;
    }
    if (pc.decision == Decision::Undetermined) {
        v.kind = Verdict::Kind::Inconclusive;
        v.reasons.push_back(pc.refusal);
        return v;
    }
    v.partition = part;
    if (!part.decidable) {
        v.kind = Verdict::Kind::Inconclusive;
        v.reasons = part.reasons;
        return v;
    }
    if (part.m1.empty()) {
        v.kind = Verdict::Kind::Inconclusive;
        v.reasons.push_back(pc.refusal);
        v.reasons.push_back("no boundary measure satisfies the attractor condition");
        return v;
    }
    v.kind = Verdict::Kind::Extinction;
    for (int k : part.m1) {
        ExtinctionPrediction p;
        p.measure = k;
        for (int i = 0; i < table.species(); ++i)
            if (!table.measures[k].support.contains(i)) p.rates.push_back({i, table.lambda(k, i), table.ci(k, i)});
        v.predictions.push_back(std::move(p));
    }
    const bool growth_ok = is_pass(assumptions.growth.status);
    const bool m2_ok = part.m2_status == "pass" || part.m2_status == "vacuous";
    if (growth_ok && m2_ok) {
        v.conclusion = "attractor-decomposition";
        v.reasons.push_back("paths converge to one of the attracting measures; basin probabilities sum to 1");
    } else {
        v.conclusion = "boundary-convergence";
        if (!growth_ok) v.reasons.push_back("growth condition " + to_string(assumptions.growth.status));
        for (const auto& r : part.reasons) v.reasons.push_back(r);
        v.reasons.push_back("only convergence of the smallest species to 0 is claimed");
    }
    return v;
}

nlohmann::json Classification::to_json() const {
    nlohmann::json j;
    j["assumptions"] = assumptions.to_json();
    if (boundary) j["boundary"] = boundary->to_json();
    j["verdict"] = verdict.to_json(table());
    return j;
}

Classification classify(const KolmogorovModel& model, const AnalysisConfig& config) {
    Classification c;
    try {
        c.assumptions = check_assumptions(model, config.sampling);
    } catch (const std::exception& e) {
        c.verdict.kind = Verdict::Kind::Inconclusive;
        c.verdict.reasons.push_back(std::string("assumption checks failed: ") + e.what());
        return c;
    }
    if (is_failure(c.assumptions.nondegenerate.status)) {
        c.verdict.kind = Verdict::Kind::Inconclusive;
        c.verdict.reasons.push_back("noise is degenerate: " + c.assumptions.nondegenerate.rationale);
        return c;
    }
    if (is_failure(c.assumptions.tightness.status)) {
        c.verdict.kind = Verdict::Kind::BlowUpRisk;
        c.verdict.reasons.push_back("tightness " + to_string(c.assumptions.tightness.status) + ": " +
                                    c.assumptions.tightness.rationale);
        return c;
    }
    try {
        c.boundary = find_boundary_measures(model, config);
    } catch (const std::exception& e) {
        c.verdict.kind = Verdict::Kind::Inconclusive;
        c.verdict.reasons.push_back(std::string("boundary analysis failed: ") + e.what());
        return c;
    }
    if (!c.boundary->complete()) {
        c.verdict.kind = Verdict::Kind::Inconclusive;
        for (const auto& f : c.boundary->faces)
            if (f.status == FaceRecord::Status::Unresolved) c.verdict.reasons.push_back("face " + f.face.label() + ": " + f.reason);
        return c;
    }
    c.verdict = verdict_from_table(c.boundary->table, c.assumptions, config.decision_tol);
    return c;
}

}  // namespace stokolmo
