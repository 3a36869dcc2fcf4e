#include "stokolmo/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <stdexcept>

namespace stokolmo {

nlohmann::json RunReport::to_json() const {
    nlohmann::json j;
    j["tool"] = {{"name", "stokolmo"}, {"version", STOKOLMO_VERSION}};
    j["command"] = command;
    j["seed"] = seed;
    if (!model.is_null()) j["model"] = model;
    if (!config.is_null()) j["config"] = config;
    if (!assumptions.is_null()) j["assumptions"] = assumptions;
    if (!measures.is_null()) j["measures"] = measures;
    if (!invasion_rates.is_null()) j["invasion_rates"] = invasion_rates;
    if (!faces.is_null()) j["faces"] = faces;
    if (!verdict.is_null()) j["verdict"] = verdict;
    if (!verification.is_null()) j["verification"] = verification;
    if (timing) j["timing"] = *timing;
    return j;
}

namespace {

std::string format_number(double v, bool exact) {
    if (!std::isfinite(v)) return "null";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    if (exact && std::strtod(buf, nullptr) != v) std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void emit(const nlohmann::json& j, std::string& out, int depth, bool exact) {
    const std::string pad(2 * (depth + 1), ' ');
    const std::string close(2 * depth, ' ');
    switch (j.type()) {
        case nlohmann::json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad + nlohmann::json(it.key()).dump() + ": ";
                const bool sub_exact = exact || (depth == 0 && (it.key() == "model" || it.key() == "config" || it.key() == "seed"));
                emit(it.value(), out, depth + 1, sub_exact);
            }
            out += "\n" + close + "}";
            return;
        }
        case nlohmann::json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            bool scalar = true;
            for (const auto& e : j) scalar = scalar && !e.is_structured();
            if (scalar) {
                out += "[";
                for (std::size_t k = 0; k < j.size(); ++k) {
                    if (k) out += ", ";
                    emit(j[k], out, depth + 1, exact);
                }
                out += "]";
                return;
            }
            out += "[\n";
            for (std::size_t k = 0; k < j.size(); ++k) {
                if (k) out += ",\n";
                out += pad;
                emit(j[k], out, depth + 1, exact);
            }
            out += "\n" + close + "]";
            return;
        }
        case nlohmann::json::value_t::number_float:
            out += format_number(j.get<double>(), exact);
            return;
        default:
            out += j.dump();
            return;
    }
}

}  // namespace

std::string canonical_json(const nlohmann::json& value) {
    std::string out;
    emit(value, out, 0, false);
    out += "\n";
    return out;
}

void write_text(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
        if (!std::cout) throw std::runtime_error("cannot write to stdout");
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

void write_report(const RunReport& report, const std::string& path) { write_text(canonical_json(report.to_json()), path); }

}  // namespace stokolmo
