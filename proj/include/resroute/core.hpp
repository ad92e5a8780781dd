#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace resroute {

using Index = int;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool is_finite(double x) { return std::isfinite(x); }

/// One failed invariant found during validation. Violations are data, not
/// faults: callers inspect the report instead of catching exceptions.
struct Violation {
    std::string field;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool pass() const { return violations.empty(); }

    void add(std::string field, std::string message) {
        violations.push_back({std::move(field), std::move(message)});
    }

    std::string to_string() const {
        if (pass()) return "ok";
        std::string out;
        for (const auto& v : violations) {
            out += v.field;
            out += ": ";
            out += v.message;
            out += '\n';
        }
        return out;
    }
};

}  // namespace resroute
