#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "causal/rng.hpp"
#include "json.hpp"

namespace causal {

inline constexpr int kReportSchemaVersion = 1;

/// One named predicate with the measured value and the threshold it was held to.
struct Check {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool passed = false;
};

/// Structured record of one experiment: predicates, free-form details, seeds.
struct RunReport {
    std::string experiment;
    std::vector<Check> checks;
    nlohmann::json details = nlohmann::json::object();
    std::vector<Seed> seeds;

    /// Records `value <= threshold` as a check and returns its outcome.
    bool expect_at_most(const std::string& name, double value, double threshold) {
        const bool ok = std::isfinite(value) && value <= threshold;
        checks.push_back({name, value, threshold, ok});
        return ok;
    }

    bool expect_at_least(const std::string& name, double value, double threshold) {
        const bool ok = std::isfinite(value) && value >= threshold;
        checks.push_back({name, value, threshold, ok});
        return ok;
    }

    bool expect(const std::string& name, bool ok) {
        checks.push_back({name, ok ? 1.0 : 0.0, 1.0, ok});
        return ok;
    }

    bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
    }

    const Check* find(const std::string& name) const {
        auto it = std::find_if(checks.begin(), checks.end(), [&](const Check& c) { return c.name == name; });
        return it == checks.end() ? nullptr : &*it;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["schema_version"] = kReportSchemaVersion;
        j["experiment"] = experiment;
        j["passed"] = passed();
        auto& arr = j["checks"] = nlohmann::json::array();
        for (const auto& c : checks) {
            nlohmann::json cj{{"name", c.name}, {"passed", c.passed}};
            // JSON has no inf/nan; keep them readable instead of null.
            auto put = [&cj](const char* key, double v) {
                if (std::isfinite(v)) cj[key] = v; else cj[key] = std::to_string(v);
            };
            put("value", c.value);
            put("threshold", c.threshold);
            arr.push_back(std::move(cj));
        }
        j["details"] = details;
        auto& sj = j["seeds"] = nlohmann::json::array();
        for (const auto& s : seeds) sj.push_back({{"seed", s.value}, {"stream", s.stream}});
        return j;
    }
};

}  // namespace causal
