#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nullplane/entropy.hpp"

namespace nullplane::cli {

using Json = nlohmann::ordered_json;

struct JobSpec {
    std::string name;
    std::string kind;
    std::string output;  // file stem inside the output directory
    Json raw;            // kind-specific fields, already checked
};

struct Scenario {
    std::string name;
    std::string hash;  // FNV-1a of the file bytes
    oneparticle::MassShellParams params;
    numerics::QuadratureSpec quad;
    std::map<std::string, oneparticle::ThinTestFunction> functions;
    std::map<std::string, nullcut::CutProfile> profiles;
    std::vector<JobSpec> jobs;
};

const std::vector<std::pair<std::string, std::string>>& job_kinds();

// Throws ScenarioError naming the offending entry.
Scenario load_scenario(const std::string& path);

// Helpers shared with the job runners; all throw ScenarioError.
double number(const Json& j, const std::string& key, const std::string& where);
double number_or(const Json& j, const std::string& key, double fallback, const std::string& where);
std::vector<double> grid(const Json& j, const std::string& key, const std::string& where);

}  // namespace nullplane::cli
