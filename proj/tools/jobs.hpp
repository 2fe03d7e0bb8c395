#pragma once

#include <string>
#include <vector>

#include "scenario.hpp"

namespace nullplane::cli {

enum class JobStatus { ok, violation, invalid, error };
const char* status_name(JobStatus s);

struct OutputFile {
    std::string name;  // relative to the output directory
    std::string content;
};

struct JobResult {
    JobStatus status = JobStatus::ok;
    std::string message;
    Json results = Json::object();
    Json residuals = Json::object();
    std::vector<OutputFile> files;
};

// tol_scale multiplies both the quadrature tolerances and every identity threshold.
JobResult run_job(const Scenario& sc, const JobSpec& job, double tol_scale);

// %.17g
std::string fmt(double x);

}  // namespace nullplane::cli
