#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "jobs.hpp"

#ifndef NULLPLANE_VERSION
#define NULLPLANE_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace nullplane;
using namespace nullplane::cli;

namespace {

constexpr int kOk = 0, kViolation = 1, kInvalid = 2;

// Write to a sibling temp file, then rename over the target.
void write_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

int cmd_list_jobs() {
    for (const auto& [kind, what] : job_kinds()) std::printf("%-14s %s\n", kind.c_str(), what.c_str());
    return kOk;
}

int cmd_validate(const std::string& path) {
    try {
        auto sc = load_scenario(path);
        std::printf("%s: valid, %zu job(s), %s\n", sc.name.c_str(), sc.jobs.size(), sc.hash.c_str());
        return kOk;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "invalid scenario: %s\n", e.what());
        return kInvalid;
    }
}

int cmd_run(const std::string& path, const std::string& out_dir, double tol_scale) {
    Scenario sc;
    try {
        sc = load_scenario(path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "invalid scenario: %s\n", e.what());
        return kInvalid;
    }
    try {
        fs::create_directories(out_dir);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "cannot create output directory %s: %s\n", out_dir.c_str(), e.what());
        return kInvalid;
    }

    Json summary = Json::object();
    summary["tool"] = "nullplane";
    summary["version"] = NULLPLANE_VERSION;
    summary["scenario"] = sc.name;
    summary["scenario_hash"] = sc.hash;
    summary["tol_scale"] = tol_scale;
    summary["jobs"] = Json::array();

    int code = kOk;
    for (const auto& job : sc.jobs) {
        const auto t0 = std::chrono::steady_clock::now();
        JobResult r = run_job(sc, job, tol_scale);
        Json files = Json::array();
        for (const auto& f : r.files) {
            try {
                write_atomic(fs::path(out_dir) / f.name, f.content);
                files.push_back(f.name);
            } catch (const std::exception& e) {
                r.status = JobStatus::error;
                r.message += (r.message.empty() ? "" : "; ") + std::string(e.what());
            }
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%-20s %-14s %-18s %8.2fs%s%s\n", job.name.c_str(), job.kind.c_str(), status_name(r.status), secs,
                    r.message.empty() ? "" : "  ", r.message.c_str());
        if (r.status != JobStatus::ok)
            std::fprintf(stderr, "job %s (%s): %s: %s\n", job.name.c_str(), job.kind.c_str(), status_name(r.status),
                         r.message.c_str());
        if (r.status == JobStatus::invalid) code = kInvalid;
        else if (r.status != JobStatus::ok && code == kOk) code = kViolation;

        Json j = Json::object();
        j["name"] = job.name;
        j["kind"] = job.kind;
        j["status"] = status_name(r.status);
        j["message"] = r.message;
        j["results"] = r.results;
        j["residuals"] = r.residuals;
        j["files"] = files;
        summary["jobs"].push_back(j);
    }
    summary["status"] = code == kOk ? "ok" : code == kViolation ? "identity-violation" : "invalid";
    try {
        write_atomic(fs::path(out_dir) / "summary.json", summary.dump(2) + "\n");
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return code == kOk ? kViolation : code;
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nullplane: null-cut modular theory and entropy toolkit"};
    app.set_version_flag("--version", NULLPLANE_VERSION);
    app.require_subcommand(1);

    std::string scenario, out_dir;
    int threads = 1;
    double tol_scale = 1.0;
    auto* run = app.add_subcommand("run", "run every job of a scenario");
    run->add_option("scenario", scenario, "scenario file")->required();
    run->add_option("--out", out_dir, "output directory")->required();
    run->add_option("--threads", threads, "worker threads (NULLPLANE_THREADS overrides)");
    run->add_option("--tol-scale", tol_scale, "multiplies quadrature tolerances and identity thresholds");

    auto* validate = app.add_subcommand("validate", "parse and check a scenario without running it");
    validate->add_option("scenario", scenario, "scenario file")->required();

    app.add_subcommand("list-jobs", "list the job kinds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInvalid;
    }

    try {
        if (*run) {
            if (threads < 1) {
                std::fprintf(stderr, "--threads must be >= 1, got %d\n", threads);
                return kInvalid;
            }
            if (!std::isfinite(tol_scale) || tol_scale <= 0.0) {
                std::fprintf(stderr, "--tol-scale must be a positive number\n");
                return kInvalid;
            }
            if (const char* env = std::getenv("NULLPLANE_THREADS")) {
                char* end = nullptr;
                long n = std::strtol(env, &end, 10);
                if (end == env || *end != '\0' || n < 1 || n > 4096) {
                    std::fprintf(stderr, "NULLPLANE_THREADS must be a positive integer, got '%s'\n", env);
                    return kInvalid;
                }
            }
            numerics::set_thread_count(threads);
            return cmd_run(scenario, out_dir, tol_scale);
        }
        if (*validate) return cmd_validate(scenario);
        return cmd_list_jobs();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "nullplane: %s\n", e.what());
        return kViolation;
    }
}
