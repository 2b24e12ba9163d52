// Acceptance runner: one PASS/FAIL line per criterion, exit 1 if any fails.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <vector>

#include "harvest/reference_suite.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::string out;
    harvest::SuiteOptions opts;
    std::vector<int> ids;
    app.add_option("--out", out, "directory for per-criterion CSVs");
    app.add_option("--threads", opts.threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--paths", opts.paths, "override path counts")->check(CLI::PositiveNumber);
    app.add_option("--criteria", ids, "subset of 1-8")->check(CLI::Range(1, 8));
    CLI11_PARSE(app, argc, argv);

    const auto results = harvest::run_reference_suite(opts, ids);
    bool all = true;
    for (const auto& r : results) {
        std::printf("%s criterion %d %s [%.1f s]: %s\n", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds,
                    r.detail.c_str());
        std::fflush(stdout);
        all = all && r.passed;
        if (!out.empty()) {
            fs::create_directories(out);
            std::ofstream(fs::path(out) / ("criterion_" + std::to_string(r.id) + ".csv")) << r.csv;
        }
    }
    if (!out.empty()) std::ofstream(fs::path(out) / "summary.csv") << harvest::suite_summary_csv(results);
    std::printf("%s\n", all ? "ALL PASS" : "SOME CRITERIA FAILED");
    return all ? 0 : 1;
}
