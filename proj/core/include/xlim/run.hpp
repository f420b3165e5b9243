#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "xlim/config.hpp"
#include "xlim/error.hpp"

namespace xlim {

/// Any failure inside a command, tagged with the pipeline stage it came from.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what)
        : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

struct Artifact {
    std::string name;
    std::string content;
};

struct RunOutput {
    nlohmann::ordered_json report;
    std::vector<Artifact> artifacts;

    /// Report serialized exactly as written to report.json.
    std::string report_text() const;
};

/// Commands: simulate, subtract, fit, limit, project, constants. Pure: nothing
/// is written to disk, and identical (command, config) pairs give identical
/// output.
RunOutput run_command(std::string_view command, const RunConfig& config);

/// Writes report.json and every artifact into `out_dir` (created if missing).
void write_outputs(const std::filesystem::path& out_dir, const RunOutput& output);

}  // namespace xlim
