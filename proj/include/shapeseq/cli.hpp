#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "shapeseq/pipeline.hpp"

namespace shapeseq::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2 };

/// Thrown for bad flags or configuration; maps to exit code 1.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Config {
    PipelineConfig pipeline;
    std::optional<std::filesystem::path> matrix_path;
    std::size_t top_k = 20;
    /// Keys set explicitly by a config file or flag, using config-file names.
    std::set<std::string> chosen;
};

/// Flat "key=value" lines; '#' starts a comment. Unknown keys are rejected.
/// Keys: n_points k threshold polarity radial_bins angular_bins r_inner
/// r_outer_scale skip_penalty gap matrix top_k.
void apply_config_text(std::istream& is, Config& cfg);
void apply_config_file(const std::filesystem::path& path, Config& cfg);

/// Entry point shared by the executable and the tests.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace shapeseq::cli
