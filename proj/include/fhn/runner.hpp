#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fhn/config.hpp"

namespace fhn {

enum ExitStatus : int {
    kExitPass = 0,
    kExitCheckFailed = 1,
    kExitConfigInvalid = 2,
    kExitBlowUp = 3,
};

/// One invariant checked by a run. Non-finite values are written to
/// summary.json as the strings "inf", "-inf" or "nan".
struct CheckResult {
    std::string experiment;
    std::string name;
    bool passed = false;
    double value = 0.0;
    std::optional<double> threshold;
};

struct RunOutcome {
    int status = kExitPass;
    std::vector<CheckResult> checks;
    std::vector<std::string> files;        // written reports, in order
    std::vector<std::string> violations;   // config violations (status 2)
    std::string error;                     // first failure message, if any

    bool all_passed() const noexcept;
};

/// Validates, runs the enabled experiments on one shared Wiener path and
/// writes each CSV report into cfg.output_dir as soon as it is complete,
/// followed by summary.json. Progress lines go to `log`.
RunOutcome run(const RunConfig& cfg, std::ostream& log);

/// File name of the CSV written by an experiment.
std::string report_file(const std::string& experiment);

}  // namespace fhn
