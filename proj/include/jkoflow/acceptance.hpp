#pragma once

#include <span>
#include <string>
#include <vector>

namespace jkoflow {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

/// Identifiers of the acceptance criteria (1..10).
std::vector<int> all_criteria();
std::string criterion_name(int id);

/// Run the selected criteria (expensive shared runs are computed once and
/// reused). `out_dir` may be empty; when set, artifact CSVs are written there.
std::vector<CriterionResult> run_acceptance(std::span<const int> ids, const std::string& out_dir,
                                            int jobs = 1);

} // namespace jkoflow
