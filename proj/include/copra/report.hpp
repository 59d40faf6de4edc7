#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "copra/eval.hpp"

namespace copra {

inline constexpr const char* kCsvHeader =
    "sweep_var,value,method,mean_sinr_db,stderr_db,trials,fallback_rate";

// One CSV row: a (sweep point, method) pair.
struct CsvRow {
    std::string sweep_var;
    double value = 0;
    std::string method;
    double mean_sinr_db = 0;
    double stderr_db = 0;
    int trials = 0;
    double fallback_rate = 0;
};

class CsvError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numbers use 9 significant digits.
std::string format_number(double v);

std::vector<CsvRow> sweep_rows(const SweepResult& result);
std::string to_csv(const std::vector<CsvRow>& rows);

/// Parses CSV text in the emitted schema; throws CsvError naming the
/// offending row (1-based, header is row 1).
std::vector<CsvRow> parse_csv(const std::string& text);

/// Static SVG line chart of mean SINR against the sweep variable, one
/// series per method with point markers and a legend. Byte-identical for
/// identical input.
std::string render_svg(const std::vector<CsvRow>& rows);

// JSON metadata sufficient to re-run the sweep.
std::string sweep_metadata(const SweepResult& result, const std::string& version);

std::string trial_json(const TrialRecord& rec, const ExperimentConfig& cfg, std::uint64_t seed);
std::string trial_text(const TrialRecord& rec, const ExperimentConfig& cfg, std::uint64_t seed);

}  // namespace copra
