#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "mpiflow/anomaly.hpp"
#include "mpiflow/cfg.hpp"
#include "mpiflow/dataflow.hpp"

namespace mpiflow {

enum class OutputFormat { Text, Json };

struct AnalysisConfig {
    std::filesystem::path input_path;
    std::optional<std::filesystem::path> emit_dot;
    std::optional<std::filesystem::path> emit_records;
    bool want_defuse = true;
    bool want_anomalies = true;
    OutputFormat format = OutputFormat::Text;
};

struct AnalysisResult {
    CfgSummary cfg_summary;
    std::optional<DefUseReport> defuse;
    std::optional<AnomalyReport> anomalies;
    Diagnostics diagnostics;
};

/// Everything the pipeline produced for one program.
struct Analysis {
    ClassifiedProgram program;
    MpiCfg cfg;
    std::optional<DefUseAnalysis> defuse;
    std::optional<CommRecords> records;
    AnalysisResult result;
};

/// parse -> classify -> cfg -> dataflow -> anomaly. Throws mpiflow::Error on
/// lexical, syntactic, classification and section errors.
Analysis analyze(const SourceProgram &source, bool want_defuse = true, bool want_anomalies = true);

std::string render(const AnalysisResult &result, OutputFormat format);

namespace exit_code {
inline constexpr int clean = 0;
inline constexpr int anomalies = 1;
inline constexpr int program_error = 2;
inline constexpr int usage_error = 3;
} // namespace exit_code

/// Runs one analysis, writes requested files, renders to `out`; failures get
/// a one-line diagnostic on `err`.
int run(const AnalysisConfig &config, std::ostream &out, std::ostream &err);

} // namespace mpiflow
