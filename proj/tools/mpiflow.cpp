// mpiflow analyze <file.mmpi> [--dot <out.dot>] [--records <dir>] [--defuse]
//                 [--anomalies] [--format text|json]

#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "mpiflow/driver.hpp"

int main(int argc, char **argv)
{
    CLI::App app{"Static def-use and communication-anomaly analyzer for SPMD message-passing programs"};
    app.require_subcommand(1);

    mpiflow::AnalysisConfig config;
    std::string input, dot, records;
    bool defuse = false, anomalies = false;

    auto *analyze = app.add_subcommand("analyze", "Analyze one .mmpi program");
    analyze->add_option("file", input, "Input program")->required();
    analyze->add_option("--dot", dot, "Write the MPI-CFG as GraphViz DOT");
    analyze->add_option("--records", records, "Write waits.txt / sends.txt into this directory");
    analyze->add_flag("--defuse", defuse, "Report def-use affected statements");
    analyze->add_flag("--anomalies", anomalies, "Report communication anomalies");
    analyze->add_option("--format", config.format, "Output format")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, mpiflow::OutputFormat>{{"text", mpiflow::OutputFormat::Text},
                                                         {"json", mpiflow::OutputFormat::Json}}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return mpiflow::exit_code::usage_error;
    }

    config.input_path = input;
    if (!dot.empty())
        config.emit_dot = dot;
    if (!records.empty())
        config.emit_records = records;
    if (defuse || anomalies) {
        config.want_defuse = defuse;
        config.want_anomalies = anomalies;
    }
    return mpiflow::run(config, std::cout, std::cerr);
}
