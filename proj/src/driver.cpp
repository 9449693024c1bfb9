#include "mpiflow/driver.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace mpiflow {

Analysis analyze(const SourceProgram &source, bool want_defuse, bool want_anomalies)
{
    Analysis a;
    a.program = classify_statements(parse(source));
    a.cfg = build_cfg(a.program);

    AnalysisResult &r = a.result;
    r.cfg_summary = summarize(a.cfg);
    r.diagnostics = a.program.diagnostics;
    r.diagnostics.insert(r.diagnostics.end(), a.cfg.diagnostics.begin(), a.cfg.diagnostics.end());
    std::stable_sort(r.diagnostics.begin(), r.diagnostics.end(),
                     [](const Diagnostic &x, const Diagnostic &y) { return x.line < y.line; });

    if (want_defuse) {
        a.defuse = analyze_def_use(a.cfg);
        r.defuse = a.defuse->report;
    }
    if (want_anomalies) {
        a.records = extract_records(a.cfg);
        r.anomalies = detect_anomalies(match_records(a.records->waits, a.records->sends));
    }
    return a;
}

namespace {

std::vector<DefIndex> definition_order(const DefUseReport &rep)
{
    std::vector<DefIndex> order(rep.definitions.size());
    std::iota(order.begin(), order.end(), DefIndex{0});
    std::sort(order.begin(), order.end(), [&](DefIndex a, DefIndex b) {
        return std::tie(rep.definitions[a].line, rep.definitions[a].var) <
               std::tie(rep.definitions[b].line, rep.definitions[b].var);
    });
    return order;
}

std::string plural(std::size_t n, std::string_view word)
{
    std::string s = std::to_string(n) + " " + std::string(word);
    if (n != 1)
        s += 's';
    return s;
}

std::string render_text(const AnalysisResult &r)
{
    std::ostringstream os;
    const CfgSummary &s = r.cfg_summary;
    os << "CFG SUMMARY: " << plural(s.blocks, "block") << ", "
       << plural(s.sequential, "sequential edge");
    if (s.parallel)
        os << ", " << plural(s.parallel, "parallel edge");
    if (s.synchronization)
        os << ", " << plural(s.synchronization, "synchronization edge");
    os << '\n';

    if (r.defuse) {
        os << "\nDEF-USE:\n" << render_def_use(*r.defuse);
    }
    if (r.anomalies) {
        os << "\nANOMALIES:\n";
        for (const Anomaly &a : r.anomalies->anomalies)
            os << format_anomaly(a) << '\n';
    }
    os << "\nDIAGNOSTICS:\n";
    for (const Diagnostic &d : r.diagnostics)
        os << format(d) << '\n';
    return os.str();
}

nlohmann::ordered_json record_json(const CommRecord &rec)
{
    return {{"line", line_of(rec)}, {"process", process_of(rec)}};
}

std::string render_json(const AnalysisResult &r)
{
    using json = nlohmann::ordered_json;
    json doc;
    const CfgSummary &s = r.cfg_summary;
    doc["summary"] = {{"blocks", s.blocks},
                      {"edges",
                       {{"sequential", s.sequential},
                        {"parallel", s.parallel},
                        {"synchronization", s.synchronization}}}};

    if (r.defuse) {
        json defs = json::array();
        for (DefIndex d : definition_order(*r.defuse)) {
            const Definition &def = r.defuse->definitions[d];
            const auto &lines = r.defuse->affected[d];
            defs.push_back({{"var", def.var},
                            {"line", def.line},
                            {"affected", std::vector<Line>(lines.begin(), lines.end())}});
        }
        doc["defuse"] = std::move(defs);
    }
    if (r.anomalies) {
        json list = json::array();
        for (const Anomaly &a : r.anomalies->anomalies) {
            json witnesses = json::array();
            for (const CommRecord &w : a.witnesses)
                witnesses.push_back(record_json(w));
            list.push_back({{"kind", std::string(to_string(a.kind))},
                            {"line", line_of(a.subject)},
                            {"process", process_of(a.subject)},
                            {"witnesses", std::move(witnesses)},
                            {"message", a.message}});
        }
        doc["anomalies"] = std::move(list);
    }
    json diags = json::array();
    for (const Diagnostic &d : r.diagnostics)
        diags.push_back({{"level", std::string(to_string(d.level))},
                         {"line", d.line},
                         {"message", d.message}});
    doc["diagnostics"] = std::move(diags);
    return doc.dump(2) + "\n";
}

bool write_file(const std::filesystem::path &path, const std::string &content, std::ostream &err)
{
    std::ofstream f(path, std::ios::binary);
    f << content;
    f.close();
    if (!f) {
        err << "error: cannot write " << path.string() << '\n';
        return false;
    }
    return true;
}

} // namespace

std::string render(const AnalysisResult &result, OutputFormat format)
{
    return format == OutputFormat::Json ? render_json(result) : render_text(result);
}

int run(const AnalysisConfig &config, std::ostream &out, std::ostream &err)
{
    SourceProgram source;
    try {
        source = SourceProgram::load(config.input_path);
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return exit_code::usage_error;
    }

    Analysis analysis;
    try {
        analysis = analyze(source, config.want_defuse, config.want_anomalies);
    } catch (const Error &e) {
        err << "error " << config.input_path.string() << ": " << e.what() << '\n';
        return exit_code::program_error;
    }

    if (config.emit_dot && !write_file(*config.emit_dot, emit_dot(analysis.cfg), err))
        return exit_code::usage_error;

    if (config.emit_records) {
        CommRecords records = analysis.records ? *analysis.records : CommRecords{};
        if (!analysis.records) {
            try {
                records = extract_records(analysis.cfg);
            } catch (const Error &e) {
                err << "error " << config.input_path.string() << ": " << e.what() << '\n';
                return exit_code::program_error;
            }
        }
        std::error_code ec;
        std::filesystem::create_directories(*config.emit_records, ec);
        if (ec) {
            err << "error: cannot create " << config.emit_records->string() << '\n';
            return exit_code::usage_error;
        }
        if (!write_file(*config.emit_records / "waits.txt", format_waits(records.waits), err) ||
            !write_file(*config.emit_records / "sends.txt", format_sends(records.sends), err))
            return exit_code::usage_error;
    }

    out << render(analysis.result, config.format);

    const bool found = analysis.result.anomalies && !analysis.result.anomalies->anomalies.empty();
    return found ? exit_code::anomalies : exit_code::clean;
}

} // namespace mpiflow
