#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mpiflow/cfg.hpp"

namespace mpiflow {

/// A blocking receive.
struct WaitRecord {
    int process = 0;
    Line line = 0;
    std::string var;
    Partner partner; // nullopt: any
    int tag = 0;

    friend bool operator==(const WaitRecord &, const WaitRecord &) = default;
};

struct SendRecord {
    int process = 0;
    Line line = 0;
    std::string var;
    int dest = 0;
    int tag = 0;

    friend bool operator==(const SendRecord &, const SendRecord &) = default;
};

using CommRecord = std::variant<WaitRecord, SendRecord>;

Line line_of(const CommRecord &r);
int process_of(const CommRecord &r);

struct CommRecords {
    std::vector<WaitRecord> waits;
    std::vector<SendRecord> sends;
};

/// One record per recv/send, in source order. Throws CommOutsideSection for
/// communication in the global region.
CommRecords extract_records(const MpiCfg &cfg);

// Record-file lines:
//   W process=<p> line=<n> var=<v> from=<q|any> tag=<t>
//   S process=<p> line=<n> var=<v> to=<q> tag=<t>
std::string format_record(const WaitRecord &w);
std::string format_record(const SendRecord &s);
std::string format_waits(const std::vector<WaitRecord> &waits);
std::string format_sends(const std::vector<SendRecord> &sends);

struct MatchTable {
    std::vector<WaitRecord> waits;
    std::vector<SendRecord> sends;
    std::vector<std::vector<std::size_t>> wait_candidates; // wait -> send indices
    std::vector<std::vector<std::size_t>> send_candidates; // send -> wait indices
};

/// Envelope match: destination, source (or any) and tag. Variable names are
/// payload and never participate.
bool matches(const WaitRecord &w, const SendRecord &s);

MatchTable match_records(std::vector<WaitRecord> waits, std::vector<SendRecord> sends);

enum class AnomalyKind { SelfWait, Deadlock, Nondeterminacy, UnmatchedSend };

std::string_view to_string(AnomalyKind kind);

struct Anomaly {
    AnomalyKind kind = AnomalyKind::SelfWait;
    CommRecord subject;
    std::vector<CommRecord> witnesses;
    std::string message;
};

struct AnomalyReport {
    std::vector<Anomaly> anomalies; // sorted by subject line, then kind
    std::size_t waits_examined = 0;
    std::size_t sends_examined = 0;
};

/// Per-wait classification (self-wait > missing send > nondeterminacy),
/// unmatched sends, and cyclic waits. Program order inside a section is taken
/// from record line numbers.
AnomalyReport detect_anomalies(const MatchTable &table);

std::string format_anomaly(const Anomaly &a);

} // namespace mpiflow
