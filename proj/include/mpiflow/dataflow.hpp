#pragma once

// Def-use analysis over the MPI-CFG.
//
//   reach(i) = U over in-edges e = (p, i) of transfer(e, avail(p))
//   avail(i) = def(i) U (reach(i) - defs killed in i)
//   dcu(i)   = reach(i) ^ c-use(i)      (statement-precise inside a block)
//   dpu(i,j) = avail(i) ^ p-use(i,j)
//
// transfer is the identity on sequential and fan-in edges, keeps only
// global-region definitions across fan-out edges, and is empty across
// synchronization edges; cross-process effects are reported as comm pairs
// (definition of a sent variable -> the matching recv statement).

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mpiflow/cfg.hpp"

namespace mpiflow {

enum class OccurrenceKind { Def, CUse, PUse };

struct Occurrence {
    std::string var;
    Line line = 0;
    BlockId block = 0;
    OccurrenceKind kind = OccurrenceKind::Def;
    std::optional<std::size_t> edge; // PUse: index into MpiCfg::edges

    friend bool operator==(const Occurrence &, const Occurrence &) = default;
};

std::vector<Occurrence> collect_occurrences(const MpiCfg &cfg);

struct Definition {
    std::string var;
    Line line = 0;
    BlockId block = 0;
    Section scope; // nullopt: global

    bool global() const { return !scope.has_value(); }
};

using DefIndex = std::size_t;
using DefSet = std::set<DefIndex>;

struct FixpointStats {
    std::size_t iterations = 0;                 // sweeps that changed some set
    std::vector<std::size_t> total_cardinality; // sum |reach| + |avail| after each sweep
};

struct ReachAvail {
    std::vector<Definition> definitions;
    std::vector<DefSet> reach; // indexed by block id
    std::vector<DefSet> avail;
    FixpointStats stats;
};

/// Definitions in occurrence order (one per Def occurrence).
std::vector<Definition> definitions_of(const MpiCfg &cfg, const std::vector<Occurrence> &occ);

/// `order` is the block visiting order for each sweep; empty means id order.
ReachAvail compute_reach_avail(const MpiCfg &cfg, const std::vector<Occurrence> &occ,
                               std::span<const BlockId> order = {});

using UsePair = std::pair<DefIndex, Line>;

struct DefUseReport {
    std::vector<Definition> definitions;
    std::vector<std::set<UsePair>> dcu;          // indexed by block id
    std::map<std::size_t, std::set<UsePair>> dpu; // keyed by edge index
    std::set<UsePair> comm_pairs;                 // (definition, recv line)
    std::vector<std::set<Line>> affected;         // indexed by DefIndex

    std::optional<DefIndex> find(const std::string &var, Line line) const;
};

DefUseReport compute_def_use(const MpiCfg &cfg, const std::vector<Occurrence> &occ,
                             const ReachAvail &ra);

/// Affected lines of the definition of `var` at `line`, ascending.
std::vector<Line> affected_statements(const DefUseReport &report, const std::string &var,
                                      Line line);

/// `def VAR@LINE -> {L1, L2}` per definition, ordered by line then name.
std::string render_def_use(const DefUseReport &report);

struct DefUseAnalysis {
    std::vector<Occurrence> occurrences;
    ReachAvail reach_avail;
    DefUseReport report;
};

DefUseAnalysis analyze_def_use(const MpiCfg &cfg);

} // namespace mpiflow
