#pragma once

// MPI-aware control-flow graph.
//
// Construction runs in three steps:
//   build_basic_blocks   numbered statements -> blocks (+ listing of which
//                        block holds each statement)
//   generate_edges       sequential / parallel fan-out / fan-in edges
//   match_synchronization  send -> recv edges between process sections
//
// Block ids follow statement order: Entry is 0, Exit is the last id.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mpiflow/classify.hpp"

namespace mpiflow {

using BlockId = std::size_t;

/// `std::nullopt` is the global region (code outside every process section).
using Section = std::optional<int>;

enum class BlockKind { Entry, Exit, Ordinary, Recv, Send, Finalize };

std::string_view to_string(BlockKind kind);

struct BlockStmt {
    Line line = 0;
    StatementType type = StatementType::Assign;
    Stmt stmt; // head only for ifs
};

struct BasicBlock {
    BlockId id = 0;
    BlockKind kind = BlockKind::Ordinary;
    std::vector<BlockStmt> stmts;
    Section section;
};

/// Phase-2 listing entry: every numbered statement and marker with the block
/// that holds it. Markers (ParallelIf, Else, EndIf) have no block.
struct ListedStmt {
    Line line = 0;
    StatementType type = StatementType::Assign;
    std::optional<BlockId> block;
    std::optional<int> process;
};

struct BlockedProgram {
    std::vector<BasicBlock> blocks;
    std::vector<ListedStmt> listing;
    std::optional<std::string> special_id;
};

enum class EdgeKind { Sequential, ParallelFanOut, ParallelFanIn, Synchronization };
enum class Branch { Then, Else };

std::string_view to_string(EdgeKind kind);
std::string_view to_string(Branch branch);

struct SyncInfo {
    std::string var;
    Line send_line = 0;
    Line recv_line = 0;

    friend bool operator==(const SyncInfo &, const SyncInfo &) = default;
};

struct Edge {
    BlockId from = 0;
    BlockId to = 0;
    EdgeKind kind = EdgeKind::Sequential;
    std::optional<SyncInfo> sync;
    /// Set on edges leaving an ordinary-if condition block.
    std::optional<Branch> branch;

    friend bool operator==(const Edge &, const Edge &) = default;
};

struct SectionInfo {
    int process = 0;
    Line header_line = 0;
    Line endif_line = 0;
};

struct MpiCfg {
    std::vector<BasicBlock> blocks;
    std::vector<Edge> edges;
    std::optional<std::string> special_id;
    std::vector<SectionInfo> sections; // source order
    Diagnostics diagnostics;

    BlockId entry() const { return 0; }
    BlockId exit() const { return blocks.size() - 1; }
    const BasicBlock &block(BlockId id) const { return blocks.at(id); }

    std::vector<std::size_t> out_edges(BlockId id) const;
    std::vector<std::size_t> in_edges(BlockId id) const;
};

BlockedProgram build_basic_blocks(const ClassifiedProgram &cp);
MpiCfg generate_edges(const BlockedProgram &bp);
MpiCfg match_synchronization(MpiCfg cfg);

/// All three construction steps.
MpiCfg build_cfg(const ClassifiedProgram &cp);

std::string emit_dot(const MpiCfg &cfg);

struct CfgSummary {
    std::size_t blocks = 0;
    std::size_t sequential = 0;
    std::size_t parallel = 0;
    std::size_t synchronization = 0;
};

CfgSummary summarize(const MpiCfg &cfg);

} // namespace mpiflow
