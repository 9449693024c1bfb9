#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mpiflow/diagnostic.hpp"
#include "mpiflow/frontend.hpp"

namespace mpiflow {

enum class StatementType {
    Assign,
    ParallelIf,
    OrdinaryIf,
    Else,
    EndIf,
    Send,
    Recv,
    Init,
    Rank,
    Size,
    Finalize,
    End,
};

std::string_view to_string(StatementType type);

/// One entry of the numbered program. `Else`/`EndIf` entries are markers and
/// carry no statement; an `If` entry carries the statement head only (bodies
/// stripped, since the bodies follow as their own entries).
struct ClassifiedStmt {
    Line line = 0;
    StatementType type = StatementType::Assign;
    std::optional<Stmt> stmt;
    std::optional<int> process; // ParallelIf only
};

struct ClassifiedProgram {
    std::vector<ClassifiedStmt> stmts; // pre-order, source order
    std::optional<std::string> special_id;
    std::optional<std::string> size_var;
    Diagnostics diagnostics;
};

/// Copy of `s` with if-bodies removed.
Stmt statement_head(const Stmt &s);

ClassifiedProgram classify_statements(const Ast &ast);

} // namespace mpiflow
