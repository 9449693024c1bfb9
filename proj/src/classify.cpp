#include "mpiflow/classify.hpp"

#include <set>

namespace mpiflow {

std::string_view to_string(StatementType type)
{
    switch (type) {
    case StatementType::Assign: return "assign";
    case StatementType::ParallelIf: return "parallel-if";
    case StatementType::OrdinaryIf: return "if";
    case StatementType::Else: return "else";
    case StatementType::EndIf: return "endif";
    case StatementType::Send: return "send";
    case StatementType::Recv: return "recv";
    case StatementType::Init: return "init";
    case StatementType::Rank: return "rank";
    case StatementType::Size: return "size";
    case StatementType::Finalize: return "finalize";
    case StatementType::End: return "end";
    }
    return "?";
}

Stmt statement_head(const Stmt &s)
{
    Stmt head = s;
    if (auto *ifs = std::get_if<IfStmt>(&head.node)) {
        ifs->then_body.clear();
        if (ifs->else_body)
            ifs->else_body->clear();
    }
    return head;
}

namespace {

bool mentions(const Expr &e, const std::string &name)
{
    std::vector<std::string> ids;
    collect_identifiers(e, ids);
    for (const auto &id : ids)
        if (id == name)
            return true;
    return false;
}

class Classifier {
public:
    ClassifiedProgram run(const Ast &ast)
    {
        find_rank(ast.statements);
        walk(ast.statements, /*top_level=*/true);
        return std::move(out_);
    }

private:
    ClassifiedProgram out_;
    bool init_seen_ = false;
    bool init_warned_ = false;
    std::set<int> sections_;

    void find_rank(const std::vector<Stmt> &stmts)
    {
        for (const Stmt &s : stmts) {
            if (const auto *r = s.as<RankStmt>()) {
                if (out_.special_id)
                    throw ClassifyError(ClassifyError::Code::MultipleRank, s.line, r->arg);
                out_.special_id = r->arg;
            } else if (const auto *ifs = s.as<IfStmt>()) {
                find_rank(ifs->then_body);
                if (ifs->else_body)
                    find_rank(*ifs->else_body);
            }
        }
    }

    void require_init(Line line)
    {
        if (init_seen_ || init_warned_)
            return;
        init_warned_ = true;
        out_.diagnostics.push_back(
            {Level::Warning, line, "MPI call before mpi_init"});
    }

    void push(const Stmt &s, StatementType type, std::optional<int> process = std::nullopt)
    {
        out_.stmts.push_back({s.line, type, statement_head(s), process});
    }

    void marker(Line line, StatementType type) { out_.stmts.push_back({line, type, {}, {}}); }

    // Returns the process id when `ifs` declares a process section.
    std::optional<int> process_section(const Stmt &s, const IfStmt &ifs)
    {
        if (!out_.special_id)
            return std::nullopt;
        const std::string &id = *out_.special_id;
        if (!mentions(ifs.cond.lhs, id) && !mentions(ifs.cond.rhs, id))
            return std::nullopt;

        const bool exact = ifs.cond.op == RelOp::Eq && ifs.cond.lhs.kind == Expr::Kind::Variable &&
                           ifs.cond.lhs.name == id && ifs.cond.rhs.kind == Expr::Kind::Integer &&
                           ifs.cond.rhs.value <= INT32_MAX;
        if (!exact)
            throw ClassifyError(ClassifyError::Code::NonConstantProcessId, s.line,
                                print(ifs.cond.lhs) + " " + std::string(to_string(ifs.cond.op)) +
                                    " " + print(ifs.cond.rhs));
        return static_cast<int>(ifs.cond.rhs.value);
    }

    void walk(const std::vector<Stmt> &stmts, bool top_level)
    {
        for (const Stmt &s : stmts) {
            std::visit(
                [&](const auto &n) {
                    using T = std::decay_t<decltype(n)>;
                    if constexpr (std::is_same_v<T, AssignStmt>) {
                        push(s, StatementType::Assign);
                    } else if constexpr (std::is_same_v<T, IfStmt>) {
                        if_stmt(s, n, top_level);
                    } else if constexpr (std::is_same_v<T, InitStmt>) {
                        init_seen_ = true;
                        push(s, StatementType::Init);
                    } else if constexpr (std::is_same_v<T, RankStmt>) {
                        require_init(s.line);
                        push(s, StatementType::Rank);
                    } else if constexpr (std::is_same_v<T, SizeStmt>) {
                        require_init(s.line);
                        if (!out_.size_var)
                            out_.size_var = n.arg;
                        push(s, StatementType::Size);
                    } else if constexpr (std::is_same_v<T, SendStmt>) {
                        require_init(s.line);
                        push(s, StatementType::Send);
                    } else if constexpr (std::is_same_v<T, RecvStmt>) {
                        require_init(s.line);
                        push(s, StatementType::Recv);
                    } else if constexpr (std::is_same_v<T, FinalizeStmt>) {
                        push(s, StatementType::Finalize);
                    } else {
                        push(s, StatementType::End);
                    }
                },
                s.node);
        }
    }

    void if_stmt(const Stmt &s, const IfStmt &ifs, bool top_level)
    {
        std::optional<int> process = process_section(s, ifs);
        if (process) {
            if (!top_level)
                throw ClassifyError(ClassifyError::Code::NestedProcessSection, s.line, {});
            if (ifs.else_body)
                throw ClassifyError(ClassifyError::Code::ProcessSectionElse, ifs.else_line, {});
            if (!sections_.insert(*process).second)
                throw ClassifyError(ClassifyError::Code::DuplicateProcessSection, s.line,
                                    "process " + std::to_string(*process));
            push(s, StatementType::ParallelIf, process);
        } else {
            push(s, StatementType::OrdinaryIf);
        }

        walk(ifs.then_body, false);
        if (ifs.else_body) {
            marker(ifs.else_line, StatementType::Else);
            walk(*ifs.else_body, false);
        }
        marker(ifs.endif_line, StatementType::EndIf);
    }
};

} // namespace

ClassifiedProgram classify_statements(const Ast &ast) { return Classifier().run(ast); }

} // namespace mpiflow
