#pragma once

// Lexer and recursive-descent parser for the `.mmpi` mini-language:
//
//   program   ::= { stmt NEWLINE } ;
//   stmt      ::= assign | ifstmt | "mpi_init" | "mpi_comm_rank" "(" IDENT ")"
//               | "mpi_comm_size" "(" IDENT ")" | send | recv | "mpi_finalize" | "end" ;
//   assign    ::= IDENT "=" expr ;
//   ifstmt    ::= "if" expr RELOP expr "then" NEWLINE { stmt NEWLINE }
//                 [ "else" NEWLINE { stmt NEWLINE } ] "endif" ;
//   send      ::= "send" IDENT "to" INT [ "tag" INT ] ;
//   recv      ::= "recv" IDENT "from" ( INT | "any" ) [ "tag" INT ] ;
//   expr      ::= term { ("+"|"-") term } ;  term ::= factor { ("*"|"/") factor } ;
//   factor    ::= IDENT | INT | "(" expr ")" ;
//
// NEWLINE is implicit: a statement must end where its source line ends.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mpiflow/error.hpp"

namespace mpiflow {

struct SourceProgram {
    std::string path;
    std::vector<std::string> lines; // lines[0] is line 1

    static SourceProgram from_text(std::string_view text, std::string path = {});
    // Throws std::runtime_error when the file cannot be read.
    static SourceProgram load(const std::filesystem::path &path);
};

enum class TokenKind { Keyword, Identifier, Integer, Operator, Punctuation };

struct Token {
    TokenKind kind;
    std::string lexeme;
    Line line;

    friend bool operator==(const Token &, const Token &) = default;
};

std::vector<Token> tokenize(const SourceProgram &source);

// ---------------------------------------------------------------------------
// AST

struct Expr {
    enum class Kind { Integer, Variable, Binary };

    Kind kind = Kind::Integer;
    std::int64_t value = 0;
    std::string name;
    char op = 0;                // one of + - * / for Binary
    std::vector<Expr> operands; // exactly two for Binary
    Line line = 0;

    static Expr integer(std::int64_t v, Line line);
    static Expr variable(std::string name, Line line);
    static Expr binary(char op, Expr lhs, Expr rhs);
};

enum class RelOp { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view to_string(RelOp op);

struct Comparison {
    Expr lhs;
    RelOp op = RelOp::Eq;
    Expr rhs;
};

/// Statically known process id; `std::nullopt` stands for `any`.
using Partner = std::optional<int>;

struct Stmt;

struct AssignStmt {
    std::string target;
    Expr value;
};
struct IfStmt {
    Comparison cond;
    std::vector<Stmt> then_body;
    std::optional<std::vector<Stmt>> else_body;
    Line else_line = 0;
    Line endif_line = 0;
};
struct InitStmt {};
struct RankStmt {
    std::string arg;
};
struct SizeStmt {
    std::string arg;
};
struct SendStmt {
    std::string var;
    int dest = 0;
    std::optional<int> tag;
};
struct RecvStmt {
    std::string var;
    Partner source;
    std::optional<int> tag;
};
struct FinalizeStmt {};
struct EndStmt {};

struct Stmt {
    using Node = std::variant<AssignStmt, IfStmt, InitStmt, RankStmt, SizeStmt,
                              SendStmt, RecvStmt, FinalizeStmt, EndStmt>;
    Node node;
    Line line = 0;

    template <typename T> const T *as() const { return std::get_if<T>(&node); }
};

struct Ast {
    std::vector<Stmt> statements;
};

Ast parse(const std::vector<Token> &tokens);

inline Ast parse(const SourceProgram &source) { return parse(tokenize(source)); }

/// Renders the AST back to source, one statement per line, two-space indent.
std::string print(const Ast &ast);
std::string print(const Expr &expr);

/// Structural equality ignoring line numbers.
bool same_structure(const Ast &a, const Ast &b);

/// Number of statements counting nested if-bodies (else/endif are not statements).
std::size_t count_statements(const std::vector<Stmt> &stmts);

/// Identifiers mentioned in `expr`, in left-to-right order (duplicates kept).
void collect_identifiers(const Expr &expr, std::vector<std::string> &out);

} // namespace mpiflow
