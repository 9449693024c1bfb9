#include "mpiflow/frontend.hpp"

#include <array>
#include <charconv>
#include <climits>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mpiflow {

// ---------------------------------------------------------------------------
// Source

SourceProgram SourceProgram::from_text(std::string_view text, std::string path)
{
    SourceProgram src;
    src.path = std::move(path);

    if (text.substr(0, 3) == "\xEF\xBB\xBF")
        text.remove_prefix(3);

    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos)
            end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        src.lines.emplace_back(line);
        start = end + 1;
    }
    return src;
}

SourceProgram SourceProgram::load(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad())
        throw std::runtime_error("cannot read " + path.string());
    return from_text(buf.str(), path.string());
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

constexpr std::array kKeywords = {
    "if",   "then", "else", "endif", "send",          "recv",          "to",
    "from", "any",  "tag",  "end",   "mpi_init",      "mpi_comm_rank", "mpi_comm_size",
    "mpi_finalize",
};

bool is_keyword(std::string_view word)
{
    for (std::string_view k : kKeywords)
        if (k == word)
            return true;
    return false;
}

bool ident_start(char c)
{
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

} // namespace

std::vector<Token> tokenize(const SourceProgram &source)
{
    std::vector<Token> out;
    for (std::size_t idx = 0; idx < source.lines.size(); ++idx) {
        const std::string &text = source.lines[idx];
        const Line line = static_cast<Line>(idx + 1);
        std::size_t i = 0;
        while (i < text.size()) {
            char c = text[i];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
                ++i;
            } else if (c == '#') {
                break;
            } else if (ident_start(c)) {
                std::size_t j = i + 1;
                while (j < text.size() && (ident_start(text[j]) || is_digit(text[j])))
                    ++j;
                std::string word = text.substr(i, j - i);
                TokenKind kind = is_keyword(word) ? TokenKind::Keyword : TokenKind::Identifier;
                out.push_back({kind, std::move(word), line});
                i = j;
            } else if (is_digit(c)) {
                std::size_t j = i + 1;
                while (j < text.size() && is_digit(text[j]))
                    ++j;
                out.push_back({TokenKind::Integer, text.substr(i, j - i), line});
                i = j;
            } else if (c == '(' || c == ')') {
                out.push_back({TokenKind::Punctuation, std::string(1, c), line});
                ++i;
            } else if (c == '=' || c == '!' || c == '<' || c == '>') {
                bool two = i + 1 < text.size() && text[i + 1] == '=';
                if (c == '!' && !two)
                    throw LexError(line, c);
                out.push_back({TokenKind::Operator, text.substr(i, two ? 2 : 1), line});
                i += two ? 2 : 1;
            } else if (c == '+' || c == '-' || c == '*' || c == '/') {
                out.push_back({TokenKind::Operator, std::string(1, c), line});
                ++i;
            } else {
                throw LexError(line, c);
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// AST helpers

Expr Expr::integer(std::int64_t v, Line line)
{
    Expr e;
    e.kind = Kind::Integer;
    e.value = v;
    e.line = line;
    return e;
}

Expr Expr::variable(std::string name, Line line)
{
    Expr e;
    e.kind = Kind::Variable;
    e.name = std::move(name);
    e.line = line;
    return e;
}

Expr Expr::binary(char op, Expr lhs, Expr rhs)
{
    Expr e;
    e.kind = Kind::Binary;
    e.op = op;
    e.line = lhs.line;
    e.operands.push_back(std::move(lhs));
    e.operands.push_back(std::move(rhs));
    return e;
}

std::string_view to_string(RelOp op)
{
    switch (op) {
    case RelOp::Eq: return "==";
    case RelOp::Ne: return "!=";
    case RelOp::Lt: return "<";
    case RelOp::Le: return "<=";
    case RelOp::Gt: return ">";
    case RelOp::Ge: return ">=";
    }
    return "?";
}

void collect_identifiers(const Expr &expr, std::vector<std::string> &out)
{
    switch (expr.kind) {
    case Expr::Kind::Integer:
        break;
    case Expr::Kind::Variable:
        out.push_back(expr.name);
        break;
    case Expr::Kind::Binary:
        for (const Expr &operand : expr.operands)
            collect_identifiers(operand, out);
        break;
    }
}

std::size_t count_statements(const std::vector<Stmt> &stmts)
{
    std::size_t n = 0;
    for (const Stmt &s : stmts) {
        ++n;
        if (const auto *ifs = s.as<IfStmt>()) {
            n += count_statements(ifs->then_body);
            if (ifs->else_body)
                n += count_statements(*ifs->else_body);
        }
    }
    return n;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
public:
    explicit Parser(const std::vector<Token> &tokens) : tokens_(tokens) {}

    Ast program()
    {
        Ast ast;
        ast.statements = statements();
        if (!done()) // stray else / endif
            throw ParseError(peek().line, "statement", describe(peek()));
        return ast;
    }

private:
    const std::vector<Token> &tokens_;
    std::size_t pos_ = 0;

    bool done() const { return pos_ >= tokens_.size(); }
    const Token &peek() const { return tokens_[pos_]; }

    Line current_line() const
    {
        if (!done())
            return peek().line;
        return tokens_.empty() ? 1 : tokens_.back().line;
    }

    static std::string describe(const Token &t) { return "'" + t.lexeme + "'"; }

    std::string found_at(Line line) const
    {
        if (done())
            return "end of input";
        if (peek().line != line)
            return "end of line";
        return describe(peek());
    }

    bool at_keyword(std::string_view kw) const
    {
        return !done() && peek().kind == TokenKind::Keyword && peek().lexeme == kw;
    }

    // Token on the statement's own line, or nothing.
    bool on_line(Line line) const { return !done() && peek().line == line; }

    const Token &expect(Line line, TokenKind kind, std::string_view lexeme,
                        std::string_view what)
    {
        if (!on_line(line) || peek().kind != kind || (!lexeme.empty() && peek().lexeme != lexeme))
            throw ParseError(line, std::string(what), found_at(line));
        return tokens_[pos_++];
    }

    void expect_keyword(Line line, std::string_view kw)
    {
        expect(line, TokenKind::Keyword, kw, "'" + std::string(kw) + "'");
    }

    std::string expect_identifier(Line line)
    {
        return expect(line, TokenKind::Identifier, "", "identifier").lexeme;
    }

    void expect_line_end(Line line)
    {
        if (on_line(line))
            throw ParseError(line, "end of line", describe(peek()));
    }

    static std::int64_t to_int64(const Token &t)
    {
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(t.lexeme.data(), t.lexeme.data() + t.lexeme.size(), v);
        if (ec != std::errc() || ptr != t.lexeme.data() + t.lexeme.size())
            throw ParseError(t.line, "integer literal in range", describe(t));
        return v;
    }

    int expect_small_int(Line line, std::string_view what)
    {
        const Token &t = expect(line, TokenKind::Integer, "", what);
        std::int64_t v = to_int64(t);
        if (v > INT_MAX)
            throw ParseError(line, std::string(what) + " in range", describe(t));
        return static_cast<int>(v);
    }

    std::vector<Stmt> statements()
    {
        std::vector<Stmt> out;
        while (!done() && !at_keyword("else") && !at_keyword("endif"))
            out.push_back(statement());
        return out;
    }

    Stmt statement()
    {
        const Token &t = peek();
        const Line line = t.line;
        Stmt stmt;
        stmt.line = line;

        if (t.kind == TokenKind::Identifier) {
            ++pos_;
            expect(line, TokenKind::Operator, "=", "'='");
            stmt.node = AssignStmt{t.lexeme, expr(line)};
        } else if (t.kind != TokenKind::Keyword) {
            throw ParseError(line, "statement", describe(t));
        } else if (t.lexeme == "if") {
            ++pos_;
            stmt.node = if_rest(line);
            return stmt; // if_rest consumed the endif line
        } else if (t.lexeme == "mpi_init") {
            ++pos_;
            stmt.node = InitStmt{};
        } else if (t.lexeme == "mpi_finalize") {
            ++pos_;
            stmt.node = FinalizeStmt{};
        } else if (t.lexeme == "end") {
            ++pos_;
            stmt.node = EndStmt{};
        } else if (t.lexeme == "mpi_comm_rank" || t.lexeme == "mpi_comm_size") {
            bool rank = t.lexeme == "mpi_comm_rank";
            ++pos_;
            expect(line, TokenKind::Punctuation, "(", "'('");
            std::string arg = expect_identifier(line);
            expect(line, TokenKind::Punctuation, ")", "')'");
            if (rank)
                stmt.node = RankStmt{std::move(arg)};
            else
                stmt.node = SizeStmt{std::move(arg)};
        } else if (t.lexeme == "send") {
            ++pos_;
            SendStmt s;
            s.var = expect_identifier(line);
            expect_keyword(line, "to");
            s.dest = expect_small_int(line, "process id");
            s.tag = optional_tag(line);
            stmt.node = std::move(s);
        } else if (t.lexeme == "recv") {
            ++pos_;
            RecvStmt r;
            r.var = expect_identifier(line);
            expect_keyword(line, "from");
            if (at_keyword("any") && on_line(line))
                ++pos_;
            else
                r.source = expect_small_int(line, "process id or 'any'");
            r.tag = optional_tag(line);
            stmt.node = std::move(r);
        } else {
            throw ParseError(line, "statement", describe(t));
        }

        expect_line_end(line);
        return stmt;
    }

    std::optional<int> optional_tag(Line line)
    {
        if (!(on_line(line) && at_keyword("tag")))
            return std::nullopt;
        ++pos_;
        return expect_small_int(line, "tag");
    }

    IfStmt if_rest(Line line)
    {
        IfStmt ifs;
        ifs.cond.lhs = expr(line);
        ifs.cond.op = relop(line);
        ifs.cond.rhs = expr(line);
        expect_keyword(line, "then");
        expect_line_end(line);

        ifs.then_body = statements();
        if (done())
            throw UnbalancedIf(line);
        if (at_keyword("else")) {
            ifs.else_line = peek().line;
            ++pos_;
            expect_line_end(ifs.else_line);
            ifs.else_body = statements();
            if (done())
                throw UnbalancedIf(line);
            if (at_keyword("else"))
                throw ParseError(peek().line, "'endif'", "'else'");
        }
        // at "endif"
        ifs.endif_line = peek().line;
        ++pos_;
        expect_line_end(ifs.endif_line);
        return ifs;
    }

    RelOp relop(Line line)
    {
        if (on_line(line) && peek().kind == TokenKind::Operator) {
            const std::string &op = peek().lexeme;
            std::optional<RelOp> r;
            if (op == "==") r = RelOp::Eq;
            else if (op == "!=") r = RelOp::Ne;
            else if (op == "<") r = RelOp::Lt;
            else if (op == "<=") r = RelOp::Le;
            else if (op == ">") r = RelOp::Gt;
            else if (op == ">=") r = RelOp::Ge;
            if (r) {
                ++pos_;
                return *r;
            }
        }
        throw ParseError(line, "comparison operator", found_at(line));
    }

    bool at_operator(Line line, char a, char b) const
    {
        return on_line(line) && peek().kind == TokenKind::Operator && peek().lexeme.size() == 1 &&
               (peek().lexeme[0] == a || peek().lexeme[0] == b);
    }

    Expr expr(Line line)
    {
        Expr lhs = term(line);
        while (at_operator(line, '+', '-')) {
            char op = tokens_[pos_++].lexeme[0];
            lhs = Expr::binary(op, std::move(lhs), term(line));
        }
        return lhs;
    }

    Expr term(Line line)
    {
        Expr lhs = factor(line);
        while (at_operator(line, '*', '/')) {
            char op = tokens_[pos_++].lexeme[0];
            lhs = Expr::binary(op, std::move(lhs), factor(line));
        }
        return lhs;
    }

    Expr factor(Line line)
    {
        if (!on_line(line))
            throw ParseError(line, "expression", found_at(line));
        const Token &t = peek();
        if (t.kind == TokenKind::Identifier) {
            ++pos_;
            return Expr::variable(t.lexeme, t.line);
        }
        if (t.kind == TokenKind::Integer) {
            ++pos_;
            return Expr::integer(to_int64(t), t.line);
        }
        if (t.kind == TokenKind::Punctuation && t.lexeme == "(") {
            ++pos_;
            Expr inner = expr(line);
            expect(line, TokenKind::Punctuation, ")", "')'");
            return inner;
        }
        throw ParseError(line, "expression", describe(t));
    }
};

// --- printing

int precedence(char op) { return (op == '*' || op == '/') ? 2 : 1; }

void print_expr(std::ostream &os, const Expr &e)
{
    switch (e.kind) {
    case Expr::Kind::Integer:
        os << e.value;
        return;
    case Expr::Kind::Variable:
        os << e.name;
        return;
    case Expr::Kind::Binary:
        break;
    }
    const Expr &lhs = e.operands[0];
    const Expr &rhs = e.operands[1];
    const int prec = precedence(e.op);
    bool lparen = lhs.kind == Expr::Kind::Binary && precedence(lhs.op) < prec;
    // Left-associative grammar: a right operand of equal precedence needs parens.
    bool rparen = rhs.kind == Expr::Kind::Binary && precedence(rhs.op) <= prec;

    if (lparen) os << '(';
    print_expr(os, lhs);
    if (lparen) os << ')';
    os << ' ' << e.op << ' ';
    if (rparen) os << '(';
    print_expr(os, rhs);
    if (rparen) os << ')';
}

void print_stmts(std::ostream &os, const std::vector<Stmt> &stmts, int depth);

void print_stmt(std::ostream &os, const Stmt &s, int depth)
{
    const std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
    os << indent;
    std::visit(
        [&](const auto &n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, AssignStmt>) {
                os << n.target << " = ";
                print_expr(os, n.value);
                os << '\n';
            } else if constexpr (std::is_same_v<T, IfStmt>) {
                os << "if ";
                print_expr(os, n.cond.lhs);
                os << ' ' << to_string(n.cond.op) << ' ';
                print_expr(os, n.cond.rhs);
                os << " then\n";
                print_stmts(os, n.then_body, depth + 1);
                if (n.else_body) {
                    os << indent << "else\n";
                    print_stmts(os, *n.else_body, depth + 1);
                }
                os << indent << "endif\n";
            } else if constexpr (std::is_same_v<T, InitStmt>) {
                os << "mpi_init\n";
            } else if constexpr (std::is_same_v<T, RankStmt>) {
                os << "mpi_comm_rank(" << n.arg << ")\n";
            } else if constexpr (std::is_same_v<T, SizeStmt>) {
                os << "mpi_comm_size(" << n.arg << ")\n";
            } else if constexpr (std::is_same_v<T, SendStmt>) {
                os << "send " << n.var << " to " << n.dest;
                if (n.tag)
                    os << " tag " << *n.tag;
                os << '\n';
            } else if constexpr (std::is_same_v<T, RecvStmt>) {
                os << "recv " << n.var << " from ";
                if (n.source)
                    os << *n.source;
                else
                    os << "any";
                if (n.tag)
                    os << " tag " << *n.tag;
                os << '\n';
            } else if constexpr (std::is_same_v<T, FinalizeStmt>) {
                os << "mpi_finalize\n";
            } else {
                os << "end\n";
            }
        },
        s.node);
}

void print_stmts(std::ostream &os, const std::vector<Stmt> &stmts, int depth)
{
    for (const Stmt &s : stmts)
        print_stmt(os, s, depth);
}

bool same_expr(const Expr &a, const Expr &b)
{
    if (a.kind != b.kind)
        return false;
    switch (a.kind) {
    case Expr::Kind::Integer:
        return a.value == b.value;
    case Expr::Kind::Variable:
        return a.name == b.name;
    case Expr::Kind::Binary:
        return a.op == b.op && same_expr(a.operands[0], b.operands[0]) &&
               same_expr(a.operands[1], b.operands[1]);
    }
    return false;
}

bool same_stmts(const std::vector<Stmt> &a, const std::vector<Stmt> &b);

bool same_stmt(const Stmt &a, const Stmt &b)
{
    if (a.node.index() != b.node.index())
        return false;
    return std::visit(
        [&](const auto &x) -> bool {
            using T = std::decay_t<decltype(x)>;
            const T &y = std::get<T>(b.node);
            if constexpr (std::is_same_v<T, AssignStmt>) {
                return x.target == y.target && same_expr(x.value, y.value);
            } else if constexpr (std::is_same_v<T, IfStmt>) {
                if (x.cond.op != y.cond.op || !same_expr(x.cond.lhs, y.cond.lhs) ||
                    !same_expr(x.cond.rhs, y.cond.rhs) || !same_stmts(x.then_body, y.then_body) ||
                    x.else_body.has_value() != y.else_body.has_value())
                    return false;
                return !x.else_body || same_stmts(*x.else_body, *y.else_body);
            } else if constexpr (std::is_same_v<T, RankStmt> || std::is_same_v<T, SizeStmt>) {
                return x.arg == y.arg;
            } else if constexpr (std::is_same_v<T, SendStmt>) {
                return x.var == y.var && x.dest == y.dest && x.tag == y.tag;
            } else if constexpr (std::is_same_v<T, RecvStmt>) {
                return x.var == y.var && x.source == y.source && x.tag == y.tag;
            } else {
                return true;
            }
        },
        a.node);
}

bool same_stmts(const std::vector<Stmt> &a, const std::vector<Stmt> &b)
{
    if (a.size() != b.size())
        return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!same_stmt(a[i], b[i]))
            return false;
    return true;
}

} // namespace

Ast parse(const std::vector<Token> &tokens) { return Parser(tokens).program(); }

std::string print(const Ast &ast)
{
    std::ostringstream os;
    print_stmts(os, ast.statements, 0);
    return os.str();
}

std::string print(const Expr &expr)
{
    std::ostringstream os;
    print_expr(os, expr);
    return os.str();
}

bool same_structure(const Ast &a, const Ast &b) { return same_stmts(a.statements, b.statements); }

} // namespace mpiflow
