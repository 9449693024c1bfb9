#include "mpiflow/cfg.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace mpiflow {

std::string_view to_string(BlockKind kind)
{
    switch (kind) {
    case BlockKind::Entry: return "Entry";
    case BlockKind::Exit: return "Exit";
    case BlockKind::Ordinary: return "Ordinary";
    case BlockKind::Recv: return "RecvBlock";
    case BlockKind::Send: return "SendBlock";
    case BlockKind::Finalize: return "FinalizeBlock";
    }
    return "?";
}

std::string_view to_string(EdgeKind kind)
{
    switch (kind) {
    case EdgeKind::Sequential: return "sequential";
    case EdgeKind::ParallelFanOut: return "fan-out";
    case EdgeKind::ParallelFanIn: return "fan-in";
    case EdgeKind::Synchronization: return "synchronization";
    }
    return "?";
}

std::string_view to_string(Branch branch) { return branch == Branch::Then ? "then" : "else"; }

std::vector<std::size_t> MpiCfg::out_edges(BlockId id) const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < edges.size(); ++i)
        if (edges[i].from == id)
            out.push_back(i);
    return out;
}

std::vector<std::size_t> MpiCfg::in_edges(BlockId id) const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < edges.size(); ++i)
        if (edges[i].to == id)
            out.push_back(i);
    return out;
}

// ---------------------------------------------------------------------------
// Phase 2: basic blocks

namespace {

class BlockBuilder {
public:
    BlockedProgram run(const ClassifiedProgram &cp)
    {
        out_.special_id = cp.special_id;
        start(BlockKind::Entry);
        close();

        for (const ClassifiedStmt &cs : cp.stmts)
            place(cs);

        close();
        start(BlockKind::Exit);
        return std::move(out_);
    }

private:
    BlockedProgram out_;
    Section section_;
    std::vector<bool> if_is_parallel_;
    std::optional<BlockId> open_;          // ordinary block accepting statements
    std::optional<BlockId> finalize_open_; // finalize block accepting trailing `end`

    BasicBlock &start(BlockKind kind)
    {
        BasicBlock b;
        b.id = out_.blocks.size();
        b.kind = kind;
        b.section = section_;
        out_.blocks.push_back(std::move(b));
        return out_.blocks.back();
    }

    void close()
    {
        open_.reset();
        finalize_open_.reset();
    }

    void append(BasicBlock &b, const ClassifiedStmt &cs)
    {
        b.stmts.push_back({cs.line, cs.type, *cs.stmt});
        out_.listing.push_back({cs.line, cs.type, b.id, std::nullopt});
    }

    void marker(const ClassifiedStmt &cs)
    {
        out_.listing.push_back({cs.line, cs.type, std::nullopt, cs.process});
    }

    void append_ordinary(const ClassifiedStmt &cs)
    {
        finalize_open_.reset();
        if (!open_)
            open_ = start(BlockKind::Ordinary).id;
        append(out_.blocks[*open_], cs);
    }

    void place(const ClassifiedStmt &cs)
    {
        switch (cs.type) {
        case StatementType::ParallelIf:
            close();
            section_ = cs.process;
            if_is_parallel_.push_back(true);
            marker(cs);
            break;
        case StatementType::OrdinaryIf:
            append_ordinary(cs);
            close();
            if_is_parallel_.push_back(false);
            break;
        case StatementType::Else:
            close();
            marker(cs);
            break;
        case StatementType::EndIf:
            close();
            if (!if_is_parallel_.empty()) {
                if (if_is_parallel_.back())
                    section_.reset();
                if_is_parallel_.pop_back();
            }
            marker(cs);
            break;
        case StatementType::Recv:
            close();
            append(start(BlockKind::Recv), cs);
            break;
        case StatementType::Send:
            if (open_) {
                BasicBlock &b = out_.blocks[*open_];
                b.kind = BlockKind::Send;
                append(b, cs);
            } else {
                finalize_open_.reset();
                append(start(BlockKind::Send), cs);
            }
            close();
            break;
        case StatementType::Finalize:
            close();
            finalize_open_ = start(BlockKind::Finalize).id;
            append(out_.blocks[*finalize_open_], cs);
            break;
        case StatementType::End:
            if (finalize_open_)
                append(out_.blocks[*finalize_open_], cs);
            else
                append_ordinary(cs);
            break;
        case StatementType::Assign:
        case StatementType::Init:
        case StatementType::Rank:
        case StatementType::Size:
            append_ordinary(cs);
            break;
        }
    }
};

// ---------------------------------------------------------------------------
// Phase 3: sequential and parallel edges

struct Pending {
    BlockId from;
    EdgeKind kind;
    std::optional<Branch> branch;
};

class EdgeBuilder {
public:
    explicit EdgeBuilder(const BlockedProgram &bp) : bp_(bp) {}

    MpiCfg run()
    {
        cfg_.blocks = bp_.blocks;
        cfg_.special_id = bp_.special_id;

        frontier_ = {{cfg_.entry(), EdgeKind::Sequential, std::nullopt}};
        const auto &listing = bp_.listing;
        for (std::size_t i = 0; i < listing.size(); ++i) {
            const ListedStmt &ls = listing[i];
            const bool next_is_section =
                i + 1 < listing.size() && listing[i + 1].type == StatementType::ParallelIf;
            if (ls.block)
                statement(ls);
            else
                structural(ls, next_is_section);
        }
        connect(cfg_.exit());

        bool has_finalize = std::any_of(cfg_.blocks.begin(), cfg_.blocks.end(), [](const auto &b) {
            return b.kind == BlockKind::Finalize;
        });
        if (!cfg_.sections.empty() && !has_finalize) {
            Line last = listing.empty() ? 0 : listing.back().line;
            cfg_.diagnostics.push_back(
                {Level::Warning, last, "missing mpi_finalize; process sections join at exit"});
        }
        return std::move(cfg_);
    }

private:
    struct IfFrame {
        bool parallel = false;
        BlockId cond = 0;
        bool has_else = false;
        std::vector<Pending> then_exits;
        std::size_t section_index = 0;
    };

    const BlockedProgram &bp_;
    MpiCfg cfg_;
    std::vector<Pending> frontier_;
    std::optional<BlockId> current_;
    std::vector<IfFrame> frames_;

    bool in_group_ = false;
    std::vector<Pending> group_origin_;
    std::vector<Pending> group_exits_;

    void add_edge(Edge e)
    {
        if (std::find(cfg_.edges.begin(), cfg_.edges.end(), e) == cfg_.edges.end())
            cfg_.edges.push_back(std::move(e));
    }

    void connect(BlockId to)
    {
        for (const Pending &p : frontier_)
            add_edge({p.from, to, p.kind, std::nullopt, p.branch});
        frontier_.clear();
    }

    void statement(const ListedStmt &ls)
    {
        const BlockId b = *ls.block;
        if (current_ != b) {
            connect(b);
            current_ = b;
        }
        frontier_ = {{b, EdgeKind::Sequential, std::nullopt}};
        if (ls.type == StatementType::OrdinaryIf) {
            frontier_ = {{b, EdgeKind::Sequential, Branch::Then}};
            IfFrame f;
            f.cond = b;
            frames_.push_back(std::move(f));
            current_.reset();
        }
    }

    void structural(const ListedStmt &ls, bool next_is_section)
    {
        current_.reset();
        switch (ls.type) {
        case StatementType::ParallelIf: {
            if (!in_group_) {
                in_group_ = true;
                group_origin_ = frontier_;
                group_exits_.clear();
            }
            frontier_.clear();
            for (Pending p : group_origin_) {
                p.kind = EdgeKind::ParallelFanOut;
                frontier_.push_back(p);
            }
            IfFrame f;
            f.parallel = true;
            f.section_index = cfg_.sections.size();
            cfg_.sections.push_back({ls.process.value_or(0), ls.line, 0});
            frames_.push_back(std::move(f));
            break;
        }
        case StatementType::Else: {
            IfFrame &f = frames_.back();
            f.has_else = true;
            f.then_exits = std::move(frontier_);
            frontier_ = {{f.cond, EdgeKind::Sequential, Branch::Else}};
            break;
        }
        case StatementType::EndIf: {
            IfFrame f = std::move(frames_.back());
            frames_.pop_back();
            if (f.parallel) {
                cfg_.sections[f.section_index].endif_line = ls.line;
                for (Pending p : frontier_) {
                    if (p.kind != EdgeKind::ParallelFanOut) // empty section keeps fan-out
                        p.kind = EdgeKind::ParallelFanIn;
                    group_exits_.push_back(p);
                }
                frontier_.clear();
                if (!next_is_section) {
                    in_group_ = false;
                    frontier_ = std::move(group_exits_);
                    group_exits_.clear();
                }
            } else if (f.has_else) {
                f.then_exits.insert(f.then_exits.end(), frontier_.begin(), frontier_.end());
                frontier_ = std::move(f.then_exits);
            } else {
                frontier_.push_back({f.cond, EdgeKind::Sequential, Branch::Else});
            }
            break;
        }
        default:
            break;
        }
    }
};

// ---------------------------------------------------------------------------
// Synchronization edges

struct CommSite {
    int section = 0;
    Partner peer; // dest for sends, source for recvs
    int tag = 0;
    Line line = 0;
    std::string var;
    BlockId block = 0;
};

} // namespace

BlockedProgram build_basic_blocks(const ClassifiedProgram &cp) { return BlockBuilder().run(cp); }

MpiCfg generate_edges(const BlockedProgram &bp) { return EdgeBuilder(bp).run(); }

MpiCfg match_synchronization(MpiCfg cfg)
{
    std::vector<CommSite> sends, recvs;
    for (const BasicBlock &b : cfg.blocks) {
        if (!b.section)
            continue;
        for (const BlockStmt &bs : b.stmts) {
            if (const auto *s = bs.stmt.as<SendStmt>())
                sends.push_back({*b.section, s->dest, s->tag.value_or(0), bs.line, s->var, b.id});
            else if (const auto *r = bs.stmt.as<RecvStmt>())
                recvs.push_back({*b.section, r->source, r->tag.value_or(0), bs.line, r->var, b.id});
        }
    }

    for (const SectionInfo &src : cfg.sections) {
        for (const SectionInfo &dst : cfg.sections) {
            if (src.process == dst.process)
                continue;
            // tag -> ordered sites
            std::map<int, std::vector<const CommSite *>> out, in;
            for (const CommSite &s : sends)
                if (s.section == src.process && s.peer == dst.process)
                    out[s.tag].push_back(&s);
            for (const CommSite &r : recvs)
                if (r.section == dst.process && (!r.peer || *r.peer == src.process))
                    in[r.tag].push_back(&r);

            for (const auto &[tag, ss] : out) {
                auto it = in.find(tag);
                if (it == in.end())
                    continue;
                const auto &rs = it->second;
                for (std::size_t k = 0; k < ss.size() && k < rs.size(); ++k) {
                    Edge e;
                    e.from = ss[k]->block;
                    e.to = rs[k]->block;
                    e.kind = EdgeKind::Synchronization;
                    e.sync = SyncInfo{ss[k]->var, ss[k]->line, rs[k]->line};
                    cfg.edges.push_back(std::move(e));
                }
            }
        }
    }
    return cfg;
}

MpiCfg build_cfg(const ClassifiedProgram &cp)
{
    return match_synchronization(generate_edges(build_basic_blocks(cp)));
}

CfgSummary summarize(const MpiCfg &cfg)
{
    CfgSummary s;
    s.blocks = cfg.blocks.size();
    for (const Edge &e : cfg.edges) {
        switch (e.kind) {
        case EdgeKind::Sequential: ++s.sequential; break;
        case EdgeKind::ParallelFanOut:
        case EdgeKind::ParallelFanIn: ++s.parallel; break;
        case EdgeKind::Synchronization: ++s.synchronization; break;
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// DOT

namespace {

std::string dot_escape(std::string_view s)
{
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\')
            out += '\\';
        out += c;
    }
    return out;
}

} // namespace

std::string emit_dot(const MpiCfg &cfg)
{
    std::ostringstream os;
    os << "digraph mpi_cfg {\n";
    os << "  node [shape=box];\n";
    for (const BasicBlock &b : cfg.blocks) {
        os << "  B" << b.id << " [label=\"B" << b.id << "\\n" << to_string(b.kind) << "\\n";
        if (b.stmts.empty())
            os << '-';
        else
            os << b.stmts.front().line << ".." << b.stmts.back().line;
        os << "\"];\n";
    }
    for (const Edge &e : cfg.edges) {
        os << "  B" << e.from << " -> B" << e.to << " [style=";
        switch (e.kind) {
        case EdgeKind::Sequential: os << "solid"; break;
        case EdgeKind::ParallelFanOut:
        case EdgeKind::ParallelFanIn: os << "dashed"; break;
        case EdgeKind::Synchronization: os << "dotted"; break;
        }
        if (e.sync)
            os << ", label=\"" << dot_escape(e.sync->var) << '"';
        else if (e.branch)
            os << ", label=\"" << to_string(*e.branch) << '"';
        os << "];\n";
    }
    os << "}\n";
    return os.str();
}

} // namespace mpiflow
