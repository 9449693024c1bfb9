#include "mpiflow/dataflow.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace mpiflow {

namespace {

void unique_identifiers(const Expr &e, std::vector<std::string> &out)
{
    std::vector<std::string> ids;
    collect_identifiers(e, ids);
    for (auto &id : ids)
        if (std::find(out.begin(), out.end(), id) == out.end())
            out.push_back(std::move(id));
}

} // namespace

std::vector<Occurrence> collect_occurrences(const MpiCfg &cfg)
{
    std::vector<Occurrence> occ;
    for (const BasicBlock &b : cfg.blocks) {
        for (const BlockStmt &bs : b.stmts) {
            auto add = [&](const std::string &var, OccurrenceKind kind) {
                occ.push_back({var, bs.line, b.id, kind, std::nullopt});
            };

            if (const auto *a = bs.stmt.as<AssignStmt>()) {
                std::vector<std::string> uses;
                unique_identifiers(a->value, uses);
                for (const auto &v : uses)
                    add(v, OccurrenceKind::CUse);
                add(a->target, OccurrenceKind::Def);
            } else if (const auto *ifs = bs.stmt.as<IfStmt>()) {
                std::vector<std::string> uses;
                unique_identifiers(ifs->cond.lhs, uses);
                unique_identifiers(ifs->cond.rhs, uses);
                for (std::size_t e : cfg.out_edges(b.id)) {
                    if (!cfg.edges[e].branch)
                        continue;
                    for (const auto &v : uses)
                        occ.push_back({v, bs.line, b.id, OccurrenceKind::PUse, e});
                }
            } else if (const auto *s = bs.stmt.as<SendStmt>()) {
                add(s->var, OccurrenceKind::CUse);
            } else if (const auto *r = bs.stmt.as<RecvStmt>()) {
                add(r->var, OccurrenceKind::Def);
            } else if (const auto *rk = bs.stmt.as<RankStmt>()) {
                add(rk->arg, OccurrenceKind::Def);
            } else if (const auto *sz = bs.stmt.as<SizeStmt>()) {
                add(sz->arg, OccurrenceKind::Def);
            }
        }
    }
    return occ;
}

std::vector<Definition> definitions_of(const MpiCfg &cfg, const std::vector<Occurrence> &occ)
{
    std::vector<Definition> defs;
    for (const Occurrence &o : occ)
        if (o.kind == OccurrenceKind::Def)
            defs.push_back({o.var, o.line, o.block, cfg.block(o.block).section});
    return defs;
}

ReachAvail compute_reach_avail(const MpiCfg &cfg, const std::vector<Occurrence> &occ,
                               std::span<const BlockId> order)
{
    ReachAvail ra;
    ra.definitions = definitions_of(cfg, occ);
    const std::size_t n = cfg.blocks.size();
    ra.reach.assign(n, {});
    ra.avail.assign(n, {});

    // gen: last definition of each variable in the block; kill: variables defined.
    std::vector<std::map<std::string, DefIndex>> gen(n);
    for (DefIndex d = 0; d < ra.definitions.size(); ++d) {
        const Definition &def = ra.definitions[d];
        auto &slot = gen[def.block];
        auto it = slot.find(def.var);
        if (it == slot.end() || ra.definitions[it->second].line < def.line)
            slot[def.var] = d;
    }

    std::vector<std::vector<std::size_t>> incoming(n);
    for (std::size_t e = 0; e < cfg.edges.size(); ++e)
        incoming[cfg.edges[e].to].push_back(e);

    std::vector<BlockId> visit(order.begin(), order.end());
    if (visit.empty()) {
        visit.resize(n);
        std::iota(visit.begin(), visit.end(), BlockId{0});
    }

    for (;;) {
        bool changed = false;
        for (BlockId b : visit) {
            DefSet reach;
            for (std::size_t e : incoming[b]) {
                const Edge &edge = cfg.edges[e];
                if (edge.kind == EdgeKind::Synchronization)
                    continue;
                for (DefIndex d : ra.avail[edge.from])
                    if (edge.kind != EdgeKind::ParallelFanOut || ra.definitions[d].global())
                        reach.insert(d);
            }

            DefSet avail;
            for (const auto &[var, d] : gen[b])
                avail.insert(d);
            for (DefIndex d : reach)
                if (!gen[b].count(ra.definitions[d].var))
                    avail.insert(d);

            if (reach != ra.reach[b] || avail != ra.avail[b]) {
                ra.reach[b] = std::move(reach);
                ra.avail[b] = std::move(avail);
                changed = true;
            }
        }
        if (!changed)
            break;
        ++ra.stats.iterations;
        std::size_t total = 0;
        for (std::size_t b = 0; b < n; ++b)
            total += ra.reach[b].size() + ra.avail[b].size();
        ra.stats.total_cardinality.push_back(total);
    }
    return ra;
}

std::optional<DefIndex> DefUseReport::find(const std::string &var, Line line) const
{
    for (DefIndex d = 0; d < definitions.size(); ++d)
        if (definitions[d].var == var && definitions[d].line == line)
            return d;
    return std::nullopt;
}

DefUseReport compute_def_use(const MpiCfg &cfg, const std::vector<Occurrence> &occ,
                             const ReachAvail &ra)
{
    DefUseReport rep;
    rep.definitions = ra.definitions;
    rep.dcu.assign(cfg.blocks.size(), {});
    rep.affected.assign(rep.definitions.size(), {});

    for (const Occurrence &o : occ) {
        if (o.kind == OccurrenceKind::CUse) {
            // An earlier definition in the same block shadows everything reaching it.
            std::optional<DefIndex> local;
            for (DefIndex d = 0; d < rep.definitions.size(); ++d) {
                const Definition &def = rep.definitions[d];
                if (def.block == o.block && def.var == o.var && def.line < o.line &&
                    (!local || rep.definitions[*local].line < def.line))
                    local = d;
            }
            if (local) {
                rep.dcu[o.block].insert({*local, o.line});
            } else {
                for (DefIndex d : ra.reach[o.block])
                    if (rep.definitions[d].var == o.var)
                        rep.dcu[o.block].insert({d, o.line});
            }
        } else if (o.kind == OccurrenceKind::PUse) {
            auto &slot = rep.dpu[*o.edge];
            for (DefIndex d : ra.avail[o.block])
                if (rep.definitions[d].var == o.var)
                    slot.insert({d, o.line});
        }
    }

    for (const Edge &e : cfg.edges) {
        if (e.kind != EdgeKind::Synchronization)
            continue;
        for (const auto &[d, use_line] : rep.dcu[e.from])
            if (use_line == e.sync->send_line && rep.definitions[d].var == e.sync->var)
                rep.comm_pairs.insert({d, e.sync->recv_line});
    }

    for (const auto &pairs : rep.dcu)
        for (const auto &[d, line] : pairs)
            rep.affected[d].insert(line);
    for (const auto &[edge, pairs] : rep.dpu)
        for (const auto &[d, line] : pairs)
            rep.affected[d].insert(line);
    for (const auto &[d, line] : rep.comm_pairs)
        rep.affected[d].insert(line);
    return rep;
}

std::vector<Line> affected_statements(const DefUseReport &report, const std::string &var,
                                      Line line)
{
    auto d = report.find(var, line);
    if (!d)
        throw UnknownDefinition(var, line);
    const auto &lines = report.affected[*d];
    return {lines.begin(), lines.end()};
}

std::string render_def_use(const DefUseReport &report)
{
    std::vector<DefIndex> order(report.definitions.size());
    std::iota(order.begin(), order.end(), DefIndex{0});
    std::sort(order.begin(), order.end(), [&](DefIndex a, DefIndex b) {
        const auto &da = report.definitions[a];
        const auto &db = report.definitions[b];
        return std::tie(da.line, da.var) < std::tie(db.line, db.var);
    });

    std::ostringstream os;
    for (DefIndex d : order) {
        const auto &def = report.definitions[d];
        os << "def " << def.var << '@' << def.line << " -> {";
        bool first = true;
        for (Line l : report.affected[d]) {
            os << (first ? "" : ", ") << l;
            first = false;
        }
        os << "}\n";
    }
    return os.str();
}

DefUseAnalysis analyze_def_use(const MpiCfg &cfg)
{
    DefUseAnalysis a;
    a.occurrences = collect_occurrences(cfg);
    a.reach_avail = compute_reach_avail(cfg, a.occurrences);
    a.report = compute_def_use(cfg, a.occurrences, a.reach_avail);
    return a;
}

} // namespace mpiflow
