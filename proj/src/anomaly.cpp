#include "mpiflow/anomaly.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

namespace mpiflow {

Line line_of(const CommRecord &r)
{
    return std::visit([](const auto &x) { return x.line; }, r);
}

int process_of(const CommRecord &r)
{
    return std::visit([](const auto &x) { return x.process; }, r);
}

CommRecords extract_records(const MpiCfg &cfg)
{
    struct Site {
        Line line;
        const BasicBlock *block;
        const BlockStmt *stmt;
    };
    std::vector<Site> sites;
    for (const BasicBlock &b : cfg.blocks)
        for (const BlockStmt &bs : b.stmts)
            if (bs.type == StatementType::Send || bs.type == StatementType::Recv)
                sites.push_back({bs.line, &b, &bs});
    std::sort(sites.begin(), sites.end(),
              [](const Site &a, const Site &b) { return a.line < b.line; });

    CommRecords out;
    for (const Site &site : sites) {
        if (!site.block->section)
            throw CommOutsideSection(site.line);
        const int p = *site.block->section;
        if (const auto *s = site.stmt->stmt.as<SendStmt>())
            out.sends.push_back({p, site.line, s->var, s->dest, s->tag.value_or(0)});
        else if (const auto *r = site.stmt->stmt.as<RecvStmt>())
            out.waits.push_back({p, site.line, r->var, r->source, r->tag.value_or(0)});
    }
    return out;
}

std::string format_record(const WaitRecord &w)
{
    std::ostringstream os;
    os << "W process=" << w.process << " line=" << w.line << " var=" << w.var << " from=";
    if (w.partner)
        os << *w.partner;
    else
        os << "any";
    os << " tag=" << w.tag;
    return os.str();
}

std::string format_record(const SendRecord &s)
{
    std::ostringstream os;
    os << "S process=" << s.process << " line=" << s.line << " var=" << s.var << " to=" << s.dest
       << " tag=" << s.tag;
    return os.str();
}

std::string format_waits(const std::vector<WaitRecord> &waits)
{
    std::string out;
    for (const auto &w : waits)
        out += format_record(w) + '\n';
    return out;
}

std::string format_sends(const std::vector<SendRecord> &sends)
{
    std::string out;
    for (const auto &s : sends)
        out += format_record(s) + '\n';
    return out;
}

bool matches(const WaitRecord &w, const SendRecord &s)
{
    return s.dest == w.process && (!w.partner || *w.partner == s.process) && s.tag == w.tag;
}

MatchTable match_records(std::vector<WaitRecord> waits, std::vector<SendRecord> sends)
{
    MatchTable t;
    t.waits = std::move(waits);
    t.sends = std::move(sends);
    t.wait_candidates.resize(t.waits.size());
    t.send_candidates.resize(t.sends.size());
    for (std::size_t w = 0; w < t.waits.size(); ++w) {
        for (std::size_t s = 0; s < t.sends.size(); ++s) {
            if (matches(t.waits[w], t.sends[s])) {
                t.wait_candidates[w].push_back(s);
                t.send_candidates[s].push_back(w);
            }
        }
    }
    return t;
}

std::string_view to_string(AnomalyKind kind)
{
    switch (kind) {
    case AnomalyKind::SelfWait: return "self_wait";
    case AnomalyKind::Deadlock: return "deadlock";
    case AnomalyKind::Nondeterminacy: return "nondeterminacy";
    case AnomalyKind::UnmatchedSend: return "unmatched_send";
    }
    return "?";
}

namespace {

std::string partner_text(const Partner &p)
{
    return p ? "process " + std::to_string(*p) : "any process";
}

bool is_self_wait(const WaitRecord &w) { return w.partner && *w.partner == w.process; }

// Waits that cannot complete because every candidate send sits behind another
// blocked wait of its own section. Returns strongly connected groups of >= 2.
std::vector<std::vector<std::size_t>> wait_cycles(const MatchTable &t)
{
    const std::size_t n = t.waits.size();

    // waits_before[s]: waits of the sender's section that precede send s.
    std::vector<std::vector<std::size_t>> waits_before(t.sends.size());
    for (std::size_t s = 0; s < t.sends.size(); ++s)
        for (std::size_t w = 0; w < n; ++w)
            if (t.waits[w].process == t.sends[s].process && t.waits[w].line < t.sends[s].line)
                waits_before[s].push_back(w);

    std::vector<bool> sat(n, false);
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t w = 0; w < n; ++w) {
            if (sat[w] || is_self_wait(t.waits[w]))
                continue;
            for (std::size_t s : t.wait_candidates[w]) {
                const auto &before = waits_before[s];
                if (std::all_of(before.begin(), before.end(), [&](std::size_t x) { return sat[x]; })) {
                    sat[w] = true;
                    changed = true;
                    break;
                }
            }
        }
    }

    std::vector<std::vector<std::size_t>> succ(n);
    for (std::size_t w = 0; w < n; ++w) {
        if (sat[w] || is_self_wait(t.waits[w]))
            continue;
        std::set<std::size_t> targets;
        for (std::size_t s : t.wait_candidates[w])
            for (std::size_t x : waits_before[s])
                if (!sat[x])
                    targets.insert(x);
        succ[w].assign(targets.begin(), targets.end());
    }

    // Tarjan
    std::vector<int> index(n, -1), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::vector<std::vector<std::size_t>> out;
    int counter = 0;
    std::function<void(std::size_t)> visit = [&](std::size_t v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
        for (std::size_t w : succ[v]) {
            if (index[w] < 0) {
                visit(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack[w]) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            std::vector<std::size_t> comp;
            std::size_t x;
            do {
                x = stack.back();
                stack.pop_back();
                on_stack[x] = false;
                comp.push_back(x);
            } while (x != v);
            if (comp.size() >= 2) {
                std::sort(comp.begin(), comp.end(), [&](std::size_t a, std::size_t b) {
                    return t.waits[a].line < t.waits[b].line;
                });
                out.push_back(std::move(comp));
            }
        }
    };
    for (std::size_t v = 0; v < n; ++v)
        if (index[v] < 0)
            visit(v);
    return out;
}

} // namespace

AnomalyReport detect_anomalies(const MatchTable &t)
{
    AnomalyReport rep;
    rep.waits_examined = t.waits.size();
    rep.sends_examined = t.sends.size();

    for (std::size_t i = 0; i < t.waits.size(); ++i) {
        const WaitRecord &w = t.waits[i];
        const auto &cands = t.wait_candidates[i];
        std::ostringstream msg;
        if (is_self_wait(w)) {
            msg << "process " << w.process << " waits for itself (recv " << w.var << " from "
                << w.process << ")";
            rep.anomalies.push_back({AnomalyKind::SelfWait, w, {}, msg.str()});
        } else if (cands.empty()) {
            msg << "process " << w.process << " waits for " << w.var << " from "
                << partner_text(w.partner) << " but no matching send exists";
            rep.anomalies.push_back({AnomalyKind::Deadlock, w, {}, msg.str()});
        } else if (cands.size() > 1) {
            Anomaly a{AnomalyKind::Nondeterminacy, w, {}, {}};
            for (std::size_t s : cands)
                a.witnesses.emplace_back(t.sends[s]);
            msg << "recv " << w.var << " in process " << w.process << " matches " << cands.size()
                << " sends; arrival order is nondeterministic";
            a.message = msg.str();
            rep.anomalies.push_back(std::move(a));
        }
    }

    for (std::size_t i = 0; i < t.sends.size(); ++i) {
        if (!t.send_candidates[i].empty())
            continue;
        const SendRecord &s = t.sends[i];
        std::ostringstream msg;
        msg << "send " << s.var << " from process " << s.process << " to process " << s.dest
            << " has no matching recv";
        rep.anomalies.push_back({AnomalyKind::UnmatchedSend, s, {}, msg.str()});
    }

    for (const auto &cycle : wait_cycles(t)) {
        Anomaly a{AnomalyKind::Deadlock, t.waits[cycle.front()], {}, {}};
        std::ostringstream procs, lines;
        for (std::size_t k = 0; k < cycle.size(); ++k) {
            const WaitRecord &w = t.waits[cycle[k]];
            a.witnesses.emplace_back(w);
            procs << (k ? ", " : "") << w.process;
            lines << (k ? ", " : "") << w.line;
        }
        a.message = "cyclic wait among processes " + procs.str() + " (recv lines " + lines.str() + ")";
        rep.anomalies.push_back(std::move(a));
    }

    std::stable_sort(rep.anomalies.begin(), rep.anomalies.end(),
                     [](const Anomaly &a, const Anomaly &b) {
                         return std::make_pair(line_of(a.subject), static_cast<int>(a.kind)) <
                                std::make_pair(line_of(b.subject), static_cast<int>(b.kind));
                     });
    return rep;
}

std::string format_anomaly(const Anomaly &a)
{
    std::ostringstream os;
    os << to_string(a.kind) << " line " << line_of(a.subject) << " process "
       << process_of(a.subject) << ": " << a.message;
    return os.str();
}

} // namespace mpiflow
