#include <doctest.h>

#include <algorithm>
#include <map>
#include <queue>
#include <random>
#include <regex>
#include <set>

#include "mpiflow/cfg.hpp"
#include "support/oracle.hpp"

using namespace mpiflow;

namespace {

MpiCfg cfg_of(std::string_view text)
{
    return build_cfg(classify_statements(parse(SourceProgram::from_text(text))));
}

std::vector<Line> lines_of(const BasicBlock &b)
{
    std::vector<Line> out;
    for (const auto &s : b.stmts)
        out.push_back(s.line);
    return out;
}

std::size_t count_kind(const MpiCfg &cfg, EdgeKind kind)
{
    return static_cast<std::size_t>(std::count_if(cfg.edges.begin(), cfg.edges.end(),
                                                  [&](const Edge &e) { return e.kind == kind; }));
}

std::size_t count_substr(const std::string &hay, const std::string &needle)
{
    std::size_t n = 0;
    for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1))
        ++n;
    return n;
}

} // namespace

TEST_CASE("fig1: fourteen blocks")
{
    const std::string text = testing::read_corpus("fig1.mmpi");
    MpiCfg cfg = cfg_of(text);

    struct Expected {
        BlockKind kind;
        std::vector<Line> lines;
        Section section;
    };
    // Frozen from a hand construction of the corpus program.
    const std::vector<Expected> expected = {
        {BlockKind::Entry, {}, std::nullopt},
        {BlockKind::Ordinary, {1, 2, 3, 4}, std::nullopt},
        {BlockKind::Recv, {6}, 0},
        {BlockKind::Recv, {7}, 0},
        {BlockKind::Ordinary, {8, 9}, 0},
        {BlockKind::Ordinary, {12, 13}, 1},
        {BlockKind::Ordinary, {14}, 1},
        {BlockKind::Ordinary, {16}, 1},
        {BlockKind::Send, {18}, 1},
        {BlockKind::Send, {19, 20}, 1},
        {BlockKind::Send, {23, 24, 25}, 2},
        {BlockKind::Send, {26, 27}, 2},
        {BlockKind::Finalize, {29, 30}, std::nullopt},
        {BlockKind::Exit, {}, std::nullopt},
    };
    REQUIRE(cfg.blocks.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CAPTURE(i);
        CHECK(cfg.blocks[i].id == i);
        CHECK(cfg.blocks[i].kind == expected[i].kind);
        CHECK(lines_of(cfg.blocks[i]) == expected[i].lines);
        CHECK(cfg.blocks[i].section == expected[i].section);
    }

    // The independent line-based checker agrees (Entry/Exit excluded).
    auto oracle = testing::line_blocks(text);
    REQUIRE(oracle.size() == 12);
    for (std::size_t i = 0; i < oracle.size(); ++i) {
        CHECK(oracle[i].lines == lines_of(cfg.blocks[i + 1]));
        CHECK(oracle[i].kind == to_string(cfg.blocks[i + 1].kind));
    }

    REQUIRE(cfg.sections.size() == 3);
    CHECK(cfg.sections[1].process == 1);
    CHECK(cfg.sections[1].header_line == 11);
    CHECK(cfg.sections[1].endif_line == 21);
}

TEST_CASE("consecutive recvs open separate blocks")
{
    MpiCfg cfg = cfg_of("mpi_comm_rank(id)\nif id == 0 then\n  recv received from any\n"
                        "  recv sender_id from any\nendif\n");
    REQUIRE(cfg.blocks.size() == 5);
    CHECK(cfg.blocks[2].kind == BlockKind::Recv);
    CHECK(cfg.blocks[3].kind == BlockKind::Recv);
    CHECK(lines_of(cfg.blocks[3]) == std::vector<Line>{4});
}

TEST_CASE("a section body ending in a send is one send block")
{
    MpiCfg cfg = cfg_of("mpi_comm_rank(id)\nif id == 2 then\n  x = 7\n  x = x * 2\n  send x to 0\nendif\n");
    REQUIRE(cfg.blocks.size() == 4);
    CHECK(cfg.blocks[2].kind == BlockKind::Send);
    CHECK(lines_of(cfg.blocks[2]) == std::vector<Line>{3, 4, 5});
    CHECK(cfg.blocks[2].stmts.back().type == StatementType::Send);
}

TEST_CASE("statements after a send open a new block")
{
    MpiCfg cfg = cfg_of("mpi_comm_rank(id)\nif id == 0 then\n  send x to 1\n  y = 1\nendif\n");
    CHECK(cfg.blocks[2].kind == BlockKind::Send);
    CHECK(cfg.blocks[3].kind == BlockKind::Ordinary);
}

TEST_CASE("fig1 edges")
{
    MpiCfg cfg = cfg_of(testing::read_corpus("fig1.mmpi"));
    CHECK(count_kind(cfg, EdgeKind::ParallelFanOut) == 3);
    CHECK(count_kind(cfg, EdgeKind::ParallelFanIn) == 3);
    CHECK(count_kind(cfg, EdgeKind::Sequential) == 10);
    for (const Edge &e : cfg.edges) {
        if (e.kind == EdgeKind::ParallelFanOut)
            CHECK(e.from == 1);
        if (e.kind == EdgeKind::ParallelFanIn)
            CHECK(cfg.block(e.to).kind == BlockKind::Finalize);
    }
    CHECK(cfg.diagnostics.empty());
}

TEST_CASE("ordinary if: then/else branch edges and a join")
{
    MpiCfg cfg = cfg_of("x = 0\nif x < 0 then\n  x = x + 1\nelse\n  x = x - 1\nendif\ny = x\n");
    // Entry, cond, then, else, join, Exit
    REQUIRE(cfg.blocks.size() == 6);
    const std::vector<Edge> expected = {
        {0, 1, EdgeKind::Sequential, std::nullopt, std::nullopt},
        {1, 2, EdgeKind::Sequential, std::nullopt, Branch::Then},
        {1, 3, EdgeKind::Sequential, std::nullopt, Branch::Else},
        {2, 4, EdgeKind::Sequential, std::nullopt, std::nullopt},
        {3, 4, EdgeKind::Sequential, std::nullopt, std::nullopt},
        {4, 5, EdgeKind::Sequential, std::nullopt, std::nullopt},
    };
    CHECK(cfg.edges == expected);
}

TEST_CASE("if without else: the else edge goes to the join")
{
    MpiCfg cfg = cfg_of("if a < 0 then\n  a = 1\nendif\nb = a\n");
    CHECK(std::find(cfg.edges.begin(), cfg.edges.end(),
                    Edge{1, 3, EdgeKind::Sequential, std::nullopt, Branch::Else}) != cfg.edges.end());
}

TEST_CASE("no process sections: no parallel edges")
{
    MpiCfg cfg = cfg_of("mpi_init\na = 1\nif a > 0 then\n  b = 2\nendif\nmpi_finalize\n");
    CHECK(count_kind(cfg, EdgeKind::ParallelFanOut) == 0);
    CHECK(count_kind(cfg, EdgeKind::ParallelFanIn) == 0);
    CHECK(cfg.diagnostics.empty());
}

TEST_CASE("missing finalize: fan-in targets exit with a warning")
{
    MpiCfg cfg = cfg_of("mpi_init\nmpi_comm_rank(id)\nif id == 0 then\n  a = 1\nendif\n"
                        "if id == 1 then\n  b = 1\nendif\n");
    REQUIRE(cfg.diagnostics.size() == 1);
    CHECK(cfg.diagnostics[0].level == Level::Warning);
    for (const Edge &e : cfg.edges)
        if (e.kind == EdgeKind::ParallelFanIn)
            CHECK(e.to == cfg.exit());
    CHECK(count_kind(cfg, EdgeKind::ParallelFanIn) == 2);
}

TEST_CASE("global code between sections forms separate groups")
{
    MpiCfg cfg = cfg_of("mpi_comm_rank(id)\nif id == 0 then\n  a = 1\nendif\nmid = 2\n"
                        "if id == 1 then\n  b = a\nendif\nmpi_finalize\n");
    // Entry, B1(rank), B2(a=1), B3(mid), B4(b=a), B5(fin), Exit
    REQUIRE(cfg.blocks.size() == 7);
    CHECK(std::find(cfg.edges.begin(), cfg.edges.end(),
                    Edge{2, 3, EdgeKind::ParallelFanIn, std::nullopt, std::nullopt}) !=
          cfg.edges.end());
    CHECK(std::find(cfg.edges.begin(), cfg.edges.end(),
                    Edge{3, 4, EdgeKind::ParallelFanOut, std::nullopt, std::nullopt}) !=
          cfg.edges.end());
}

TEST_CASE("fig1 synchronization edges")
{
    MpiCfg cfg = cfg_of(testing::read_corpus("fig1.mmpi"));
    std::vector<SyncInfo> sync;
    for (const Edge &e : cfg.edges)
        if (e.kind == EdgeKind::Synchronization)
            sync.push_back(*e.sync);
    const std::vector<SyncInfo> expected = {
        {"x", 18, 6}, {"process_id", 20, 7}, {"x", 25, 6}, {"process_id", 27, 7}};
    CHECK(sync == expected);
}

TEST_CASE("synchronization: nothing to match")
{
    MpiCfg lone = cfg_of("mpi_comm_rank(r)\nif r == 1 then\n  send a to 0\nendif\n");
    CHECK(count_kind(lone, EdgeKind::Synchronization) == 0);

    MpiCfg tags = cfg_of("mpi_comm_rank(r)\nif r == 1 then\n  send a to 0 tag 1\nendif\n"
                         "if r == 0 then\n  recv a from any tag 2\nendif\n");
    CHECK(count_kind(tags, EdgeKind::Synchronization) == 0);

    MpiCfg tagged = cfg_of("mpi_comm_rank(r)\nif r == 1 then\n  send a to 0 tag 2\nendif\n"
                           "if r == 0 then\n  recv a from 1 tag 2\nendif\n");
    CHECK(count_kind(tagged, EdgeKind::Synchronization) == 1);
}

TEST_CASE("synchronization: rank-ordered pairing per source section")
{
    MpiCfg cfg = cfg_of("mpi_comm_rank(r)\n"
                        "if r == 0 then\n  recv a from 1\n  recv b from any\n  recv c from 1\nendif\n"
                        "if r == 1 then\n  send p to 0\n  send q to 0\nendif\n");
    std::vector<SyncInfo> sync;
    for (const Edge &e : cfg.edges)
        if (e.kind == EdgeKind::Synchronization)
            sync.push_back(*e.sync);
    // recvs eligible for sender 1: a(3), b(4), c(5) -> first two pair
    const std::vector<SyncInfo> expected = {{"p", 8, 3}, {"q", 9, 4}};
    CHECK(sync == expected);
}

TEST_CASE("emit_dot: empty program")
{
    MpiCfg cfg = cfg_of("");
    const std::string dot = emit_dot(cfg);
    CHECK(dot == "digraph mpi_cfg {\n"
                 "  node [shape=box];\n"
                 "  B0 [label=\"B0\\nEntry\\n-\"];\n"
                 "  B1 [label=\"B1\\nExit\\n-\"];\n"
                 "  B0 -> B1 [style=solid];\n"
                 "}\n");
}

TEST_CASE("emit_dot: fig1")
{
    MpiCfg cfg = cfg_of(testing::read_corpus("fig1.mmpi"));
    const std::string dot = emit_dot(cfg);
    CHECK(count_substr(dot, "digraph") == 1);
    CHECK(count_substr(dot, "{") == count_substr(dot, "}"));
    CHECK(count_substr(dot, "[label=\"B") == 14);
    CHECK(dot.find("B12 [label=\"B12\\nFinalizeBlock\\n29..30\"];") != std::string::npos);

    std::regex dotted(R"re(style=dotted, label="(\w+)")re");
    std::vector<std::string> labels;
    for (auto it = std::sregex_iterator(dot.begin(), dot.end(), dotted); it != std::sregex_iterator();
         ++it)
        labels.push_back((*it)[1]);
    CHECK(labels == std::vector<std::string>{"x", "process_id", "x", "process_id"});
    CHECK(count_substr(dot, "style=dashed") == 6);
}

TEST_CASE("property: structural invariants on generated programs")
{
    std::mt19937 rng(4242);
    for (int iter = 0; iter < 400; ++iter) {
        const std::string text = testing::generate_program(rng);
        CAPTURE(text);
        Ast ast = parse(SourceProgram::from_text(text));
        auto cp = classify_statements(ast);
        MpiCfg cfg = build_cfg(cp);

        // partition: every statement except section headers sits in exactly one block
        std::size_t headers = 0;
        for (const auto &cs : cp.stmts)
            headers += cs.type == StatementType::ParallelIf;
        std::multiset<Line> placed;
        for (const auto &b : cfg.blocks)
            for (const auto &s : b.stmts)
                placed.insert(s.line);
        CHECK(placed.size() == count_statements(ast.statements) - headers);
        CHECK(std::set<Line>(placed.begin(), placed.end()).size() == placed.size());

        // block shapes
        CHECK(cfg.blocks.front().kind == BlockKind::Entry);
        CHECK(cfg.blocks.back().kind == BlockKind::Exit);
        for (const auto &b : cfg.blocks) {
            std::size_t comm = 0;
            for (const auto &s : b.stmts)
                comm += s.type == StatementType::Send || s.type == StatementType::Recv;
            switch (b.kind) {
            case BlockKind::Entry:
            case BlockKind::Exit:
                CHECK(b.stmts.empty());
                break;
            case BlockKind::Ordinary:
                CHECK(comm == 0);
                for (const auto &s : b.stmts)
                    CHECK(s.type != StatementType::Finalize);
                break;
            case BlockKind::Recv:
                CHECK(comm == 1);
                CHECK(b.stmts.front().type == StatementType::Recv);
                break;
            case BlockKind::Send:
                CHECK(comm == 1);
                CHECK(b.stmts.back().type == StatementType::Send);
                break;
            case BlockKind::Finalize:
                CHECK(b.stmts.front().type == StatementType::Finalize);
                for (std::size_t k = 1; k < b.stmts.size(); ++k)
                    CHECK(b.stmts[k].type == StatementType::End);
                break;
            }
        }

        // independent boundary checker
        auto oracle = testing::line_blocks(text);
        REQUIRE(oracle.size() + 2 == cfg.blocks.size());
        for (std::size_t i = 0; i < oracle.size(); ++i) {
            CHECK(oracle[i].lines == lines_of(cfg.blocks[i + 1]));
            CHECK(oracle[i].kind == to_string(cfg.blocks[i + 1].kind));
            CHECK(oracle[i].section == cfg.blocks[i + 1].section.value_or(-1));
        }

        // edges
        std::map<std::pair<BlockId, int>, int> sync_out;
        std::map<BlockId, int> sync_in;
        for (const Edge &e : cfg.edges) {
            CHECK(e.sync.has_value() == (e.kind == EdgeKind::Synchronization));
            const auto &from = cfg.block(e.from);
            const auto &to = cfg.block(e.to);
            if (e.kind == EdgeKind::Synchronization) {
                CHECK(from.kind == BlockKind::Send);
                CHECK(to.kind == BlockKind::Recv);
                REQUIRE(from.section);
                REQUIRE(to.section);
                CHECK(*from.section != *to.section);
                ++sync_out[{e.from, *to.section}];
                ++sync_in[e.to];
            }
            if (e.kind == EdgeKind::Sequential && from.section && to.section)
                CHECK(*from.section == *to.section);
        }
        for (const auto &[key, n] : sync_out)
            CHECK(n <= 1);
        for (const auto &[blk, n] : sync_in)
            CHECK(n <= std::max<int>(1, static_cast<int>(cfg.sections.size()) - 1));

        // reachability without sync edges
        std::vector<bool> seen(cfg.blocks.size(), false);
        std::queue<BlockId> q;
        q.push(cfg.entry());
        seen[cfg.entry()] = true;
        while (!q.empty()) {
            BlockId b = q.front();
            q.pop();
            for (std::size_t e : cfg.out_edges(b))
                if (cfg.edges[e].kind != EdgeKind::Synchronization && !seen[cfg.edges[e].to]) {
                    seen[cfg.edges[e].to] = true;
                    q.push(cfg.edges[e].to);
                }
        }
        CHECK(std::all_of(seen.begin(), seen.end(), [](bool s) { return s; }));

        // each section connected under sequential edges
        for (const auto &sec : cfg.sections) {
            std::vector<BlockId> members;
            for (const auto &b : cfg.blocks)
                if (b.section == sec.process)
                    members.push_back(b.id);
            if (members.empty())
                continue;
            std::set<BlockId> reached = {members.front()};
            for (bool grew = true; grew;) {
                grew = false;
                for (const Edge &e : cfg.edges) {
                    if (e.kind != EdgeKind::Sequential)
                        continue;
                    bool f = reached.count(e.from), t = reached.count(e.to);
                    if (f != t && cfg.block(e.from).section == sec.process &&
                        cfg.block(e.to).section == sec.process) {
                        reached.insert(e.from);
                        reached.insert(e.to);
                        grew = true;
                    }
                }
            }
            CHECK(reached.size() == members.size());
        }

        // determinism
        MpiCfg again = build_cfg(classify_statements(parse(SourceProgram::from_text(text))));
        CHECK(again.edges == cfg.edges);
        CHECK(emit_dot(again) == emit_dot(cfg));
    }
}
