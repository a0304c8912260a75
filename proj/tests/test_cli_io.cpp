#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "uncnet/errors.hpp"
#include "uncnet/generator.hpp"
#include "uncnet/io.hpp"
#include "uncnet/rng.hpp"

using namespace uncnet;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& contents) {
        static int counter = 0;
        path = "uncnet_io_test_" + std::to_string(counter++) + ".tmp";
        std::ofstream out(path);
        out << contents;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

} // namespace

TEST_CASE("parse_edgeprob: minimal valid file") {
    std::istringstream in("# nodes=3\n0\t1\t0.5\n");
    auto net = parse_edgeprob(in);
    CHECK(net.node_count() == 3);
    CHECK(net.pair_count() == 1);
    CHECK(net.pair(0).q == 0.5);
}

TEST_CASE("parse_edgeprob: comments and blank lines are ignored") {
    std::istringstream in("# nodes=4\n\n# a comment\n0\t1\t0.25\n\n2\t3\t1\n");
    auto net = parse_edgeprob(in);
    CHECK(net.pair_count() == 2);
}

TEST_CASE("parse_edgeprob: errors carry line numbers") {
    {
        std::istringstream in("# nodes=3\n0\t0\t0.5\n");
        try {
            parse_edgeprob(in);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line == 2);
            CHECK(std::string(e.what()).find("self-pair") != std::string::npos);
        }
    }
    {
        std::istringstream in("# nodes=3\n0\t1\t1.5\n");
        try {
            parse_edgeprob(in);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line == 2);
        }
    }
    {
        std::istringstream in("0\t1\t0.5\n");
        CHECK_THROWS_AS(parse_edgeprob(in), ParseError);  // missing header
    }
    {
        std::istringstream in("# nodes=3\n0\t1\t0.5\n1\t0\t0.5\n");
        try {
            parse_edgeprob(in);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line == 3);
            CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
        }
    }
    {
        std::istringstream in("# nodes=3\n0\t5\t0.5\n");
        CHECK_THROWS_AS(parse_edgeprob(in), ParseError);
    }
}

TEST_CASE("edge-probability file round trip is the identity on canonical files") {
    auto params = BlockParams::two_group(0.2, 0.05);
    NoiseRequest req;
    req.b1 = 2.0;
    req.a1 = 2.0;
    auto inst = generate_benchmark(60, params, req, 15);
    const std::string text = serialize_edgeprob(inst.network);
    std::istringstream in(text);
    auto reparsed = parse_edgeprob(in);
    CHECK(serialize_edgeprob(reparsed) == text);
    // probabilities round-trip exactly (17 significant digits)
    for (std::size_t p = 0; p < inst.network.pair_count(); ++p)
        CHECK(reparsed.pair(p).q == inst.network.pair(p).q);
}

TEST_CASE("partition file write/read round trip") {
    Partition part{{0, 1, 1, 0, 2}, 3};
    TempFile f("");
    write_partition_file(f.path, part);
    auto back = read_partition_file(f.path);
    CHECK(back.g == part.g);
    CHECK(back.k == 3);
}

TEST_CASE("edge file and scores file round trips") {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges = {{0, 1}, {2, 4}};
    TempFile f("");
    write_edge_file(f.path, edges, 5);
    std::size_t n = 0;
    auto back = read_edge_file(f.path, &n);
    CHECK(n == 5);
    CHECK(back == edges);

    EdgeScoreList scores;
    scores.method = "raw-q";
    scores.scores = {{0, 1, 0.125}, {2, 4, 1.0}, {1, 3, 0.0}};
    TempFile g("");
    write_scores_file(g.path, scores, 5);
    std::size_t n2 = 0;
    auto back2 = read_scores_file(g.path, &n2);
    CHECK(n2 == 5);
    REQUIRE(back2.scores.size() == 3);
    CHECK(back2.scores[0].score == 0.125);
    CHECK(back2.scores[2].score == 0.0);
}

TEST_CASE("label map reader") {
    TempFile f("0\talpha\n2\tgamma\n");
    auto labels = read_label_map(f.path, 3);
    CHECK(labels[0] == "alpha");
    CHECK(labels[1].empty());
    CHECK(labels[2] == "gamma");
    TempFile g("7\ttoofar\n");
    CHECK_THROWS_AS(read_label_map(g.path, 3), ParseError);
}

TEST_CASE("missing files raise a categorized error") {
    try {
        read_edgeprob_file("definitely_not_here.tsv");
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.category() == "FileNotFound");
    }
}
