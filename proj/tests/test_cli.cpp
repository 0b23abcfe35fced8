#include "doctest.h"

#include <fstream>
#include <sstream>

#include "shapeseq/cli.hpp"
#include "synthetic.hpp"

using namespace shapeseq;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> v;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) v.push_back(l);
    return v;
}

// 24 synthetic shapes written once and shared by every test case.
const fs::path& dataset() {
    static const fs::path manifest = testing::write_dataset(testing::mini_benchmark(6, 5), testing::scratch_dir("cli_data"));
    return manifest;
}

fs::path image(const std::string& id) { return dataset().parent_path() / (id + ".pgm"); }

} // namespace

TEST_CASE("usage errors exit with 1") {
    CHECK(run({}).code == cli::kUsage);
    CHECK(run({"frobnicate"}).code == cli::kUsage);
    CHECK(run({"encode"}).code == cli::kUsage);
    CHECK(run({"encode", "--k", "9", image("square_00").string()}).code == cli::kUsage);
    CHECK(run({"match", image("square_00").string()}).code == cli::kUsage);
    CHECK(run({"--help"}).code == cli::kOk);
}

TEST_CASE("encode prints one line per image") {
    auto r = run({"encode", image("square_00").string(), image("star_01").string()});
    REQUIRE(r.code == cli::kOk);
    auto l = lines(r.out);
    REQUIRE(l.size() == 2);
    CHECK(l[0].rfind("square_00\t", 0) == 0);
    CHECK(l[1].rfind("star_01\t", 0) == 0);
    CHECK(l[0].size() == std::string("square_00\t").size() + 300);
}

TEST_CASE("encode with four angle bins stays within A-D") {
    auto r = run({"encode", "--k", "4", "--n-points", "50", image("ellipse_02").string()});
    REQUIRE(r.code == cli::kOk);
    auto symbols = lines(r.out)[0].substr(lines(r.out)[0].find('\t') + 1);
    REQUIRE(symbols.size() == 150);
    for (std::size_t i = 0; i < symbols.size(); i += 3) {
        CHECK(symbols[i] >= 'A');
        CHECK(symbols[i] <= 'D');
    }
}

TEST_CASE("missing image is a data error naming the path") {
    auto r = run({"encode", "/no/such/shape.pgm"});
    CHECK(r.code == cli::kData);
    CHECK(r.err.find("/no/such/shape.pgm") != std::string::npos);
}

TEST_CASE("match strings") {
    auto r = run({"match", "--strings", "BLMALSCMM", "AMLALM"});
    REQUIRE(r.code == cli::kOk);
    auto l = lines(r.out);
    REQUIRE(l.size() == 4);
    CHECK(l[0] == "score\t7");
    CHECK(l[1] == "normalized\t0.5833333333333334");
    auto exact = run({"match", "--exact", "--strings", "BLMALSCMM", "AMLALM"});
    CHECK(lines(exact.out)[1] == "normalized\t7/12");
    CHECK(run({"match", "--strings", "BQ", "A"}).code != cli::kOk);
}

TEST_CASE("match images") {
    auto self = run({"match", "--exact", image("star_00").string(), image("star_00").string()});
    REQUIRE(self.code == cli::kOk);
    CHECK(lines(self.out)[1] == "normalized\t1");
    auto full = run({"match", "--full-pipeline", image("star_00").string(), image("star_03").string()});
    REQUIRE(full.code == cli::kOk);
    auto l = lines(full.out);
    REQUIRE(l.size() == 8);
    CHECK(l[4].rfind("matched_pairs\t", 0) == 0);
    CHECK(l[6].rfind("transform\tR ", 0) == 0);
}

TEST_CASE("substitution matrix files") {
    auto dir = testing::scratch_dir("cli_matrix");
    std::ofstream(dir / "broken.tsv") << "* A B\nA 2\n";
    auto r = run({"match", "--matrix", (dir / "broken.tsv").string(), "--strings", "ALM", "ALM"});
    CHECK(r.code != cli::kOk);
    CHECK_FALSE(r.err.empty());
    CHECK(run({"match", "--matrix", (dir / "absent.tsv").string(), "--strings", "ALM", "ALM"}).code != cli::kOk);

    // A valid override with milder size-symbol mismatches.
    std::ofstream os(dir / "custom.tsv");
    os << "*\tA\tB\tC\tD\tE\tF\tS\tM\tL\n";
    const std::string rows[] = {
        "A\t2\t1\t1/2\t1/3\t1/4\t1/5\t-2\t-2\t-2", "B\t1\t2\t1\t1/2\t1/3\t1/4\t-2\t-2\t-2",
        "C\t1/2\t1\t2\t1\t1/2\t1/3\t-2\t-2\t-2",   "D\t1/3\t1/2\t1\t2\t1\t1/2\t-2\t-2\t-2",
        "E\t1/4\t1/3\t1/2\t1\t2\t1\t-2\t-2\t-2",   "F\t1/5\t1/4\t1/3\t1/2\t1\t2\t-2\t-2\t-2",
        "S\t-2\t-2\t-2\t-2\t-2\t-2\t2\t3/2\t1",    "M\t-2\t-2\t-2\t-2\t-2\t-2\t3/2\t2\t3/2",
        "L\t-2\t-2\t-2\t-2\t-2\t-2\t1\t3/2\t2"};
    for (const auto& row : rows) os << row << '\n';
    os.close();
    auto custom = run({"match", "--exact", "--matrix", (dir / "custom.tsv").string(), "--strings", "ASM", "ALM"});
    REQUIRE(custom.code == cli::kOk);
    CHECK(lines(custom.out)[0] == "score\t5");
}

TEST_CASE("index, query and benchmark") {
    auto dir = testing::scratch_dir("cli_index");
    auto index = (dir / "shapes.idx").string();
    auto built = run({"index", "--manifest", dataset().string(), "--out", index});
    REQUIRE(built.code == cli::kOk);
    CHECK(lines(built.out) == std::vector<std::string>{"indexed\t24", "failed\t0"});

    auto q = run({"query", "--index", index, "--image", image("square_01").string()});
    REQUIRE(q.code == cli::kOk);
    auto hits = lines(q.out);
    REQUIRE(hits.size() == 20);
    CHECK(hits[0].rfind("1\tsquare_01\t600\t1", 0) == 0);

    auto by_string = run({"query", "--index", index, "--top-k", "3", "--string", "ALM"});
    CHECK(lines(by_string.out).size() == 3);
    auto in_memory = run({"query", "--manifest", dataset().string(), "--image", image("square_01").string()});
    CHECK(in_memory.out == q.out);

    CHECK(run({"query", "--index", index}).code == cli::kUsage);
    CHECK(run({"query", "--index", index, "--full-pipeline", "--string", "ALM"}).code == cli::kUsage);
    // Explicit parameters that contradict the stored ones are refused.
    CHECK(run({"query", "--index", index, "--k", "4", "--string", "ALM"}).code == cli::kData);
    CHECK(run({"query", "--index", index, "--k", "6", "--string", "ALM"}).code == cli::kOk);

    auto bench = run({"benchmark", "--index", index});
    REQUIRE(bench.code == cli::kOk);
    auto b = lines(bench.out);
    REQUIRE(b.size() == 5);
    CHECK(b[0] == "shapes\t24");
    CHECK(b[2].rfind("retrieval_top20\t", 0) == 0);
    CHECK(b[4].rfind("recognition\t", 0) == 0);
    auto top5 = run({"benchmark", "--index", index, "--top-k", "5"});
    CHECK(lines(top5.out).size() == 6);
    CHECK(run({"benchmark", "--index", index, "--full-pipeline"}).code == cli::kUsage);
}

TEST_CASE("index reports broken entries but keeps going") {
    auto dir = testing::scratch_dir("cli_partial");
    std::ofstream(dir / "bad.pgm") << "P5\n";
    std::ofstream(dir / "manifest.tsv") << "ok\tsquare\t" << image("square_00").string() << "\nbad\tsquare\tbad.pgm\n";
    auto r = run({"index", "--manifest", (dir / "manifest.tsv").string(), "--out", (dir / "out.idx").string()});
    CHECK(r.code == cli::kOk);
    CHECK(lines(r.out) == std::vector<std::string>{"indexed\t1", "failed\t1"});
    CHECK(r.err.find("bad") != std::string::npos);
}

TEST_CASE("occlusion table") {
    auto r = run({"occlusion", "--manifest", dataset().string(), "--fractions", "0,0.5", "--k-values", "4,6"});
    REQUIRE(r.code == cli::kOk);
    auto l = lines(r.out);
    REQUIRE(l.size() == 3);
    CHECK(l[0] == "fraction\tk=4\tk=6");
    CHECK(l[1].rfind("0\t", 0) == 0);
    CHECK(run({"occlusion", "--manifest", dataset().string(), "--fractions", "1.0"}).code == cli::kData);
}

TEST_CASE("config files") {
    auto dir = testing::scratch_dir("cli_config");
    std::ofstream(dir / "a.cfg") << "# coarse\nk = 4\nn_points=30\n";
    auto r = run({"encode", "--config", (dir / "a.cfg").string(), image("star_02").string()});
    REQUIRE(r.code == cli::kOk);
    auto symbols = lines(r.out)[0].substr(lines(r.out)[0].find('\t') + 1);
    CHECK(symbols.size() == 90);
    for (std::size_t i = 0; i < symbols.size(); i += 3) CHECK(symbols[i] <= 'D');

    // Flags win over the file.
    auto over = run({"encode", "--config", (dir / "a.cfg").string(), "--n-points", "20", image("star_02").string()});
    CHECK(lines(over.out)[0].size() == std::string("star_02\t").size() + 60);

    std::ofstream(dir / "bad.cfg") << "colour=blue\n";
    CHECK(run({"encode", "--config", (dir / "bad.cfg").string(), image("star_02").string()}).code == cli::kUsage);

    cli::Config cfg;
    std::istringstream text("gap=-3/2\ntop_k=7\npolarity=dark\n");
    cli::apply_config_text(text, cfg);
    CHECK(cfg.pipeline.align.gap == Rational(-3, 2));
    CHECK(cfg.top_k == 7);
    CHECK(cfg.pipeline.polarity == Polarity::dark);
    CHECK(cfg.chosen.count("gap") == 1);
}

TEST_CASE("repeated runs are byte-identical") {
    auto dir = testing::scratch_dir("cli_repeat");
    auto a = (dir / "a.idx").string();
    auto b = (dir / "b.idx").string();
    REQUIRE(run({"index", "--manifest", dataset().string(), "--out", a}).code == cli::kOk);
    REQUIRE(run({"index", "--manifest", dataset().string(), "--out", b}).code == cli::kOk);
    std::ifstream fa(a), fb(b);
    std::string sa((std::istreambuf_iterator<char>(fa)), {});
    std::string sb((std::istreambuf_iterator<char>(fb)), {});
    CHECK(sa == sb);
    auto q1 = run({"query", "--index", a, "--image", image("ellipse_03").string()});
    auto q2 = run({"query", "--index", b, "--image", image("ellipse_03").string()});
    CHECK(q1.out == q2.out);
}
