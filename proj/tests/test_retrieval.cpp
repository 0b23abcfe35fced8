#include "doctest.h"

#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "shapeseq/retrieval.hpp"
#include "synthetic.hpp"

using namespace shapeseq;
namespace fs = std::filesystem;

namespace {

RetrievalIndex index_of(const std::vector<std::tuple<std::string, std::string, std::string>>& rows) {
    RetrievalIndex idx;
    for (const auto& [id, label, s] : rows) idx.records.push_back({id, label, SymbolString(s), s.size() / 3, false});
    return idx;
}

// Each class is one random polygon seen under several rigid motions, so
// members of a class encode identically.
ShapeSet rigid_copies(std::size_t classes, std::size_t per_class, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> shift(-50, 50);
    ShapeSet set;
    for (std::size_t c = 0; c < classes; ++c) {
        auto proto = testing::random_star_polygon(rng, 9);
        for (std::size_t m = 0; m < per_class; ++m) {
            auto poly = testing::transform(proto, angle(rng), 1.0 + 0.5 * static_cast<double>(m), {shift(rng), shift(rng)});
            set.shapes.push_back({"c" + std::to_string(c) + "_" + std::to_string(m), "class" + std::to_string(c),
                                  resample_contour(Contour(poly), 100)});
        }
    }
    return set;
}

fs::path small_dataset(const std::string& name, std::size_t per_class = 2) {
    auto dir = testing::scratch_dir(name);
    return testing::write_dataset(testing::mini_benchmark(per_class, 17), dir);
}

std::string index_bytes(const RetrievalIndex& idx) {
    std::ostringstream os;
    write_index(os, idx);
    return os.str();
}

} // namespace

TEST_CASE("manifest parsing") {
    std::istringstream in("# comment\n\na\tsq\timg/a.pgm\nb\tsq\t/abs/b.pgm\n");
    auto m = read_manifest(in, "/data");
    REQUIRE(m.entries.size() == 2);
    CHECK(m.entries[0].path == fs::path("/data/img/a.pgm"));
    CHECK(m.entries[1].path == fs::path("/abs/b.pgm"));
    CHECK(m.entries[1].label == "sq");

    std::istringstream dup("a\tx\tp\na\ty\tq\n");
    CHECK_THROWS_WITH_AS(read_manifest(dup), doctest::Contains("duplicate"), ShapeError);
    std::istringstream short_line("a\tx\n");
    CHECK_THROWS_AS(read_manifest(short_line), ShapeError);
    CHECK_THROWS_AS(read_manifest(fs::path("/no/such/manifest.tsv")), ShapeError);
}

TEST_CASE("index building isolates broken entries") {
    auto manifest_path = small_dataset("retr_build", 1);
    auto manifest = read_manifest(manifest_path);
    REQUIRE(manifest.entries.size() == 4);
    auto build = build_index(manifest, {});
    CHECK(build.index.records.size() == 4);
    CHECK(build.failures.empty());

    std::ofstream(manifest_path.parent_path() / "broken.pgm") << "not an image";
    manifest.entries[1].path = manifest_path.parent_path() / "broken.pgm";
    auto partial = build_index(manifest, {});
    CHECK(partial.index.records.size() == 3);
    REQUIRE(partial.failures.size() == 1);
    CHECK(partial.failures[0].id == manifest.entries[1].id);
    for (const auto& r : partial.index.records) CHECK(r.symbols.size() == 300);

    CHECK_THROWS_AS(build_index(DatasetManifest{}, {}), ShapeError);
    DatasetManifest all_bad{{{"x", "y", "/no/such.pgm"}}};
    CHECK_THROWS_AS(build_index(all_bad, {}), ShapeError);
}

TEST_CASE("index files are deterministic and round trip") {
    auto manifest = read_manifest(small_dataset("retr_determinism"));
    auto first = index_bytes(build_index(manifest, {}).index);
    auto second = index_bytes(build_index(manifest, {}).index);
    CHECK(first == second);

    std::istringstream in(first);
    auto idx = read_index(in);
    CHECK(index_bytes(idx) == first);
    CHECK(idx.params == IndexParams::from(PipelineConfig{}));
    CHECK(idx.records.size() == 8);

    std::istringstream bad_header("#something-else\n");
    CHECK_THROWS_AS(read_index(bad_header), ShapeError);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_index(empty), ShapeError);
    std::string dup = first + idx.records[0].id + "\tx\t" + idx.records[0].symbols.str() + "\n";
    std::istringstream dup_in(dup);
    CHECK_THROWS_AS(read_index(dup_in), ShapeError);
}

TEST_CASE("index parameters are recorded") {
    PipelineConfig cfg;
    cfg.n_points = 40;
    cfg.quantization.k_angle_bins = 4;
    cfg.align.gap = Rational(-3, 2);
    auto idx = build_index(read_manifest(small_dataset("retr_params", 1)), cfg).index;
    std::istringstream in(index_bytes(idx));
    auto back = read_index(in);
    CHECK(back.params.n_points == 40);
    CHECK(back.params.k_angle_bins == 4);
    CHECK(back.params.align.gap == Rational(-3, 2));
    for (const auto& r : back.records) CHECK(r.symbols.state_count() == 40);
}

TEST_CASE("query ranking") {
    auto idx = index_of({{"b", "x", "ALMBLM"}, {"a", "x", "ALMBLM"}, {"c", "y", "FSSFSS"}, {"d", "y", "ALMFSS"}});
    auto hits = query(idx, SymbolString("ALMBLM"), 20);
    REQUIRE(hits.size() == 4);
    // Equal scores fall back to id order.
    CHECK(hits[0].id == "a");
    CHECK(hits[1].id == "b");
    CHECK(hits[0].raw == Rational(12));
    CHECK(hits[0].normalized == Rational(1));
    CHECK(hits[2].id == "d");
    CHECK(hits[3].id == "c");

    CHECK(query(idx, SymbolString("ALMBLM"), 2).size() == 2);
    auto excluded = query(idx, SymbolString("ALMBLM"), 20, std::string("a"));
    CHECK(excluded.size() == 3);
    CHECK(excluded[0].id == "b");
    CHECK_THROWS_AS(query(idx, SymbolString("ALM"), 0), ShapeError);
    CHECK_THROWS_AS(query(RetrievalIndex{}, SymbolString("ALM"), 3), ShapeError);

    std::ostringstream os;
    write_results_tsv(os, query(idx, SymbolString("ALMBLM"), 1), true);
    CHECK(os.str() == "1\ta\t12\t1\n");
}

TEST_CASE("queries return top_k results with the query first") {
    auto set = rigid_copies(6, 5, 3);
    auto idx = build_index(set, {});
    for (const auto& rec : idx.records) {
        auto hits = query(idx, rec.symbols, 20);
        REQUIRE(hits.size() == 20);
        CHECK(hits[0].raw == Rational(static_cast<std::int64_t>(rec.symbols.size() * 2)));
        for (std::size_t i = 1; i < hits.size(); ++i) CHECK(hits[i - 1].raw >= hits[i].raw);
    }
    auto first = query(idx, idx.records[7].symbols, 1);
    CHECK(idx.records[7].label == "class1");
    // Members of a class share a string, so the lowest id of the class wins.
    CHECK(first[0].id == "c1_0");
}

TEST_CASE("rigid copies are retrieved and recognised perfectly") {
    auto set = rigid_copies(5, 4, 9);
    auto idx = build_index(set, {});
    CHECK(retrieval_score(idx, 3) == doctest::Approx(100.0));
    CHECK(recognition_score(idx) == doctest::Approx(100.0));
}

TEST_CASE("identical strings give chance-level retrieval") {
    // Two classes of 3 and 2; every score ties.
    auto idx = index_of({{"a1", "a", "ALM"}, {"a2", "a", "ALM"}, {"a3", "a", "ALM"}, {"b1", "b", "ALM"},
                         {"b2", "b", "ALM"}});
    // top_k = n - 1: a-queries see 2/4 same-class, b-queries 1/4.
    const double chance = (3 * (2.0 / 4) + 2 * (1.0 / 4)) / 5 * 100;
    CHECK(retrieval_score(idx, 4) == doctest::Approx(chance));
    // top_k = 1 with id tie-breaking: a1->a2, a2->a1, a3->a1, b1->a1, b2->a1.
    CHECK(retrieval_score(idx, 1) == doctest::Approx(60.0));
    CHECK(recognition_score(idx) == doctest::Approx(60.0));
    CHECK(retrieval_score(idx, 50) == doctest::Approx(chance));
}

TEST_CASE("singleton classes are skipped") {
    auto idx = index_of({{"a1", "a", "ALM"}, {"a2", "a", "ALM"}, {"z", "z", "FSS"}});
    CHECK(recognition_score(idx) == doctest::Approx(100.0));
    CHECK(retrieval_score(idx, 1) == doctest::Approx(100.0));
    auto lonely = index_of({{"a", "a", "ALM"}, {"b", "b", "ALM"}});
    CHECK_THROWS_AS(recognition_score(lonely), ShapeError);
    auto single = index_of({{"a", "a", "ALM"}});
    CHECK_THROWS_AS(recognition_score(single), ShapeError);
    CHECK_THROWS_AS(retrieval_score(single, 3), ShapeError);
    CHECK_THROWS_AS(retrieval_score(idx, 0), ShapeError);
}

TEST_CASE("score table agrees with direct alignment") {
    auto idx = index_of({{"p", "a", "ALMBLM"}, {"q", "a", "BLMALS"}, {"r", "b", "FSSESM"}});
    auto t = ScoreTable::from_index(idx);
    REQUIRE(t.size() == 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            if (i != j) CHECK(t.raw(i, j) == alignment_score(idx.records[i].symbols.str(), idx.records[j].symbols.str()));
    auto rank = t.ranking(2);
    CHECK(rank.size() == 2);
    CHECK(t.raw(2, rank[0]) >= t.raw(2, rank[1]));
}

TEST_CASE("full pipeline table covers every ordered pair") {
    auto set = rigid_copies(2, 2, 4);
    PipelineConfig cfg;
    cfg.n_points = 30;
    for (auto& s : set.shapes) s.contour = resample_contour(s.contour, 30);
    auto t = ScoreTable::full_pipeline(set, cfg);
    REQUIRE(t.size() == 4);
    CHECK(t.raw(0, 1) == Rational(180));
    CHECK(recognition_score(t) == doctest::Approx(100.0));
}

TEST_CASE("occluding a contour") {
    std::vector<Point> pts;
    for (int i = 0; i < 100; ++i) pts.push_back({std::cos(i * 0.0628), 0.5 * std::sin(i * 0.0628)});
    Contour c(pts);
    CHECK(occlude(c, 0.0) == c);
    auto half = occlude(c, 0.5, 10);
    REQUIRE(half.size() == 50);
    // Points 10..59 are gone; the survivors keep their original order.
    CHECK(half[0] == c[0]);
    CHECK(half[9] == c[9]);
    CHECK(half[10] == c[60]);
    CHECK(half[49] == c[99]);
    CHECK(occlude(c, 0.25).size() == 75);
    auto wrap = occlude(c, 0.1, 95);
    CHECK(wrap.size() == 90);
    CHECK(wrap[0] == c[5]);
    CHECK_THROWS_AS(occlude(c, 0.99), ShapeError);
    CHECK_THROWS_AS(occlude(c, 1.0), ShapeError);
    CHECK_THROWS_AS(occlude(c, -0.1), ShapeError);
}

TEST_CASE("default occlusion starts opposite the far anchor") {
    std::mt19937_64 rng(2);
    Contour c = resample_contour(Contour(testing::random_star_polygon(rng, 8)), 60);
    std::size_t x = initial_state(c).x_index;
    auto occluded = occlude(c, 0.2);
    REQUIRE(occluded.size() == 48);
    // The 12 removed points are those from x + 30 on.
    std::vector<Point> expected;
    for (std::size_t i = 0; i < 60; ++i)
        if ((i + 60 - (x + 30) % 60) % 60 >= 12) expected.push_back(c[i]);
    CHECK(occluded == Contour(expected));
}

TEST_CASE("occlusion sweep") {
    auto set = rigid_copies(3, 3, 5);
    PipelineConfig cfg;
    auto table = occlusion_sweep(set, {0.0, 0.25, 0.5}, {4, 6}, cfg);
    REQUIRE(table.accuracy.size() == 3);
    REQUIRE(table.accuracy[0].size() == 2);
    for (std::size_t k = 0; k < 2; ++k) {
        PipelineConfig at_k = cfg;
        at_k.quantization.k_angle_bins = table.k_values[k];
        CHECK(table.accuracy[0][k] == doctest::Approx(recognition_score(build_index(set, at_k))));
        for (const auto& row : table.accuracy) {
            CHECK(row[k] >= 0.0);
            CHECK(row[k] <= 100.0);
        }
    }
    std::ostringstream os;
    write_occlusion_tsv(os, table);
    CHECK(os.str().rfind("fraction\tk=4\tk=6\n0\t", 0) == 0);
    CHECK_THROWS_AS(occlusion_sweep(set, {1.0}, {6}, cfg), ShapeError);
}
