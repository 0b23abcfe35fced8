#include "shapeseq/cli.hpp"

#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "shapeseq/alphabet.hpp"
#include "shapeseq/retrieval.hpp"

namespace shapeseq::cli {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    std::istringstream in(value);
    T out{};
    if (!(in >> out) || !in.eof())
        throw UsageError(fmt::format("config key '{}' has invalid value '{}'", key, value));
    return out;
}

using Setter = std::function<void(Config&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& config_keys() {
    static const std::map<std::string, Setter> keys{
        {"n_points", [](Config& c, auto& k, auto& v) { c.pipeline.n_points = parse_number<std::size_t>(k, v); }},
        {"k", [](Config& c, auto& k, auto& v) { c.pipeline.quantization.k_angle_bins = parse_number<int>(k, v); }},
        {"threshold", [](Config& c, auto& k, auto& v) { c.pipeline.threshold = parse_number<int>(k, v); }},
        {"polarity", [](Config& c, auto&, auto& v) { c.pipeline.polarity = parse_polarity(v); }},
        {"radial_bins",
         [](Config& c, auto& k, auto& v) { c.pipeline.bins.radial_bins = parse_number<std::size_t>(k, v); }},
        {"angular_bins",
         [](Config& c, auto& k, auto& v) { c.pipeline.bins.angular_bins = parse_number<std::size_t>(k, v); }},
        {"r_inner", [](Config& c, auto& k, auto& v) { c.pipeline.bins.r_inner = parse_number<double>(k, v); }},
        {"r_outer_scale",
         [](Config& c, auto& k, auto& v) { c.pipeline.bins.r_outer_scale = parse_number<double>(k, v); }},
        {"skip_penalty", [](Config& c, auto& k, auto& v) { c.pipeline.skip_penalty = parse_number<double>(k, v); }},
        {"gap", [](Config& c, auto&, auto& v) { c.pipeline.align.gap = parse_rational(v); }},
        {"matrix", [](Config& c, auto&, auto& v) { c.matrix_path = std::filesystem::path(v); }},
        {"top_k", [](Config& c, auto& k, auto& v) { c.top_k = parse_number<std::size_t>(k, v); }},
    };
    return keys;
}

} // namespace

void apply_config_text(std::istream& is, Config& cfg) {
    std::string line;
    for (std::size_t lineno = 1; std::getline(is, line); ++lineno) {
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError(fmt::format("config line {}: expected key=value", lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = config_keys().find(key);
        if (it == config_keys().end())
            throw UsageError(fmt::format("config line {}: unknown key '{}'", lineno, key));
        cfg.chosen.insert(key);
        try {
            it->second(cfg, key, value);
        } catch (const ShapeError& e) {
            throw UsageError(fmt::format("config line {}: {}", lineno, e.what()));
        }
    }
}

void apply_config_file(const std::filesystem::path& path, Config& cfg) {
    std::ifstream in(path);
    if (!in)
        throw UsageError(fmt::format("cannot open config file {}", path.string()));
    apply_config_text(in, cfg);
}

namespace {

/// Raw flag values shared by every subcommand; applied over the config file.
struct Flags {
    std::size_t n_points = 0;
    int k = 0;
    int threshold = 0;
    std::string polarity;
    std::string gap;
    std::string matrix;
    std::size_t top_k = 0;
    std::string config;
    bool exact = false;
    bool full_pipeline = false;

    std::map<std::string, CLI::Option*> opts;

    void attach(CLI::App* app) {
        opts["n_points"] = app->add_option("--n-points", n_points, "Resampled contour points (default 100)");
        opts["k"] = app->add_option("--k", k, "Angle bins, 2..6 (default 6)");
        opts["threshold"] = app->add_option("--threshold", threshold, "Gray threshold (default 128)");
        opts["polarity"] = app->add_option("--polarity", polarity, "bright, dark or auto (default auto)");
        opts["gap"] = app->add_option("--gap", gap, "Gap score, integer or p/q (default -2)");
        opts["matrix"] = app->add_option("--matrix", matrix, "Substitution matrix override file");
        opts["top_k"] = app->add_option("--top-k", top_k, "Results per query (default 20)");
        opts["config"] = app->add_option("--config", config, "key=value configuration file");
        app->add_flag("--exact", exact, "Print scores as exact fractions");
        app->add_flag("--full-pipeline", full_pipeline, "Run shape-context correspondence and rigid alignment per pair");
    }

    bool given(const std::string& name) const { return opts.at(name)->count() > 0; }

    Config resolve() const {
        Config cfg;
        if (given("config"))
            apply_config_file(config, cfg);
        if (given("n_points"))
            cfg.pipeline.n_points = n_points;
        if (given("k"))
            cfg.pipeline.quantization.k_angle_bins = k;
        if (given("threshold"))
            cfg.pipeline.threshold = threshold;
        try {
            if (given("polarity"))
                cfg.pipeline.polarity = parse_polarity(polarity);
            if (given("gap"))
                cfg.pipeline.align.gap = parse_rational(gap);
        } catch (const ShapeError& e) {
            throw UsageError(e.what());
        }
        if (given("matrix"))
            cfg.matrix_path = matrix;
        for (const auto& [name, opt] : opts)
            if (name != "config" && opt->count() > 0)
                cfg.chosen.insert(name);
        if (given("top_k"))
            cfg.top_k = top_k;
        if (cfg.top_k < 1)
            throw UsageError("--top-k must be at least 1");
        if (cfg.matrix_path) {
            std::ifstream in(*cfg.matrix_path);
            if (!in)
                throw ShapeError(fmt::format("cannot open substitution matrix {}", cfg.matrix_path->string()));
            cfg.pipeline.align.matrix = read_substitution_matrix(in);
        }
        try {
            cfg.pipeline.validate();
        } catch (const ShapeError& e) {
            throw UsageError(e.what());
        }
        return cfg;
    }

    /// Any explicitly chosen encoding/scoring option must agree with a stored index.
    void check_against(const IndexParams& stored, const Config& cfg) const {
        const IndexParams wanted = IndexParams::from(cfg.pipeline);
        auto chosen = [&](const char* key) { return cfg.chosen.count(key) > 0; };
        const bool conflict = (chosen("n_points") && wanted.n_points != stored.n_points) ||
                              (chosen("k") && wanted.k_angle_bins != stored.k_angle_bins) ||
                              (chosen("threshold") && wanted.threshold != stored.threshold) ||
                              (chosen("polarity") && wanted.polarity != stored.polarity) ||
                              (chosen("gap") && wanted.align.gap != stored.align.gap) ||
                              (chosen("matrix") && !(wanted.align.matrix == stored.align.matrix));
        if (conflict)
            throw ShapeError("configuration conflicts with the parameters stored in the index");
    }
};

std::string percent(double v) { return fmt::format("{:.3f}", v); }

void validate_alignment_string(const std::string& s) {
    for (char c : s)
        if (kAlphabet.find(c) == std::string_view::npos)
            throw ShapeError(fmt::format("'{}' contains '{}', which is not a shape symbol", s, c));
}

PipelineConfig pipeline_for(const IndexParams& p, const PipelineConfig& base) {
    PipelineConfig cfg = base;
    cfg.n_points = p.n_points;
    cfg.quantization.k_angle_bins = p.k_angle_bins;
    cfg.threshold = p.threshold;
    cfg.polarity = p.polarity;
    cfg.align = p.align;
    return cfg;
}

RetrievalIndex load_index_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ShapeError(fmt::format("cannot open index {}", path.string()));
    return read_index(in);
}

void report_failures(std::ostream& err, const std::vector<BuildFailure>& failures) {
    for (const BuildFailure& f : failures)
        err << "failed\t" << f.id << '\t' << f.message << '\n';
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Shape retrieval through symbolic contour strings and dynamic-programming alignment", "shapeseq"};
    app.require_subcommand(1);

    auto* encode_cmd = app.add_subcommand("encode", "Print '<id>\\t<symbols>' for each image");
    std::vector<std::string> encode_images;
    encode_cmd->add_option("images", encode_images, "Image files")->required();
    Flags encode_flags;
    encode_flags.attach(encode_cmd);

    auto* match_cmd = app.add_subcommand("match", "Score two images, or two strings with --strings");
    std::vector<std::string> match_images;
    std::vector<std::string> match_strings;
    match_cmd->add_option("images", match_images, "Two image files")->expected(0, 2);
    match_cmd->add_option("--strings", match_strings, "Align two symbol strings directly")->expected(2);
    Flags match_flags;
    match_flags.attach(match_cmd);

    auto* index_cmd = app.add_subcommand("index", "Build an index file from a manifest");
    std::string index_manifest;
    std::string index_out;
    index_cmd->add_option("--manifest", index_manifest, "TSV id/class/path manifest")->required();
    index_cmd->add_option("--out", index_out, "Index file to write")->required();
    Flags index_flags;
    index_flags.attach(index_cmd);

    auto* query_cmd = app.add_subcommand("query", "Rank index records against a query");
    std::string query_index;
    std::string query_manifest;
    std::string query_image;
    std::string query_string;
    query_cmd->add_option("--index", query_index, "Index file");
    query_cmd->add_option("--manifest", query_manifest, "Manifest to index in memory");
    query_cmd->add_option("--image", query_image, "Query image");
    query_cmd->add_option("--string", query_string, "Query symbol string");
    Flags query_flags;
    query_flags.attach(query_cmd);

    auto* bench_cmd = app.add_subcommand("benchmark", "Retrieval and recognition scores");
    std::string bench_index;
    std::string bench_manifest;
    bench_cmd->add_option("--index", bench_index, "Index file");
    bench_cmd->add_option("--manifest", bench_manifest, "Manifest (required for --full-pipeline)");
    Flags bench_flags;
    bench_flags.attach(bench_cmd);

    auto* occl_cmd = app.add_subcommand("occlusion", "Recognition accuracy under contour occlusion");
    std::string occl_manifest;
    std::vector<double> occl_fractions{0.0, 0.25, 0.5};
    std::vector<int> occl_k{4, 5, 6};
    occl_cmd->add_option("--manifest", occl_manifest, "TSV id/class/path manifest")->required();
    occl_cmd->add_option("--fractions", occl_fractions, "Occlusion fractions")->delimiter(',');
    occl_cmd->add_option("--k-values", occl_k, "Angle bin counts")->delimiter(',');
    Flags occl_flags;
    occl_flags.attach(occl_cmd);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    try {
        if (encode_cmd->parsed()) {
            const Config cfg = encode_flags.resolve();
            for (const std::string& image : encode_images) {
                const EncodedShape shape = encode_image(image, cfg.pipeline);
                const std::string id = std::filesystem::path(image).stem().string();
                if (shape.encoding.degenerate)
                    err << "warning: " << id << " has near-constant centroid distance; size symbols set to M\n";
                out << id << '\t' << shape.encoding.symbols.str() << '\n';
            }
            return kOk;
        }

        if (match_cmd->parsed()) {
            const Config cfg = match_flags.resolve();
            const bool exact = match_flags.exact;
            auto print_alignment = [&](const AlignmentResult& r) {
                out << "score\t" << format_rational(r.score, exact) << '\n';
                out << "normalized\t" << format_rational(r.normalized, exact) << '\n';
                out << "aligned1\t" << r.aligned1 << '\n';
                out << "aligned2\t" << r.aligned2 << '\n';
            };
            if (!match_strings.empty()) {
                if (!match_images.empty())
                    throw UsageError("give either two images or --strings, not both");
                validate_alignment_string(match_strings[0]);
                validate_alignment_string(match_strings[1]);
                print_alignment(align_score(match_strings[0], match_strings[1], cfg.pipeline.align));
                return kOk;
            }
            if (match_images.size() != 2)
                throw UsageError("match needs two images or --strings S1 S2");
            if (match_flags.full_pipeline) {
                const FullMatch m = full_pipeline_match(contour_from_image(match_images[0], cfg.pipeline),
                                                        contour_from_image(match_images[1], cfg.pipeline),
                                                        cfg.pipeline);
                print_alignment(m.alignment);
                out << "matched_pairs\t" << m.correspondence.pairs.size() << '\n';
                out << "correspondence_cost\t" << fmt::format("{}", m.correspondence.total_cost) << '\n';
                if (m.procrustes) {
                    out << "transform\t";
                    write_transform(out, m.procrustes->transform);
                    out << "residual_rms\t" << fmt::format("{}", m.procrustes->residual_rms) << '\n';
                }
                return kOk;
            }
            const EncodedShape a = encode_image(match_images[0], cfg.pipeline);
            const EncodedShape b = encode_image(match_images[1], cfg.pipeline);
            print_alignment(align_score(a.encoding.symbols.str(), b.encoding.symbols.str(), cfg.pipeline.align));
            return kOk;
        }

        if (index_cmd->parsed()) {
            const Config cfg = index_flags.resolve();
            const IndexBuild build = build_index(read_manifest(index_manifest), cfg.pipeline);
            std::ofstream file(index_out);
            if (!file)
                throw ShapeError(fmt::format("cannot write index {}", index_out));
            write_index(file, build.index);
            report_failures(err, build.failures);
            out << "indexed\t" << build.index.records.size() << '\n';
            out << "failed\t" << build.failures.size() << '\n';
            return kOk;
        }

        if (query_cmd->parsed()) {
            const Config cfg = query_flags.resolve();
            if (query_index.empty() == query_manifest.empty())
                throw UsageError("query needs exactly one of --index or --manifest");
            if (query_image.empty() == query_string.empty())
                throw UsageError("query needs exactly one of --image or --string");
            if (query_flags.full_pipeline)
                throw UsageError("query ranks stored strings; use benchmark --manifest --full-pipeline instead");
            RetrievalIndex idx;
            if (!query_index.empty()) {
                idx = load_index_file(query_index);
                query_flags.check_against(idx.params, cfg);
            } else {
                IndexBuild build = build_index(read_manifest(query_manifest), cfg.pipeline);
                report_failures(err, build.failures);
                idx = std::move(build.index);
            }
            const SymbolString q = query_image.empty()
                                       ? SymbolString(query_string)
                                       : encode_image(query_image, pipeline_for(idx.params, cfg.pipeline))
                                             .encoding.symbols;
            write_results_tsv(out, query(idx, q, cfg.top_k), query_flags.exact);
            return kOk;
        }

        if (bench_cmd->parsed()) {
            const Config cfg = bench_flags.resolve();
            if (bench_index.empty() == bench_manifest.empty())
                throw UsageError("benchmark needs exactly one of --index or --manifest");
            if (bench_flags.full_pipeline && bench_manifest.empty())
                throw UsageError("--full-pipeline needs contours; pass --manifest");
            std::size_t failures = 0;
            std::optional<ScoreTable> table;
            if (!bench_index.empty()) {
                const RetrievalIndex idx = load_index_file(bench_index);
                bench_flags.check_against(idx.params, cfg);
                table = ScoreTable::from_index(idx);
            } else {
                const ShapeSet shapes = load_shapes(read_manifest(bench_manifest), cfg.pipeline);
                report_failures(err, shapes.failures);
                failures = shapes.failures.size();
                table = bench_flags.full_pipeline ? ScoreTable::full_pipeline(shapes, cfg.pipeline)
                                            : ScoreTable::from_index(build_index(shapes, cfg.pipeline));
            }
            out << "shapes\t" << table->size() << '\n';
            out << "failures\t" << failures << '\n';
            out << "retrieval_top20\t" << percent(retrieval_score(*table, 20)) << '\n';
            out << "retrieval_top40\t" << percent(retrieval_score(*table, 40)) << '\n';
            if (cfg.top_k != 20 && cfg.top_k != 40)
                out << "retrieval_top" << cfg.top_k << '\t' << percent(retrieval_score(*table, cfg.top_k)) << '\n';
            out << "recognition\t" << percent(recognition_score(*table)) << '\n';
            return kOk;
        }

        if (occl_cmd->parsed()) {
            const Config cfg = occl_flags.resolve();
            const ShapeSet shapes = load_shapes(read_manifest(occl_manifest), cfg.pipeline);
            report_failures(err, shapes.failures);
            write_occlusion_tsv(out, occlusion_sweep(shapes, occl_fractions, occl_k, cfg.pipeline));
            return kOk;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const ShapeError& e) {
        err << "error: " << e.what() << '\n';
        return kData;
    }
    return kUsage;
}

} // namespace shapeseq::cli
