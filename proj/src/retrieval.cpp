#include "shapeseq/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "shapeseq/alphabet.hpp"

namespace shapeseq {

namespace {

constexpr std::string_view kIndexMagic = "#shapeseq-index";
constexpr std::string_view kIndexVersion = "v1";

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep))
        out.push_back(field);
    if (!line.empty() && line.back() == sep)
        out.emplace_back();
    return out;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
}

} // namespace

// ---------------------------------------------------------------------------
// Manifest and ingestion
// ---------------------------------------------------------------------------

DatasetManifest read_manifest(std::istream& is, const std::filesystem::path& base_dir) {
    DatasetManifest m;
    std::set<std::string> seen;
    std::string line;
    for (std::size_t lineno = 1; std::getline(is, line); ++lineno) {
        strip_cr(line);
        if (line.empty() || line.front() == '#')
            continue;
        const auto fields = split(line, '\t');
        if (fields.size() != 3 || fields[0].empty() || fields[2].empty())
            throw ShapeError(fmt::format("manifest line {}: expected 'id<TAB>class<TAB>path'", lineno));
        if (!seen.insert(fields[0]).second)
            throw ShapeError(fmt::format("manifest line {}: duplicate shape id '{}'", lineno, fields[0]));
        std::filesystem::path path = fields[2];
        if (path.is_relative() && !base_dir.empty())
            path = base_dir / path;
        m.entries.push_back({fields[0], fields[1], std::move(path)});
    }
    return m;
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ShapeError(fmt::format("cannot open manifest {}", path.string()));
    return read_manifest(in, path.parent_path());
}

ShapeSet load_shapes(const DatasetManifest& manifest, const PipelineConfig& cfg) {
    if (manifest.entries.empty())
        throw ShapeError("manifest is empty");
    cfg.validate();
    ShapeSet out;
    for (const ManifestEntry& e : manifest.entries) {
        try {
            out.shapes.push_back({e.id, e.label, resample_contour(contour_from_image(e.path, cfg), cfg.n_points)});
        } catch (const ShapeError& err) {
            out.failures.push_back({e.id, err.what()});
        }
    }
    if (out.shapes.empty())
        throw ShapeError(fmt::format("all {} manifest entries failed", manifest.entries.size()));
    return out;
}

// ---------------------------------------------------------------------------
// Index
// ---------------------------------------------------------------------------

IndexParams IndexParams::from(const PipelineConfig& cfg) {
    return {cfg.n_points, cfg.quantization.k_angle_bins, cfg.threshold, cfg.polarity, cfg.align};
}

RetrievalIndex build_index(const ShapeSet& shapes, const PipelineConfig& cfg) {
    cfg.validate();
    RetrievalIndex idx{IndexParams::from(cfg), {}};
    idx.records.reserve(shapes.shapes.size());
    for (const Shape& s : shapes.shapes) {
        // Contours in a ShapeSet are already resampled to n_points.
        Encoding e = encode(s.contour, cfg.quantization);
        idx.records.push_back({s.id, s.label, std::move(e.symbols), s.contour.size(), e.degenerate});
    }
    return idx;
}

IndexBuild build_index(const DatasetManifest& manifest, const PipelineConfig& cfg) {
    ShapeSet shapes = load_shapes(manifest, cfg);
    return {build_index(shapes, cfg), std::move(shapes.failures)};
}

void write_index(std::ostream& os, const RetrievalIndex& idx) {
    const IndexParams& p = idx.params;
    std::string matrix;
    for (const auto& row : p.align.matrix.table())
        for (const Rational& r : row)
            matrix += (matrix.empty() ? "" : ",") + format_rational(r);
    os << fmt::format("{}\t{}\tn_points={}\tk={}\tthreshold={}\tpolarity={}\tgap={}\tmatrix={}\n", kIndexMagic,
                      kIndexVersion, p.n_points, p.k_angle_bins, p.threshold, polarity_name(p.polarity),
                      format_rational(p.align.gap), matrix);
    for (const ShapeRecord& r : idx.records)
        os << r.id << '\t' << r.label << '\t' << r.symbols.str() << '\n';
}

RetrievalIndex read_index(std::istream& is) {
    std::string header;
    if (!std::getline(is, header))
        throw ShapeError("index file is empty");
    strip_cr(header);
    const auto fields = split(header, '\t');
    if (fields.size() < 2 || fields[0] != kIndexMagic)
        throw ShapeError("not a shape index file");
    if (fields[1] != kIndexVersion)
        throw ShapeError(fmt::format("unsupported index version '{}'", fields[1]));

    std::map<std::string, std::string> kv;
    for (std::size_t i = 2; i < fields.size(); ++i) {
        const auto eq = fields[i].find('=');
        if (eq == std::string::npos)
            throw ShapeError(fmt::format("malformed index parameter '{}'", fields[i]));
        kv[fields[i].substr(0, eq)] = fields[i].substr(eq + 1);
    }
    auto need = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end())
            throw ShapeError(fmt::format("index header lacks '{}'", key));
        return it->second;
    };

    RetrievalIndex idx;
    try {
        idx.params.n_points = std::stoul(need("n_points"));
        idx.params.k_angle_bins = std::stoi(need("k"));
        idx.params.threshold = std::stoi(need("threshold"));
    } catch (const std::logic_error&) {
        throw ShapeError("index header has a non-numeric parameter");
    }
    idx.params.polarity = parse_polarity(need("polarity"));
    idx.params.align.gap = parse_rational(need("gap"));
    const auto cells = split(need("matrix"), ',');
    if (cells.size() != 81)
        throw ShapeError("index header matrix must have 81 entries");
    SubstitutionMatrix::Table table;
    for (std::size_t i = 0; i < 81; ++i)
        table[i / 9][i % 9] = parse_rational(cells[i]);
    idx.params.align.matrix = SubstitutionMatrix(table);
    idx.params.align.validate();

    std::set<std::string> seen;
    std::string line;
    while (std::getline(is, line)) {
        strip_cr(line);
        if (line.empty())
            continue;
        const auto rec = split(line, '\t');
        if (rec.size() != 3)
            throw ShapeError(fmt::format("malformed index record '{}'", line));
        if (!seen.insert(rec[0]).second)
            throw ShapeError(fmt::format("duplicate shape id '{}' in index", rec[0]));
        SymbolString symbols(rec[2]);
        const std::size_t states = symbols.state_count();
        idx.records.push_back({rec[0], rec[1], std::move(symbols), states, false});
    }
    return idx;
}

// ---------------------------------------------------------------------------
// Queries
// ---------------------------------------------------------------------------

RankedResult query(const RetrievalIndex& idx, const SymbolString& q, std::size_t top_k,
                   const std::optional<std::string>& exclude_id) {
    if (idx.records.empty())
        throw ShapeError("cannot query an empty index");
    if (top_k < 1)
        throw ShapeError("top_k must be at least 1");
    RankedResult hits;
    hits.reserve(idx.records.size());
    for (const ShapeRecord& r : idx.records) {
        if (exclude_id && r.id == *exclude_id)
            continue;
        const Rational raw = alignment_score(q.str(), r.symbols.str(), idx.params.align);
        hits.push_back({r.id, raw, normalized_score(raw, q.size(), r.symbols.size())});
    }
    std::sort(hits.begin(), hits.end(), [](const RankedHit& a, const RankedHit& b) {
        if (a.raw != b.raw)
            return a.raw > b.raw;
        return a.id < b.id;
    });
    if (hits.size() > top_k)
        hits.resize(top_k);
    return hits;
}

void write_results_tsv(std::ostream& os, const RankedResult& results, bool exact) {
    for (std::size_t i = 0; i < results.size(); ++i)
        os << fmt::format("{}\t{}\t{}\t{}\n", i + 1, results[i].id, format_rational(results[i].raw, exact),
                          format_rational(results[i].normalized, exact));
}

ScoreTable ScoreTable::from_index(const RetrievalIndex& idx) {
    ScoreTable t;
    const std::size_t n = idx.records.size();
    for (const ShapeRecord& r : idx.records) {
        t.ids_.push_back(r.id);
        t.labels_.push_back(r.label);
    }
    t.raw_.assign(n * n, Rational(0));
    // Alignment scores are symmetric in their arguments; fill one triangle.
    for (std::size_t q = 0; q < n; ++q) {
        for (std::size_t r = q; r < n; ++r) {
            const Rational s = alignment_score(idx.records[q].symbols.str(), idx.records[r].symbols.str(),
                                               idx.params.align);
            t.raw_[q * n + r] = s;
            t.raw_[r * n + q] = s;
        }
    }
    return t;
}

ScoreTable ScoreTable::full_pipeline(const ShapeSet& shapes, const PipelineConfig& cfg) {
    ScoreTable t;
    const std::size_t n = shapes.shapes.size();
    for (const Shape& s : shapes.shapes) {
        t.ids_.push_back(s.id);
        t.labels_.push_back(s.label);
    }
    t.raw_.assign(n * n, Rational(0));
    for (std::size_t q = 0; q < n; ++q)
        for (std::size_t r = 0; r < n; ++r)
            t.raw_[q * n + r] = full_pipeline_match(shapes.shapes[q].contour, shapes.shapes[r].contour, cfg)
                                    .alignment.score;
    return t;
}

std::vector<std::size_t> ScoreTable::ranking(std::size_t q) const {
    std::vector<std::size_t> order;
    order.reserve(size());
    for (std::size_t r = 0; r < size(); ++r)
        if (r != q)
            order.push_back(r);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (raw(q, a) != raw(q, b))
            return raw(q, a) > raw(q, b);
        return ids_[a] < ids_[b];
    });
    return order;
}

namespace {

std::vector<bool> eligible_queries(const ScoreTable& t) {
    std::map<std::string, std::size_t> class_size;
    for (std::size_t i = 0; i < t.size(); ++i)
        ++class_size[t.label(i)];
    std::vector<bool> ok(t.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        ok[i] = class_size[t.label(i)] > 1;
    if (std::none_of(ok.begin(), ok.end(), [](bool b) { return b; }))
        throw ShapeError("no class has two or more members; metrics are undefined");
    return ok;
}

} // namespace

double retrieval_score(const ScoreTable& table, std::size_t top_k) {
    if (table.size() < 2)
        throw ShapeError("need at least 2 shapes");
    if (top_k < 1)
        throw ShapeError("top_k must be at least 1");
    const auto ok = eligible_queries(table);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t q = 0; q < table.size(); ++q) {
        if (!ok[q])
            continue;
        const auto order = table.ranking(q);
        const std::size_t take = std::min(top_k, order.size());
        const auto hits = std::count_if(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                                        [&](std::size_t r) { return table.label(r) == table.label(q); });
        sum += static_cast<double>(hits) / static_cast<double>(take);
        ++count;
    }
    return 100.0 * sum / static_cast<double>(count);
}

double retrieval_score(const RetrievalIndex& idx, std::size_t top_k) {
    return retrieval_score(ScoreTable::from_index(idx), top_k);
}

double recognition_score(const ScoreTable& table) {
    if (table.size() < 2)
        throw ShapeError("need at least 2 shapes");
    const auto ok = eligible_queries(table);
    std::size_t correct = 0;
    std::size_t count = 0;
    for (std::size_t q = 0; q < table.size(); ++q) {
        if (!ok[q])
            continue;
        correct += table.label(table.ranking(q).front()) == table.label(q);
        ++count;
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(count);
}

double recognition_score(const RetrievalIndex& idx) { return recognition_score(ScoreTable::from_index(idx)); }

// ---------------------------------------------------------------------------
// Occlusion
// ---------------------------------------------------------------------------

Contour occlude(const Contour& c, double fraction, std::size_t start) {
    if (!(fraction >= 0.0 && fraction < 1.0))
        throw ShapeError(fmt::format("occlusion fraction {} outside [0, 1)", fraction));
    const std::size_t n = c.size();
    const auto removed = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(n)));
    if (n - std::min(removed, n) < 3)
        throw ShapeError(fmt::format("occluding {} of {} points leaves fewer than 3", removed, n));
    if (removed == 0)
        return c;
    std::vector<bool> drop(n, false);
    for (std::size_t k = 0; k < removed; ++k)
        drop[(start + k) % n] = true;
    std::vector<Point> kept;
    kept.reserve(n - removed);
    for (std::size_t i = 0; i < n; ++i)
        if (!drop[i])
            kept.push_back(c[i]);
    return Contour(std::move(kept));
}

Contour occlude(const Contour& c, double fraction) {
    return occlude(c, fraction, initial_state(c).x_index + c.size() / 2);
}

OcclusionTable occlusion_sweep(const ShapeSet& shapes, const std::vector<double>& fractions,
                               const std::vector<int>& k_values, const PipelineConfig& cfg) {
    if (shapes.shapes.size() < 2)
        throw ShapeError("need at least 2 shapes");
    OcclusionTable out{fractions, k_values, std::vector<std::vector<double>>(fractions.size())};
    for (auto& row : out.accuracy)
        row.assign(k_values.size(), 0.0);

    std::map<std::string, std::size_t> class_size;
    for (const Shape& s : shapes.shapes)
        ++class_size[s.label];

    for (std::size_t kk = 0; kk < k_values.size(); ++kk) {
        PipelineConfig at_k = cfg;
        at_k.quantization.k_angle_bins = k_values[kk];
        const RetrievalIndex intact = build_index(shapes, at_k);
        for (std::size_t f = 0; f < fractions.size(); ++f) {
            std::size_t correct = 0;
            std::size_t count = 0;
            for (const Shape& s : shapes.shapes) {
                if (class_size[s.label] < 2)
                    continue;
                Contour occluded = occlude(s.contour, fractions[f]);
                if (occluded.size() != s.contour.size())
                    occluded = resample_contour(occluded, cfg.n_points);
                const SymbolString q = encode(occluded, at_k.quantization).symbols;
                const RankedResult best = query(intact, q, 1, s.id);
                const auto match = std::find_if(intact.records.begin(), intact.records.end(),
                                                 [&](const ShapeRecord& r) { return r.id == best.front().id; });
                correct += match->label == s.label;
                ++count;
            }
            if (count == 0)
                throw ShapeError("no class has two or more members; metrics are undefined");
            out.accuracy[f][kk] = 100.0 * static_cast<double>(correct) / static_cast<double>(count);
        }
    }
    return out;
}

void write_occlusion_tsv(std::ostream& os, const OcclusionTable& t) {
    os << "fraction";
    for (int k : t.k_values)
        os << "\tk=" << k;
    os << '\n';
    for (std::size_t f = 0; f < t.fractions.size(); ++f) {
        os << fmt::format("{}", t.fractions[f]);
        for (double a : t.accuracy[f])
            os << fmt::format("\t{:.3f}", a);
        os << '\n';
    }
}

} // namespace shapeseq
