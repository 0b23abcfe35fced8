#include "shapeseq/pipeline.hpp"

#include <fmt/format.h>

namespace shapeseq {

void PipelineConfig::validate() const {
    if (n_points < 3)
        throw ShapeError(fmt::format("n_points must be at least 3, got {}", n_points));
    bins.validate();
    quantization.validate();
    align.validate();
    if (!(skip_penalty >= 0.0))
        throw ShapeError("skip penalty must be non-negative");
}

Contour contour_from_image(const std::filesystem::path& path, const PipelineConfig& cfg) {
    return extract_contour(load_binary_image(path, cfg.threshold, cfg.polarity));
}

EncodedShape encode_contour(const Contour& raw, const PipelineConfig& cfg) {
    Contour c = resample_contour(raw, cfg.n_points);
    Encoding e = encode(c, cfg.quantization);
    return {std::move(c), std::move(e)};
}

EncodedShape encode_image(const std::filesystem::path& path, const PipelineConfig& cfg) {
    return encode_contour(contour_from_image(path, cfg), cfg);
}

FullMatch full_pipeline_match(const Contour& a_raw, const Contour& b_raw, const PipelineConfig& cfg) {
    const Contour a = resample_contour(a_raw, cfg.n_points);
    const Contour b = resample_contour(b_raw, cfg.n_points);
    FullMatch out;
    out.correspondence = correspond(cost_matrix(descriptor(a, cfg.bins), descriptor(b, cfg.bins)), cfg.skip_penalty);
    Contour b_aligned = b;
    if (out.correspondence.pairs.size() >= 2) {
        out.procrustes = align(a, b, out.correspondence);
        b_aligned = out.procrustes->aligned;
    }
    out.first = encode(a, cfg.quantization).symbols;
    out.second = encode(b_aligned, cfg.quantization).symbols;
    out.alignment = align_score(out.first.str(), out.second.str(), cfg.align);
    return out;
}

} // namespace shapeseq
