#pragma once

#include <filesystem>
#include <optional>

#include "shapeseq/geometry.hpp"
#include "shapeseq/procrustes.hpp"
#include "shapeseq/seqalign.hpp"
#include "shapeseq/shape_context.hpp"
#include "shapeseq/symbolic.hpp"

namespace shapeseq {

/// Every knob of the image -> string -> score chain.
struct PipelineConfig {
    int threshold = 128;
    Polarity polarity = Polarity::automatic;
    std::size_t n_points = 100;
    BinConfig bins;
    double skip_penalty = 0.3;
    QuantizationConfig quantization;
    AlignParams align;

    void validate() const;
};

struct EncodedShape {
    Contour contour; ///< resampled
    Encoding encoding;
};

Contour contour_from_image(const std::filesystem::path& path, const PipelineConfig& cfg);
EncodedShape encode_contour(const Contour& raw, const PipelineConfig& cfg);
EncodedShape encode_image(const std::filesystem::path& path, const PipelineConfig& cfg);

struct FullMatch {
    Correspondence correspondence;
    std::optional<ProcrustesResult> procrustes; ///< absent when fewer than 2 pairs matched
    SymbolString first;
    SymbolString second; ///< encoded after B is aligned onto A
    AlignmentResult alignment;
};

/// Shape-context correspondence, rigid alignment of B onto A, then encoding
/// and string alignment of the pair. Inputs are resampled to cfg.n_points.
FullMatch full_pipeline_match(const Contour& a, const Contour& b, const PipelineConfig& cfg);

} // namespace shapeseq
