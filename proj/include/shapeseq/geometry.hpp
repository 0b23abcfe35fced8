#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace shapeseq {

/// Raised for malformed or unusable shape input (bad file, empty mask, tiny component).
class ShapeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
double distance(Point a, Point b);

/// Row-major foreground mask. Pixel (x, y) lives at index y * width + x.
class BinaryImage {
public:
    BinaryImage(int width, int height);
    BinaryImage(int width, int height, std::vector<std::uint8_t> mask);

    int width() const { return width_; }
    int height() const { return height_; }
    bool at(int x, int y) const { return mask_[index(x, y)] != 0; }
    void set(int x, int y, bool on = true) { mask_[index(x, y)] = on ? 1 : 0; }
    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
    std::size_t foreground_count() const;
    std::span<const std::uint8_t> mask() const { return mask_; }

private:
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

    int width_;
    int height_;
    std::vector<std::uint8_t> mask_;
};

enum class Orientation { clockwise, counterclockwise };

/// Closed polygon, stored without repeating the first point at the end.
/// Orientation is the sign of the shoelace area with x right and y up.
class Contour {
public:
    explicit Contour(std::vector<Point> points);

    std::size_t size() const { return points_.size(); }
    const Point& operator[](std::size_t i) const { return points_[i % points_.size()]; }
    std::span<const Point> points() const { return points_; }
    Orientation orientation() const;
    double signed_area() const;
    double perimeter() const;

    friend bool operator==(const Contour&, const Contour&) = default;

private:
    std::vector<Point> points_;
};

/// Which gray levels count as shape.
enum class Polarity {
    bright,    ///< gray >= threshold
    dark,      ///< gray < threshold
    automatic, ///< whichever side of the threshold holds fewer pixels
};
std::string_view polarity_name(Polarity p);
Polarity parse_polarity(std::string_view name);

/// Decodes a grayscale raster (PGM P2/P5, PPM P3/P6 averaged to gray, PNG when built with libpng).
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;
};
GrayImage read_gray_image(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const BinaryImage& img);

BinaryImage threshold_image(const GrayImage& gray, int threshold, Polarity polarity = Polarity::bright);
BinaryImage load_binary_image(const std::filesystem::path& path, int threshold = 128,
                              Polarity polarity = Polarity::bright);

/// Outer boundary of the largest 8-connected component, Moore-neighbor traced
/// with Jacob's stopping criterion and returned counterclockwise.
Contour extract_contour(const BinaryImage& img);

/// n points at equal arc-length spacing along the closed polyline, starting at c[0].
Contour resample_contour(const Contour& c, std::size_t n);

Point centroid(std::span<const Point> points);
inline Point centroid(const Contour& c) { return centroid(c.points()); }

/// "N <count>" header, then one "x y" pair per line.
void write_contour(std::ostream& os, const Contour& c);
Contour read_contour(std::istream& is);

} // namespace shapeseq
