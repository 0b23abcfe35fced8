#include "shapeseq/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <queue>
#include <sstream>

#include <fmt/format.h>

#ifdef SHAPESEQ_HAVE_PNG
#include <png.h>
#endif

namespace shapeseq {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

BinaryImage::BinaryImage(int width, int height)
    : BinaryImage(width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(width, 0)) *
                                                          static_cast<std::size_t>(std::max(height, 0)))) {}

BinaryImage::BinaryImage(int width, int height, std::vector<std::uint8_t> mask)
    : width_(width), height_(height), mask_(std::move(mask)) {
    if (width < 1 || height < 1)
        throw ShapeError(fmt::format("image dimensions must be positive, got {}x{}", width, height));
    if (mask_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        throw ShapeError("mask length does not match image dimensions");
}

std::size_t BinaryImage::foreground_count() const {
    return static_cast<std::size_t>(std::count_if(mask_.begin(), mask_.end(), [](auto v) { return v != 0; }));
}

Contour::Contour(std::vector<Point> points) : points_(std::move(points)) {
    if (points_.size() < 3)
        throw ShapeError(fmt::format("contour needs at least 3 points, got {}", points_.size()));
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const Point& p = points_[i];
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw ShapeError("contour point is not finite");
        if (p == points_[(i + 1) % points_.size()])
            throw ShapeError(fmt::format("contour points {} and {} coincide", i, (i + 1) % points_.size()));
    }
}

double Contour::signed_area() const {
    double twice = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const Point& a = points_[i];
        const Point& b = points_[(i + 1) % points_.size()];
        twice += a.x * b.y - b.x * a.y;
    }
    return 0.5 * twice;
}

Orientation Contour::orientation() const {
    return signed_area() >= 0.0 ? Orientation::counterclockwise : Orientation::clockwise;
}

double Contour::perimeter() const {
    double total = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i)
        total += distance(points_[i], points_[(i + 1) % points_.size()]);
    return total;
}

Point centroid(std::span<const Point> points) {
    if (points.empty())
        throw ShapeError("centroid of an empty point set");
    double sx = 0.0;
    double sy = 0.0;
    for (const Point& p : points) {
        sx += p.x;
        sy += p.y;
    }
    const auto n = static_cast<double>(points.size());
    return {sx / n, sy / n};
}

std::string_view polarity_name(Polarity p) {
    switch (p) {
    case Polarity::bright: return "bright";
    case Polarity::dark: return "dark";
    case Polarity::automatic: return "auto";
    }
    return "auto";
}

Polarity parse_polarity(std::string_view name) {
    if (name == "bright")
        return Polarity::bright;
    if (name == "dark")
        return Polarity::dark;
    if (name == "auto")
        return Polarity::automatic;
    throw ShapeError(fmt::format("unknown polarity '{}' (expected bright, dark or auto)", name));
}

// ---------------------------------------------------------------------------
// Raster input
// ---------------------------------------------------------------------------

namespace {

class PnmReader {
public:
    explicit PnmReader(std::string bytes) : data_(std::move(bytes)) {}

    std::string magic() {
        if (data_.size() < 2)
            throw ShapeError("truncated image header");
        pos_ = 2;
        return data_.substr(0, 2);
    }

    int header_int() {
        skip_space_and_comments();
        std::size_t start = pos_;
        while (pos_ < data_.size() && std::isdigit(static_cast<unsigned char>(data_[pos_])))
            ++pos_;
        if (start == pos_)
            throw ShapeError("malformed PNM header");
        return std::stoi(data_.substr(start, pos_ - start));
    }

    // Exactly one whitespace byte separates the header from binary raster data.
    void end_header() {
        if (pos_ >= data_.size() || !std::isspace(static_cast<unsigned char>(data_[pos_])))
            throw ShapeError("malformed PNM header");
        ++pos_;
    }

    int binary_sample(int maxval) {
        if (maxval < 256) {
            if (pos_ >= data_.size())
                throw ShapeError("truncated PNM raster");
            return static_cast<unsigned char>(data_[pos_++]);
        }
        if (pos_ + 1 >= data_.size())
            throw ShapeError("truncated PNM raster");
        int hi = static_cast<unsigned char>(data_[pos_]);
        int lo = static_cast<unsigned char>(data_[pos_ + 1]);
        pos_ += 2;
        return (hi << 8) | lo;
    }

private:
    void skip_space_and_comments() {
        while (pos_ < data_.size()) {
            if (std::isspace(static_cast<unsigned char>(data_[pos_]))) {
                ++pos_;
            } else if (data_[pos_] == '#') {
                while (pos_ < data_.size() && data_[pos_] != '\n')
                    ++pos_;
            } else {
                break;
            }
        }
    }

    std::string data_;
    std::size_t pos_ = 0;
};

std::uint8_t rescale(int value, int maxval) {
    if (value < 0 || value > maxval)
        throw ShapeError("PNM sample exceeds maxval");
    return static_cast<std::uint8_t>((value * 255 + maxval / 2) / maxval);
}

GrayImage read_pnm(std::string bytes) {
    PnmReader in(std::move(bytes));
    const std::string magic = in.magic();
    const bool ascii = magic == "P2" || magic == "P3";
    const bool color = magic == "P3" || magic == "P6";
    GrayImage img;
    img.width = in.header_int();
    img.height = in.header_int();
    const int maxval = in.header_int();
    if (img.width < 1 || img.height < 1)
        throw ShapeError("image dimensions must be positive");
    if (maxval < 1 || maxval > 65535)
        throw ShapeError("PNM maxval out of range");
    if (!ascii)
        in.end_header();

    const std::size_t count = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
    img.pixels.resize(count);
    auto sample = [&] { return ascii ? in.header_int() : in.binary_sample(maxval); };
    for (std::size_t i = 0; i < count; ++i) {
        if (color) {
            int r = sample();
            int g = sample();
            int b = sample();
            img.pixels[i] = rescale((r + g + b) / 3, maxval);
        } else {
            img.pixels[i] = rescale(sample(), maxval);
        }
    }
    return img;
}

#ifdef SHAPESEQ_HAVE_PNG
GrayImage read_png(const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str()))
        throw ShapeError(fmt::format("cannot decode PNG {}: {}", path.string(), image.message));
    image.format = PNG_FORMAT_GRAY;
    GrayImage img;
    img.width = static_cast<int>(image.width);
    img.height = static_cast<int>(image.height);
    img.pixels.resize(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, img.pixels.data(), 0, nullptr)) {
        png_image_free(&image);
        throw ShapeError(fmt::format("cannot decode PNG {}: {}", path.string(), image.message));
    }
    return img;
}
#endif

} // namespace

GrayImage read_gray_image(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file)
        throw ShapeError(fmt::format("cannot open image file {}", path.string()));
    std::string bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());

    if (bytes.size() >= 2 && bytes[0] == 'P' && std::string_view("2356").find(bytes[1]) != std::string_view::npos) {
        try {
            return read_pnm(std::move(bytes));
        } catch (const ShapeError& e) {
            throw ShapeError(fmt::format("{}: {}", path.string(), e.what()));
        } catch (const std::logic_error&) {
            throw ShapeError(fmt::format("{}: malformed PNM header", path.string()));
        }
    }
    if (bytes.size() >= 8 && bytes.compare(0, 8, "\x89PNG\r\n\x1a\n") == 0) {
#ifdef SHAPESEQ_HAVE_PNG
        return read_png(path);
#else
        throw ShapeError(fmt::format("{}: PNG support not compiled in", path.string()));
#endif
    }
    throw ShapeError(fmt::format("{}: unsupported image format", path.string()));
}

void write_pgm(const std::filesystem::path& path, const BinaryImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ShapeError(fmt::format("cannot write {}", path.string()));
    out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
    for (auto v : img.mask())
        out.put(v ? static_cast<char>(255) : static_cast<char>(0));
}

BinaryImage threshold_image(const GrayImage& gray, int threshold, Polarity polarity) {
    if (threshold < 0 || threshold > 255)
        throw ShapeError(fmt::format("threshold {} outside [0, 255]", threshold));
    const std::size_t bright = static_cast<std::size_t>(
        std::count_if(gray.pixels.begin(), gray.pixels.end(), [&](auto v) { return v >= threshold; }));
    bool fg_bright = polarity != Polarity::dark;
    if (polarity == Polarity::automatic) {
        const std::size_t dark = gray.pixels.size() - bright;
        // A saturated image keeps the bright reading so it never maps to an empty mask.
        fg_bright = !(bright > dark && dark > 0);
    }
    std::vector<std::uint8_t> mask(gray.pixels.size());
    std::transform(gray.pixels.begin(), gray.pixels.end(), mask.begin(),
                   [&](auto v) { return static_cast<std::uint8_t>((v >= threshold) == fg_bright); });
    return BinaryImage(gray.width, gray.height, std::move(mask));
}

BinaryImage load_binary_image(const std::filesystem::path& path, int threshold, Polarity polarity) {
    BinaryImage img = threshold_image(read_gray_image(path), threshold, polarity);
    if (img.foreground_count() == 0)
        throw ShapeError(fmt::format("{}: zero foreground pixels", path.string()));
    return img;
}

// ---------------------------------------------------------------------------
// Contour tracing
// ---------------------------------------------------------------------------

namespace {

// Clockwise on screen (y grows downward), starting west.
constexpr std::array<int, 8> kDx{-1, -1, 0, 1, 1, 1, 0, -1};
constexpr std::array<int, 8> kDy{0, -1, -1, -1, 0, 1, 1, 1};

int direction_of(int dx, int dy) {
    for (int d = 0; d < 8; ++d)
        if (kDx[d] == dx && kDy[d] == dy)
            return d;
    return -1;
}

struct Components {
    std::vector<int> labels; // -1 = background
    std::vector<std::size_t> sizes;
};

Components label_components(const BinaryImage& img) {
    const int w = img.width();
    const int h = img.height();
    Components out;
    out.labels.assign(static_cast<std::size_t>(w) * h, -1);
    std::queue<std::pair<int, int>> frontier;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!img.at(x, y) || out.labels[static_cast<std::size_t>(y) * w + x] >= 0)
                continue;
            const int label = static_cast<int>(out.sizes.size());
            out.sizes.push_back(0);
            out.labels[static_cast<std::size_t>(y) * w + x] = label;
            frontier.emplace(x, y);
            while (!frontier.empty()) {
                auto [cx, cy] = frontier.front();
                frontier.pop();
                ++out.sizes[label];
                for (int d = 0; d < 8; ++d) {
                    const int nx = cx + kDx[d];
                    const int ny = cy + kDy[d];
                    if (!img.contains(nx, ny) || !img.at(nx, ny))
                        continue;
                    int& slot = out.labels[static_cast<std::size_t>(ny) * w + nx];
                    if (slot < 0) {
                        slot = label;
                        frontier.emplace(nx, ny);
                    }
                }
            }
        }
    }
    return out;
}

} // namespace

Contour extract_contour(const BinaryImage& img) {
    const Components comps = label_components(img);
    if (comps.sizes.empty())
        throw ShapeError("no foreground component");
    const int target = static_cast<int>(std::max_element(comps.sizes.begin(), comps.sizes.end()) - comps.sizes.begin());
    if (comps.sizes[target] < 3)
        throw ShapeError(fmt::format("largest component too small ({} pixels)", comps.sizes[target]));

    const int w = img.width();
    auto inside = [&](int x, int y) {
        return img.contains(x, y) && comps.labels[static_cast<std::size_t>(y) * w + x] == target;
    };

    // Raster-first pixel of the component; its west neighbour is outside it.
    int sx = 0;
    int sy = 0;
    for (std::size_t i = 0; i < comps.labels.size(); ++i) {
        if (comps.labels[i] == target) {
            sx = static_cast<int>(i % w);
            sy = static_cast<int>(i / w);
            break;
        }
    }

    std::vector<Point> trace{{static_cast<double>(sx), static_cast<double>(sy)}};
    int px = sx;
    int py = sy;
    int back = 0; // direction from current pixel to the backtrack cell
    int first_x = -1;
    int first_y = -1;
    const std::size_t guard = 8 * comps.sizes[target] + 16;
    for (std::size_t step = 0; step < guard; ++step) {
        int nx = px;
        int ny = py;
        int prev = back;
        for (int k = 1; k <= 8; ++k) {
            const int d = (back + k) % 8;
            if (inside(px + kDx[d], py + kDy[d])) {
                nx = px + kDx[d];
                ny = py + kDy[d];
                break;
            }
            prev = d;
        }
        // Jacob's criterion in transition form: leaving the start towards the
        // same neighbour as the first move closes the loop.
        if (px == sx && py == sy) {
            if (first_x < 0) {
                first_x = nx;
                first_y = ny;
            } else if (nx == first_x && ny == first_y) {
                break;
            }
        }
        const int cx = px + kDx[prev];
        const int cy = py + kDy[prev];
        back = direction_of(cx - nx, cy - ny);
        px = nx;
        py = ny;
        trace.push_back({static_cast<double>(px), static_cast<double>(py)});
    }
    // The loop pushed the start pixel again right before closing.
    if (trace.size() > 1 && trace.back() == trace.front())
        trace.pop_back();
    if (trace.size() < 3)
        throw ShapeError(fmt::format("largest component too small ({} boundary pixels)", trace.size()));

    Contour contour(trace);
    if (contour.orientation() == Orientation::clockwise) {
        std::reverse(trace.begin() + 1, trace.end());
        contour = Contour(std::move(trace));
    }
    return contour;
}

Contour resample_contour(const Contour& c, std::size_t n) {
    if (n < 3)
        throw ShapeError(fmt::format("resample count must be at least 3, got {}", n));
    const auto pts = c.points();
    std::vector<double> cumulative(pts.size() + 1, 0.0);
    for (std::size_t i = 0; i < pts.size(); ++i)
        cumulative[i + 1] = cumulative[i] + distance(pts[i], pts[(i + 1) % pts.size()]);
    const double total = cumulative.back();

    std::vector<Point> out;
    out.reserve(n);
    std::size_t seg = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double target = total * static_cast<double>(k) / static_cast<double>(n);
        while (seg + 1 < pts.size() && cumulative[seg + 1] <= target)
            ++seg;
        const double len = cumulative[seg + 1] - cumulative[seg];
        const double t = len > 0.0 ? (target - cumulative[seg]) / len : 0.0;
        const Point& a = pts[seg];
        const Point& b = pts[(seg + 1) % pts.size()];
        out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
    }
    return Contour(std::move(out));
}

void write_contour(std::ostream& os, const Contour& c) {
    os << "N " << c.size() << '\n';
    for (const Point& p : c.points())
        os << fmt::format("{} {}\n", p.x, p.y);
}

Contour read_contour(std::istream& is) {
    std::string tag;
    std::size_t count = 0;
    if (!(is >> tag >> count) || tag != "N")
        throw ShapeError("contour stream must start with 'N <count>'");
    std::vector<Point> pts(count);
    for (auto& p : pts)
        if (!(is >> p.x >> p.y))
            throw ShapeError("truncated contour stream");
    return Contour(std::move(pts));
}

} // namespace shapeseq
