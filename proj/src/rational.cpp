#include "shapeseq/rational.hpp"

#include <charconv>

#include <fmt/format.h>

#include "shapeseq/geometry.hpp"

namespace shapeseq {

namespace {

std::int64_t parse_int(std::string_view text, std::string_view whole) {
    std::int64_t value = 0;
    const char* first = text.data();
    if (!text.empty() && text.front() == '+')
        ++first;
    auto [ptr, ec] = std::from_chars(first, text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || first == text.data() + text.size())
        throw ShapeError(fmt::format("'{}' is not a rational number", whole));
    return value;
}

} // namespace

Rational parse_rational(std::string_view text) {
    const auto slash = text.find('/');
    if (slash == std::string_view::npos)
        return Rational(parse_int(text, text));
    const std::int64_t num = parse_int(text.substr(0, slash), text);
    const std::int64_t den = parse_int(text.substr(slash + 1), text);
    if (den == 0)
        throw ShapeError(fmt::format("'{}' has a zero denominator", text));
    return Rational(num, den);
}

std::string format_rational(const Rational& r, bool exact) {
    if (r.denominator() == 1)
        return fmt::format("{}", r.numerator());
    if (exact)
        return fmt::format("{}/{}", r.numerator(), r.denominator());
    return fmt::format("{}", to_double(r));
}

} // namespace shapeseq
