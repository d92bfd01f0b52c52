#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace botflow::csv {

/// RFC 4180 record reader. Tracks the physical line each record starts on.
class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    /// Next record, or nullopt at EOF. Blank lines are skipped.
    std::optional<std::vector<std::string>> next();

    /// 1-based line of the record most recently returned.
    std::size_t line() const noexcept { return record_line_; }

private:
    std::istream& in_;
    std::size_t line_ = 0;
    std::size_t record_line_ = 0;
};

/// Quotes a field when it holds a comma, quote, CR or LF.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Fixed-point with at most 6 fractional digits, trailing zeros trimmed.
std::string format_real(double v);

/// Strict full-string parse; nullopt on trailing junk or empty input.
std::optional<double> parse_real(std::string_view text);

std::string_view trim(std::string_view s);

}  // namespace botflow::csv
