#include "botflow/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

namespace botflow::csv {

std::optional<std::vector<std::string>> Reader::next() {
    for (;;) {
        std::vector<std::string> fields;
        std::string field;
        bool in_quotes = false;
        bool any = false;
        bool field_quoted = false;
        int c;
        record_line_ = line_ + 1;
        bool ended = false;
        while ((c = in_.get()) != std::char_traits<char>::eof()) {
            any = true;
            const char ch = static_cast<char>(c);
            if (in_quotes) {
                if (ch == '"') {
                    if (in_.peek() == '"') {
                        in_.get();
                        field.push_back('"');
                    } else {
                        in_quotes = false;
                    }
                } else {
                    if (ch == '\n') ++line_;
                    field.push_back(ch);
                }
                continue;
            }
            if (ch == '"' && field.empty() && !field_quoted) {
                in_quotes = true;
                field_quoted = true;
            } else if (ch == ',') {
                fields.push_back(std::move(field));
                field.clear();
                field_quoted = false;
            } else if (ch == '\r') {
                if (in_.peek() == '\n') in_.get();
                ++line_;
                ended = true;
                break;
            } else if (ch == '\n') {
                ++line_;
                ended = true;
                break;
            } else {
                field.push_back(ch);
            }
        }
        if (!any) return std::nullopt;
        fields.push_back(std::move(field));
        if (fields.size() == 1 && fields[0].empty() && !field_quoted) {
            if (!ended) return std::nullopt;
            continue;  // blank line
        }
        return fields;
    }
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out;
    out.reserve(field.size() + 2);
    out.push_back('"');
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << escape(fields[i]);
    }
    out << "\r\n";
}

std::string format_real(double v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "NaN" : (v > 0 ? "Infinity" : "-Infinity");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    std::string s(buf);
    const auto dot = s.find('.');
    if (dot != std::string::npos) {
        std::size_t end = s.size();
        while (end > dot + 1 && s[end - 1] == '0') --end;
        if (end == dot + 1) --end;
        s.resize(end);
    }
    if (s == "-0") s = "0";
    return s;
}

std::optional<double> parse_real(std::string_view text) {
    text = trim(text);
    if (text.empty()) return std::nullopt;
    if (text.front() == '+') text.remove_prefix(1);
    double v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        if (text == "Infinity" || text == "inf") return HUGE_VAL;
        if (text == "-Infinity" || text == "-inf") return -HUGE_VAL;
        return std::nullopt;
    }
    return v;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\n')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n')) {
        s.remove_suffix(1);
    }
    return s;
}

}  // namespace botflow::csv
