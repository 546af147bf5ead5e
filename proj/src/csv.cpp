#include "hdiff/csv.hpp"

#include <cmath>
#include <cstdio>

namespace hdiff {

std::string format_number(double v, bool pretty) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, pretty ? "%.6g" : "%.17g", v);
    return buf;
}

void CsvWriter::header(std::initializer_list<std::string_view> names) {
    for (auto n : names) *this << n;
    end_row();
}

void CsvWriter::separator() {
    if (row_started_) out_ << ',';
    row_started_ = true;
}

CsvWriter& CsvWriter::operator<<(double v) {
    separator();
    out_ << format_number(v, pretty_);
    return *this;
}

CsvWriter& CsvWriter::operator<<(long long v) {
    separator();
    out_ << v;
    return *this;
}

CsvWriter& CsvWriter::operator<<(std::string_view s) {
    separator();
    if (s.find_first_of(",\"\n") == std::string_view::npos) {
        out_ << s;
        return *this;
    }
    out_ << '"';
    for (char c : s) {
        if (c == '"') out_ << '"';
        out_ << c;
    }
    out_ << '"';
    return *this;
}

void CsvWriter::end_row() {
    out_ << '\n';
    row_started_ = false;
}

}  // namespace hdiff
