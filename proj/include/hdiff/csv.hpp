#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>

namespace hdiff {

/// Number formatting for tables: 17 significant digits, or 6 when pretty.
std::string format_number(double v, bool pretty = false);

/// Minimal comma-separated writer; fields never need quoting in our tables.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out, bool pretty = false) : out_(out), pretty_(pretty) {}

    void header(std::initializer_list<std::string_view> names);

    CsvWriter& operator<<(double v);
    CsvWriter& operator<<(long long v);
    CsvWriter& operator<<(int v) { return *this << static_cast<long long>(v); }
    CsvWriter& operator<<(std::size_t v) { return *this << static_cast<long long>(v); }
    CsvWriter& operator<<(bool v) { return *this << std::string_view(v ? "true" : "false"); }
    CsvWriter& operator<<(std::string_view s);
    CsvWriter& operator<<(const char* s) { return *this << std::string_view(s); }
    CsvWriter& operator<<(const std::string& s) { return *this << std::string_view(s); }

    void end_row();

private:
    void separator();

    std::ostream& out_;
    bool pretty_;
    bool row_started_ = false;
};

}  // namespace hdiff
