#pragma once

#include <cstdint>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

namespace jsde {

/// Shortest round-trip decimal rendering (std::to_chars); locale-free, so
/// identical configs give byte-identical artifacts.
std::string format_double(double value);

/// CSV assembly with '\n' line endings and '.' decimals.
class CsvBuilder {
public:
    void comment(const std::string& line) { out_ << "# " << line << "\n"; }
    void header(std::initializer_list<const char*> columns);
    void field(const std::string& v);
    void field(const char* v) { field(std::string(v)); }
    void field(double v) { field(format_double(v)); }
    void field(std::int64_t v) { field(std::to_string(v)); }
    void field(bool v) { field(std::string(v ? "1" : "0")); }
    void end_row();
    std::string str() const { return out_.str(); }

private:
    std::ostringstream out_;
    bool row_open_ = false;
};

std::uint64_t fnv1a64(const std::string& data);
std::string to_hex(std::uint64_t value);

}  // namespace jsde
