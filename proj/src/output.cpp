#include "jsde/output.hpp"

#include <charconv>
#include <cstdio>

namespace jsde {

std::string format_double(double value) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

void CsvBuilder::header(std::initializer_list<const char*> columns) {
    bool first = true;
    for (const char* c : columns) {
        if (!first) out_ << ',';
        out_ << c;
        first = false;
    }
    out_ << '\n';
}

void CsvBuilder::field(const std::string& v) {
    if (row_open_) out_ << ',';
    out_ << v;
    row_open_ = true;
}

void CsvBuilder::end_row() {
    out_ << '\n';
    row_open_ = false;
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string to_hex(std::uint64_t value) {
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx",
                  static_cast<unsigned long long>(value));
    return std::string(buffer);
}

}  // namespace jsde
