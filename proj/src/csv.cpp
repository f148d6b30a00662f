#include "oslab/csv.hpp"

#include <cstdio>

namespace oslab::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns)
    : path_(path), out_(path), columns_(columns.size()) {
    if (!out_) throw IoError("cannot open for writing: " + path);
    if (columns.empty()) throw IoError("csv needs at least one column: " + path);
    for (size_t i = 0; i < columns.size(); ++i) {
        if (i) out_ << ',';
        out_ << columns[i];
    }
    out_ << '\n';
}

CsvWriter::~CsvWriter() {
    if (!closed_) {
        out_.flush();
    }
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (closed_) throw IoError("csv already closed: " + path_);
    if (cells.size() != columns_) {
        throw IoError("csv row width mismatch in " + path_);
    }
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';
}

void CsvWriter::close() {
    if (closed_) return;
    out_.flush();
    if (!out_.good()) throw IoError("failed writing csv: " + path_);
    out_.close();
    closed_ = true;
}

} // namespace oslab::io
