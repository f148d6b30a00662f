#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "oslab/errors.hpp"

namespace oslab::io {

// Deterministic CSV emission: doubles are rendered with "%.17g" so repeat
// runs produce byte-identical files.
std::string format_double(double v);

class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns);
    ~CsvWriter();

    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void row(const std::vector<std::string>& cells);
    void close();

    const std::string& path() const { return path_; }

  private:
    std::string path_;
    std::ofstream out_;
    size_t columns_ = 0;
    bool closed_ = false;
};

} // namespace oslab::io
