#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "lifespan/errors.hpp"

namespace lifespan {

/// Shortest round-trip decimal form.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "NA";
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) {
        out_.open(path);
        if (!out_) throw ReportError("cannot open " + path.string());
        write_row_strings(header);
    }

    void write_row_strings(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
        if (!out_) throw ReportError("csv write failed");
    }

    void write_row(const std::vector<double>& cells) {
        std::vector<std::string> s;
        s.reserve(cells.size());
        for (double v : cells) s.push_back(format_double(v));
        write_row_strings(s);
    }

  private:
    std::ofstream out_;
};

}  // namespace lifespan
