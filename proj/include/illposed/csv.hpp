#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ip {

// CSV output: comma separator, '.' decimal point, header row, LF line ends.
// Numbers go through snprintf("%.12g") so output is locale-independent and
// byte-stable across runs.
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::string(buf);
}

class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path, const std::vector<std::string>& header)
        : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
        for (size_t i = 0; i < header.size(); ++i) {
            if (i) out_ << ',';
            out_ << header[i];
        }
        out_ << '\n';
    }

    // Header already joined with commas.
    CsvWriter(const std::string& path, const char* header_line)
        : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
        out_ << header_line << '\n';
    }

    void row(const std::vector<double>& values) {
        for (size_t i = 0; i < values.size(); ++i) {
            if (i) out_ << ',';
            out_ << format_number(values[i]);
        }
        out_ << '\n';
    }

    void row_mixed(const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    bool good() const { return static_cast<bool>(out_); }

  private:
    std::ofstream out_;
};

}  // namespace ip
