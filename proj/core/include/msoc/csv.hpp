#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace msoc {

/// CSV writer with a fixed column header and a scenario-hash comment line.
/// Values are printed with 17 significant digits so re-runs are
/// byte-identical and round-trips are lossless.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns,
              std::uint64_t scenario_hash);
    void row(const std::vector<double>& values);
    void close();

  private:
    std::ofstream out_;
    std::size_t n_cols_;
};

std::string format_double(double v);

}  // namespace msoc
