#ifndef ADIALAG_IO_HPP
#define ADIALAG_IO_HPP

#include <fstream>
#include <string>
#include <vector>

#include "adialag/types.hpp"

namespace adialag {

// CSV writer with fixed formatting: 17 significant digits, LF endings, a
// scenario-hash comment line. Identical inputs produce identical bytes.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::string& scenario_hash,
              const std::vector<std::string>& columns);
    void row(const std::vector<double>& values);
    void close();

  private:
    std::ofstream out_;
    size_t n_cols_;
};

std::string format_double(double v);

struct CheckResult {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double threshold = 0.0;
};

struct RunManifest {
    std::string scenario_hash;
    std::string tool_version;
    std::string command;
    double wall_clock_s = 0.0;
    std::vector<std::pair<std::string, std::string>> resolved_defaults;
    std::vector<CheckResult> checks;
    std::vector<std::string> artifacts;

    bool all_pass() const;
    void write(const std::string& path) const;
};

}  // namespace adialag

#endif
