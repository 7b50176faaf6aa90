#pragma once

// Artifact writers: fixed-precision JSON and CSV, and a static SVG quick-look.

#include <filesystem>
#include <string>
#include <vector>

#include "ricciwarp/profile.hpp"
#include "ricciwarp/solution.hpp"
#include "ricciwarp/tensor.hpp"

namespace ricciwarp {

/// 17 significant digits; non-finite values become null in JSON and nan/inf in CSV.
std::string format_number(double v);

/// Minimal streaming JSON builder with two-space indentation.
class JsonWriter {
 public:
  JsonWriter& begin_object(const std::string& key = {});
  JsonWriter& end_object();
  JsonWriter& begin_array(const std::string& key = {});
  JsonWriter& end_array();
  JsonWriter& number(const std::string& key, double v);
  JsonWriter& integer(const std::string& key, long long v);
  JsonWriter& boolean(const std::string& key, bool v);
  JsonWriter& string(const std::string& key, const std::string& v);
  JsonWriter& numbers(const std::string& key, const std::vector<double>& v);
  std::string str() const { return out_ + "\n"; }

 private:
  void prefix(const std::string& key);
  void close(char c);
  std::string out_;
  std::vector<bool> first_;
};

std::string quote_json(const std::string& s);

/// Writes to a sibling temporary and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string validation_json(const PrescribedTensor& T, const ValidationReport& report);
std::string solution_json(const ScalingSolution& sol, const PrescribedTensor& T);
std::string regularity_json(const RegularityReport& reg);
std::string profile_csv(const MetricProfile& m);
std::string trajectory_csv(const Trajectory& traj);
std::string continuation_csv(const std::vector<ContinuationRecord>& log);
std::string profile_svg(const ScalingSolution& sol);

/// Reads a `t,h,f1,f2` file written by profile_csv.
MetricProfile read_profile_csv(const std::filesystem::path& path);

}  // namespace ricciwarp
