#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "semimart/noise.hpp"
#include "semimart/observe.hpp"
#include "semimart/signal.hpp"

namespace semimart::cli {

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

// Shortest decimal that reads back to the same double; "nan"/"inf" for
// non-finite values.
std::string format_double(double value);

// RFC 4180 table: CRLF line ends, fields quoted only when needed.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> fields);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string csv_escape(std::string_view field);

nlohmann::json signal_to_json(const Signal& signal);
Signal signal_from_json(const nlohmann::json& value);
nlohmann::json estimates_to_json(const FourierEstimates& estimates);

// Columns t (left end of the cell), dy, dxi, config_hash.
CsvTable observation_table(const ObservationPath& path, const NoisePath& noise,
                           const std::string& config_hash);

// Writes atomically enough for our purposes: to a temporary and renames.
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace semimart::cli
