#include "semimart/cli/records.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "semimart/cli/config.hpp"

namespace semimart::cli {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  std::string out(16, '0');
  static constexpr char kDigits[] = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[value & 0xf];
    value >>= 4;
  }
  return out;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> fields) {
  if (fields.size() != header_.size()) {
    throw CliError(ExitCode::runtime, "csv: row width does not match the header");
  }
  rows_.push_back(std::move(fields));
}

std::string CsvTable::str() const {
  std::string out;
  auto emit = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i > 0) out += ',';
      out += csv_escape(fields[i]);
    }
    out += "\r\n";
  };
  emit(header_);
  for (const auto& row : rows_) emit(row);
  return out;
}

nlohmann::json signal_to_json(const Signal& signal) {
  return nlohmann::json{{"coeffs", signal.coeffs()}};
}

Signal signal_from_json(const nlohmann::json& value) {
  if (!value.is_object() || !value.contains("coeffs") || !value["coeffs"].is_array()) {
    throw CliError(ExitCode::schema, "signal JSON needs a \"coeffs\" array");
  }
  return Signal(value["coeffs"].get<std::vector<double>>());
}

nlohmann::json estimates_to_json(const FourierEstimates& estimates) {
  return nlohmann::json{{"n", estimates.n}, {"theta_hat", estimates.theta_hat}};
}

CsvTable observation_table(const ObservationPath& path, const NoisePath& noise,
                           const std::string& config_hash) {
  if (path.dy.size() != noise.increments.size()) {
    throw CliError(ExitCode::runtime, "observation and noise paths differ in length");
  }
  CsvTable table({"t", "dy", "dxi", "config_hash"});
  const double M = path.cells_per_unit;
  for (std::size_t i = 0; i < path.dy.size(); ++i) {
    table.add_row({format_double(static_cast<double>(i) / M), format_double(path.dy[i]),
                   format_double(noise.increments[i]), config_hash});
  }
  return table;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw CliError(ExitCode::runtime, path.parent_path().string() + ": " + ec.message());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CliError(ExitCode::runtime, tmp.string() + ": cannot open for writing");
    out << content;
    if (!out) throw CliError(ExitCode::runtime, tmp.string() + ": write failed");
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw CliError(ExitCode::runtime, path.string() + ": " + ec.message());
}

}  // namespace semimart::cli
