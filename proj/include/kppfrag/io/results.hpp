#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kppfrag/experiments.hpp"
#include "kppfrag/io/config.hpp"

namespace kppfrag::io {

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);

struct ManifestEntry {
  std::string path;  ///< relative to the output directory, '/' separated
  std::string kind;  ///< report | summary | field | plot | diagnostics
  std::string sha256;
  std::size_t bytes = 0;
};

struct Manifest {
  std::filesystem::path dir;
  std::vector<ManifestEntry> files;
  nlohmann::json errors = nlohmann::json::array();
  nlohmann::json config;

  std::size_t count(const std::string& kind) const;
  nlohmann::json to_json() const;
};

/// Writes files into a directory and, on commit(), a manifest.json listing
/// them. Files written by an uncommitted writer are removed on destruction,
/// so an IO failure halfway through leaves no partial result set behind.
class ResultWriter {
 public:
  explicit ResultWriter(std::filesystem::path dir);
  ~ResultWriter();
  ResultWriter(const ResultWriter&) = delete;
  ResultWriter& operator=(const ResultWriter&) = delete;

  void write(const std::string& relative, const std::string& kind, const std::string& content);
  void add_error(nlohmann::json record);
  Manifest commit(const RunConfig& cfg);

 private:
  void cleanup() noexcept;

  std::filesystem::path dir_;
  std::vector<std::filesystem::path> created_dirs_;
  std::vector<std::filesystem::path> written_;
  Manifest manifest_;
  bool committed_ = false;
};

/// Sweep outputs: report.json, summary.csv, one best-m CSV per successful mu,
/// one SVG per successful mu when cfg.plot is set, and manifest.json.
Manifest persist_results(const SweepReport& report, const RunConfig& cfg,
                         const std::filesystem::path& dir);

/// mu,best_F,bv,jumps,bangbang_frac,seconds; failed rows leave the metric
/// columns empty.
std::string summary_csv(const SweepReport& report);

/// File-name friendly rendering of mu, e.g. 0.001 -> "0.001", 1e-05 -> "1e-05".
std::string mu_tag(double mu);

}  // namespace kppfrag::io
