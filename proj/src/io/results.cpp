#include "kppfrag/io/results.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <system_error>

#include "kppfrag/errors.hpp"
#include "kppfrag/io/field_csv.hpp"
#include "kppfrag/io/json_io.hpp"
#include "kppfrag/io/svg_plot.hpp"

namespace kppfrag::io {

namespace fs = std::filesystem;

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

std::size_t Manifest::count(const std::string& kind) const {
  std::size_t n = 0;
  for (const auto& f : files) n += f.kind == kind ? 1 : 0;
  return n;
}

nlohmann::json Manifest::to_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& f : files) {
    list.push_back({{"path", f.path}, {"kind", f.kind}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  }
  return {{"files", list}, {"errors", errors}, {"config", config}};
}

ResultWriter::ResultWriter(fs::path dir) : dir_(std::move(dir)) {
  manifest_.dir = dir_;
  std::error_code ec;
  // Remember which directories we create so cleanup can take them away again.
  std::vector<fs::path> missing;
  for (fs::path p = dir_; !p.empty() && !fs::exists(p, ec); p = p.parent_path()) {
    missing.push_back(p);
    if (p == p.parent_path()) break;
  }
  fs::create_directories(dir_, ec);
  if (ec || !fs::is_directory(dir_)) {
    throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
  }
  created_dirs_.assign(missing.begin(), missing.end());
}

ResultWriter::~ResultWriter() {
  if (!committed_) cleanup();
}

void ResultWriter::cleanup() noexcept {
  std::error_code ec;
  for (auto it = written_.rbegin(); it != written_.rend(); ++it) fs::remove(*it, ec);
  // Innermost first; remove() leaves non-empty directories alone.
  for (const auto& d : created_dirs_) fs::remove(d, ec);
}

void ResultWriter::write(const std::string& relative, const std::string& kind,
                         const std::string& content) {
  const fs::path target = dir_ / fs::path(relative);
  const fs::path parent = target.parent_path();
  std::error_code ec;
  if (!fs::exists(parent, ec)) {
    std::vector<fs::path> missing;
    for (fs::path p = parent; p != dir_ && !fs::exists(p, ec); p = p.parent_path()) {
      missing.push_back(p);
    }
    fs::create_directories(parent, ec);
    if (ec) throw IoError("cannot create " + parent.string() + ": " + ec.message());
    created_dirs_.insert(created_dirs_.begin(), missing.begin(), missing.end());
  }
  if (!fs::is_directory(parent, ec)) throw IoError(parent.string() + " is not a directory");
  {
    std::ofstream os(target, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + target.string() + " for writing");
    written_.push_back(target);
    os << content;
    os.flush();
    if (!os) throw IoError("failed writing " + target.string());
  }
  manifest_.files.push_back({fs::path(relative).generic_string(), kind, sha256_hex(content),
                             content.size()});
}

void ResultWriter::add_error(nlohmann::json record) { manifest_.errors.push_back(std::move(record)); }

Manifest ResultWriter::commit(const RunConfig& cfg) {
  manifest_.config = config_to_json(cfg);
  const std::string text = dump(manifest_.to_json());
  const fs::path target = dir_ / "manifest.json";
  {
    std::ofstream os(target, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + target.string() + " for writing");
    written_.push_back(target);
    os << text;
    os.flush();
    if (!os) throw IoError("failed writing " + target.string());
  }
  committed_ = true;
  return manifest_;
}

std::string mu_tag(double mu) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", mu);
  return buf;
}

std::string summary_csv(const SweepReport& report) {
  std::string out = "mu,best_F,bv,jumps,bangbang_frac,seconds\n";
  char buf[256];
  for (const auto& r : report.records) {
    if (r.ok) {
      const std::string jumps = r.jumps ? std::to_string(*r.jumps) : "";
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%s,%.17g,%.17g\n", r.mu, r.best_F, r.bv,
                    jumps.c_str(), r.bangbang_fraction, r.seconds);
    } else {
      std::snprintf(buf, sizeof buf, "%.17g,,,,,%.17g\n", r.mu, r.seconds);
    }
    out += buf;
  }
  return out;
}

Manifest persist_results(const SweepReport& report, const RunConfig& cfg, const fs::path& dir) {
  ResultWriter w(dir);
  w.write("report.json", "report", dump(sweep_report_to_json(report)));
  w.write("summary.csv", "summary", summary_csv(report));
  for (const auto& r : report.records) {
    if (!r.ok) {
      w.add_error({{"mu", r.mu}, {"error", r.error}});
      continue;
    }
    const std::string tag = mu_tag(r.mu);
    w.write("fields/best_m_mu" + tag + ".csv", "field", format_field_csv(r.best_m->field()));
    if (cfg.plot) {
      w.write("plots/best_m_mu" + tag + ".svg", "plot",
              render_plot_svg(*r.best_m, *r.best_theta, "mu = " + tag));
    }
  }
  return w.commit(cfg);
}

}  // namespace kppfrag::io
