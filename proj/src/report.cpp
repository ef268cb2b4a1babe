#include "nullctl/report.hpp"

#include "nullctl/core.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <system_error>

namespace nullctl {

namespace fs = std::filesystem;

Table::Table(std::string name, std::vector<std::string> header)
    : name_(std::move(name)), header_(std::move(header)) {
  require(!name_.empty() && !header_.empty(), "a table needs a name and a header");
}

std::string Table::format(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string Table::format(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void Table::push(std::vector<std::string> row) {
  require(row.size() == header_.size(), "table " + name_ + ": row width differs from the header");
  rows_.push_back(std::move(row));
}

std::string Table::csv() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

Table& ReportBundle::add_table(std::string name, std::vector<std::string> header) {
  tables.emplace_back(std::move(name), std::move(header));
  return tables.back();
}

namespace {

void write_atomic(const fs::path& target, const std::string& content,
                  const std::vector<fs::path>& written) {
  const fs::path tmp = target.parent_path() / ("." + target.filename().string() + ".tmp");
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    os << content;
    os.flush();
    if (!os) throw IoError("cannot write " + tmp.string(), written);
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into " + target.string(), written);
  }
}

}  // namespace

std::vector<fs::path> emit_report(const ReportBundle& bundle, const fs::path& directory) {
  std::vector<fs::path> written;
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec || !fs::is_directory(directory)) {
    throw IoError("cannot create output directory " + directory.string(), written);
  }
  for (const Table& t : bundle.tables) {
    const fs::path p = directory / (bundle.command + "_" + t.name() + ".csv");
    write_atomic(p, t.csv(), written);
    written.push_back(p);
  }
  const fs::path m = directory / (bundle.command + "_manifest.json");
  write_atomic(m, bundle.manifest.dump(2) + "\n", written);
  written.push_back(m);
  return written;
}

}  // namespace nullctl
