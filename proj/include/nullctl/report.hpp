#ifndef NULLCTL_REPORT_HPP
#define NULLCTL_REPORT_HPP

#include <json.hpp>

#include <deque>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace nullctl {

/// Writing the report failed; files written before the failure are listed.
class IoError : public std::runtime_error {
 public:
  IoError(const std::string& what, std::vector<std::filesystem::path> written)
      : std::runtime_error(what), written_(std::move(written)) {}

  const std::vector<std::filesystem::path>& written() const { return written_; }

 private:
  std::vector<std::filesystem::path> written_;
};

/// Cells are formatted on insertion: doubles with %.17g, integers and booleans
/// as integers, strings quoted when they contain a comma or quote.
class Table {
 public:
  Table(std::string name, std::vector<std::string> header);

  template <typename... Cells>
  void add(const Cells&... cells) {
    static_assert(sizeof...(Cells) > 0);
    std::vector<std::string> row;
    row.reserve(sizeof...(Cells));
    (row.push_back(format(cells)), ...);
    push(std::move(row));
  }

  const std::string& name() const { return name_; }
  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }
  std::string csv() const;

  static std::string format(double v);
  static std::string format(const std::string& s);
  static std::string format(const char* s) { return format(std::string(s)); }
  template <typename I, typename = std::enable_if_t<std::is_integral_v<I>>>
  static std::string format(I v) {
    return std::to_string(static_cast<long long>(v));
  }

 private:
  void push(std::vector<std::string> row);

  std::string name_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct ReportBundle {
  std::string command;
  std::deque<Table> tables;  // deque: add_table references stay valid
  nlohmann::ordered_json manifest = nlohmann::ordered_json::object();

  Table& add_table(std::string name, std::vector<std::string> header);
};

/// Writes `<command>_<table>.csv` for every table and then `<command>_manifest.json`, each
/// through a temporary file and a rename. Returns the final paths.
std::vector<std::filesystem::path> emit_report(const ReportBundle& bundle,
                                               const std::filesystem::path& directory);

}  // namespace nullctl

#endif  // NULLCTL_REPORT_HPP
