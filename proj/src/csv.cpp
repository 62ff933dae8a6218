#include "latticeme/csv.hpp"

#include <cstdio>
#include <sstream>

#include "latticeme/errors.hpp"

namespace latticeme::csv {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Writer::Writer(const std::string& path, const std::vector<std::string>& header)
    : out_(path), width_(header.size()), path_(path) {
  if (!out_) throw IoError("cannot write csv: " + path);
  row(header);
}

void Writer::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_)
    throw DomainError("csv row width mismatch in " + path_);
  for (std::size_t i = 0; i < cells.size(); ++i)
    out_ << cells[i] << (i + 1 == cells.size() ? '\n' : ',');
}

Writer::~Writer() { out_.flush(); }

std::vector<std::vector<std::string>> read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open csv: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace latticeme::csv
