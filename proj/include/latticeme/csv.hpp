#ifndef LATTICEME_CSV_HPP
#define LATTICEME_CSV_HPP

#include <fstream>
#include <string>
#include <vector>

// CSV output uses %.17g so round-trips are exact and reruns with the same
// seed are byte-identical.

namespace latticeme::csv {

std::string fmt(double v);

class Writer {
 public:
  Writer(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);
  ~Writer();

 private:
  std::ofstream out_;
  std::size_t width_;
  std::string path_;
};

// Whitespace-free CSV reader (no quoting; our schemas never need it).
std::vector<std::vector<std::string>> read(const std::string& path);

}  // namespace latticeme::csv

#endif
