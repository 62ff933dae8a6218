#include "latticeme/imaging.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace latticeme {
namespace {

// Tokenizing number reader that tracks line/column for error reporting.
struct NumberReader {
  std::istream& in;
  int line = 1;
  int col = 0;

  bool skip_ws_and_comments(bool pgm_comments) {
    for (;;) {
      const int c = in.peek();
      if (c == EOF) return false;
      if (c == '\n') {
        in.get();
        ++line;
        col = 0;
      } else if (std::isspace(c)) {
        in.get();
        ++col;
      } else if (pgm_comments && c == '#') {
        std::string dummy;
        std::getline(in, dummy);
        ++line;
        col = 0;
      } else {
        return true;
      }
    }
  }

  double next(const char* what, bool pgm_comments = false) {
    if (!skip_ws_and_comments(pgm_comments))
      throw ParseError(std::string("unexpected end of file while reading ") + what, line, col + 1);
    std::string tok;
    while (in.peek() != EOF && !std::isspace(in.peek())) {
      tok.push_back(static_cast<char>(in.get()));
      ++col;
    }
    const int tok_col = col - static_cast<int>(tok.size()) + 1;
    double value = 0.0;
    const char* begin = tok.data();
    const char* end = begin + tok.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
      throw ParseError("expected a number but found '" + tok + "' while reading " + what, line, tok_col);
    return value;
  }
};

Image load_matrix_text(std::istream& in) {
  NumberReader r{in};
  const double rows_d = r.next("row count");
  const double cols_d = r.next("column count");
  if (rows_d < 1 || cols_d < 1 || rows_d != std::floor(rows_d) || cols_d != std::floor(cols_d))
    throw ParseError("header must be two positive integers: rows cols", 1, 1);
  Image img;
  img.height = static_cast<int>(rows_d);
  img.width = static_cast<int>(cols_d);
  img.intensities.reserve(static_cast<std::size_t>(img.width) * img.height);
  for (long i = 0; i < static_cast<long>(img.width) * img.height; ++i)
    img.intensities.push_back(r.next("matrix entry"));
  if (r.skip_ws_and_comments(false))
    throw ParseError("trailing data after last matrix entry", r.line, r.col + 1);
  return img;
}

Image load_pgm(std::istream& in) {
  char magic[2];
  in.read(magic, 2);
  const bool binary = magic[1] == '5';
  NumberReader r{in};
  const int width = static_cast<int>(r.next("PGM width", true));
  const int height = static_cast<int>(r.next("PGM height", true));
  const int maxval = static_cast<int>(r.next("PGM maxval", true));
  if (width < 1 || height < 1) throw ParseError("PGM dimensions must be positive", r.line, 1);
  if (maxval < 1 || maxval > 65535) throw ParseError("PGM maxval out of range", r.line, 1);
  Image img;
  img.width = width;
  img.height = height;
  img.intensities.resize(static_cast<std::size_t>(width) * height);
  if (binary) {
    in.get();  // single whitespace after maxval
    const bool two_byte = maxval > 255;
    for (auto& v : img.intensities) {
      int hi = in.get();
      if (hi == EOF) throw ParseError("PGM pixel data truncated", r.line, 0);
      if (two_byte) {
        const int lo = in.get();
        if (lo == EOF) throw ParseError("PGM pixel data truncated", r.line, 0);
        v = static_cast<double>(hi * 256 + lo);  // big-endian per spec
      } else {
        v = static_cast<double>(hi);
      }
    }
  } else {
    for (auto& v : img.intensities) v = r.next("PGM pixel", true);
  }
  return img;
}

}  // namespace

Image load_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image file: " + path);
  const int c0 = in.peek();
  if (c0 == 'P') {
    char magic[3] = {};
    in.read(magic, 2);
    if (magic[0] == 'P' && (magic[1] == '2' || magic[1] == '5')) {
      in.seekg(0);
      return load_pgm(in);
    }
    throw ParseError("unsupported PGM variant (only P2/P5)", 1, 1);
  }
  return load_matrix_text(in);
}

void save_matrix(const Image& img, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write image file: " + path);
  out << img.height << ' ' << img.width << '\n';
  char buf[32];
  for (int y = 1; y <= img.height; ++y) {
    for (int x = 1; x <= img.width; ++x) {
      std::snprintf(buf, sizeof buf, "%.17g", img.at(x, y));
      out << buf << (x == img.width ? '\n' : ' ');
    }
  }
  if (!out) throw IoError("failed writing image file: " + path);
}

int round_half_away(double v) {
  return static_cast<int>(std::round(v));  // std::round is half-away-from-zero
}

Window extract_window(const Image& img, int cx, int cy, int half_width, int site_id) {
  if (half_width < 0) throw DomainError("extract_window: negative half width");
  if (cx - half_width < 1 || cx + half_width > img.width || cy - half_width < 1 ||
      cy + half_width > img.height) {
    std::ostringstream msg;
    msg << "window at (" << cx << "," << cy << ") half-width " << half_width
        << " exceeds image bounds " << img.width << "x" << img.height;
    throw DomainError(msg.str());
  }
  Window w;
  w.site_id = site_id;
  w.half_width = half_width;
  w.cx = cx;
  w.cy = cy;
  const std::size_t m = static_cast<std::size_t>(w.width()) * w.width();
  w.px.reserve(m);
  w.py.reserve(m);
  w.y.reserve(m);
  for (int dy = -half_width; dy <= half_width; ++dy)
    for (int dx = -half_width; dx <= half_width; ++dx) {
      w.px.push_back(cx + dx);
      w.py.push_back(cy + dy);
      w.y.push_back(img.at(cx + dx, cy + dy));
    }
  return w;
}

bool check_disjoint(std::span<const Window> windows) {
  // Windows are full squares, so sharing a pixel is an interval overlap on
  // both axes.
  for (std::size_t i = 0; i < windows.size(); ++i)
    for (std::size_t j = i + 1; j < windows.size(); ++j) {
      const Window& a = windows[i];
      const Window& b = windows[j];
      const int reach = a.half_width + b.half_width;
      if (std::abs(a.cx - b.cx) <= reach && std::abs(a.cy - b.cy) <= reach) return false;
    }
  return true;
}

void embed_window(Image& img, const Window& w) {
  for (std::size_t k = 0; k < w.size(); ++k)
    img.at(static_cast<int>(w.px[k]), static_cast<int>(w.py[k])) = w.y[k];
}

}  // namespace latticeme
