#ifndef LATTICEME_IMAGING_HPP
#define LATTICEME_IMAGING_HPP

#include <span>
#include <string>
#include <vector>

#include "latticeme/errors.hpp"
#include "latticeme/linalg.hpp"

// Images and the square pixel windows the block likelihood operates on.
//
// Pixel coordinates are 1-based integers in (column, row) order; the first
// line of the matrix text format is "rows cols" and subsequent lines are
// image rows top to bottom. Sub-pixel locations live in the same frame.

namespace latticeme {

struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> intensities;  // row-major, row 1 first

  double at(int x, int y) const { return intensities[(y - 1) * static_cast<std::size_t>(width) + (x - 1)]; }
  double& at(int x, int y) { return intensities[(y - 1) * static_cast<std::size_t>(width) + (x - 1)]; }
  bool in_bounds(int x, int y) const { return x >= 1 && x <= width && y >= 1 && y <= height; }
};

// Matrix text or PGM (P2/P5, up to 16-bit), chosen by sniffing the header.
Image load_image(const std::string& path);
void save_matrix(const Image& img, const std::string& path);

struct Window {
  int site_id = -1;
  int half_width = 0;
  int cx = 0, cy = 0;  // integer center pixel
  // Row-major over the square: k = (dy+h)*(2h+1) + (dx+h), dx,dy in [-h,h].
  std::vector<double> px, py;  // pixel coordinates in the image frame
  std::vector<double> y;       // intensities

  std::size_t size() const { return y.size(); }
  int width() const { return 2 * half_width + 1; }
};

// Ties (x.5) round half away from zero so window placement is deterministic.
int round_half_away(double v);

Window extract_window(const Image& img, int cx, int cy, int half_width,
                      int site_id = -1);

// True iff no pixel belongs to two windows.
bool check_disjoint(std::span<const Window> windows);

// Write the window's intensities back into an image (test/diagnostic use).
void embed_window(Image& img, const Window& w);

}  // namespace latticeme

#endif
