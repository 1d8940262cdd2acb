#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "pcsim/error.hpp"
#include "pcsim/terrain.hpp"

namespace pcsim {

namespace detail {

inline std::string readWholeFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SimError(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline SimError parseError(const std::string& source, int line, const std::string& msg) {
  return SimError(ErrorCode::ParseError, source + ":" + std::to_string(line) + ": " + msg);
}

}  // namespace detail

// Text height map:
//   lines starting with '#' and blank lines are ignored
//   header:  rows cols scale [origin_x origin_y origin_z]
//   body:    rows*cols heights in meters, row-major (row = x index, column = z index),
//            separated by any whitespace
inline HeightField parseHeightFieldText(const std::string& text,
                                        const std::string& source = "<text>") {
  std::istringstream in(text);
  std::string line;
  int lineNo = 0;
  bool haveHeader = false;
  long rows = 0, cols = 0;
  double scale = 0.0;
  Vec3 origin;
  std::vector<double> heights;
  while (std::getline(in, line)) {
    ++lineNo;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    if (!haveHeader) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      if (!(ls >> rows >> cols >> scale))
        throw detail::parseError(source, lineNo, "expected header 'rows cols scale'");
      double ox, oy, oz;
      if (ls >> ox) {
        if (!(ls >> oy >> oz))
          throw detail::parseError(source, lineNo, "origin needs three coordinates");
        origin = {ox, oy, oz};
      }
      std::string extra;
      if (ls >> extra) throw detail::parseError(source, lineNo, "unexpected token '" + extra + "'");
      if (rows <= 0 || cols <= 0 || rows * cols > 100'000'000L)
        throw detail::parseError(source, lineNo, "invalid grid dimensions");
      if (!(scale > 0)) throw detail::parseError(source, lineNo, "scale must be positive");
      heights.reserve(static_cast<std::size_t>(rows * cols));
      haveHeader = true;
      continue;
    }
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() || !std::isfinite(v))
        throw detail::parseError(source, lineNo, "bad height value '" + tok + "'");
      if (static_cast<long>(heights.size()) == rows * cols)
        throw detail::parseError(source, lineNo, "more heights than rows*cols");
      heights.push_back(v);
    }
  }
  if (!haveHeader) throw detail::parseError(source, lineNo, "missing header");
  if (static_cast<long>(heights.size()) != rows * cols)
    throw detail::parseError(source, lineNo,
                             "expected " + std::to_string(rows * cols) + " heights, found " +
                                 std::to_string(heights.size()));
  return HeightField(static_cast<int>(rows), static_cast<int>(cols), scale, std::move(heights),
                     origin);
}

inline std::string formatHeightFieldText(const HeightField& field) {
  std::ostringstream out;
  out << std::setprecision(17);
  const Vec3 o = field.origin();
  out << field.rows() << ' ' << field.cols() << ' ' << field.scale() << ' ' << o.x << ' ' << o.y
      << ' ' << o.z << '\n';
  for (int i = 0; i < field.rows(); ++i) {
    for (int j = 0; j < field.cols(); ++j) out << (j ? " " : "") << field.cell(i, j);
    out << '\n';
  }
  return out.str();
}

// PGM height map (P2 ASCII or P5 binary, maxval <= 65535). Recognised header
// comments, each on its own line before the raster:
//   # height <min> <max>        gray g -> min + (max - min) * g / maxval   (default 0 1)
//   # scale <samples per meter> (default 10)
//   # origin <x> <y> <z>        (default 0 0 0)
// Image row r, column c is cell (i = r, j = c): image height = rows, width = cols.
inline HeightField parseHeightFieldPgm(const std::string& data,
                                       const std::string& source = "<pgm>") {
  std::size_t pos = 0;
  int lineNo = 1;
  double hmin = 0.0, hmax = 1.0, scale = 10.0;
  Vec3 origin;

  auto skipSpaceAndComments = [&]() {
    while (pos < data.size()) {
      const char c = data[pos];
      if (c == '#') {
        const auto eol = data.find('\n', pos);
        const std::string comment =
            data.substr(pos + 1, eol == std::string::npos ? std::string::npos : eol - pos - 1);
        std::istringstream cs(comment);
        std::string key;
        cs >> key;
        bool ok = true;
        if (key == "height") ok = static_cast<bool>(cs >> hmin >> hmax);
        else if (key == "scale") ok = static_cast<bool>(cs >> scale);
        else if (key == "origin") ok = static_cast<bool>(cs >> origin.x >> origin.y >> origin.z);
        if (!ok) throw detail::parseError(source, lineNo, "malformed '" + key + "' comment");
        pos = eol == std::string::npos ? data.size() : eol;
      } else if (c == '\n') {
        ++lineNo;
        ++pos;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto readToken = [&]() {
    skipSpaceAndComments();
    const std::size_t begin = pos;
    while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos])) &&
           data[pos] != '#')
      ++pos;
    if (begin == pos) throw detail::parseError(source, lineNo, "unexpected end of header");
    return data.substr(begin, pos - begin);
  };
  auto readInt = [&](const char* what) {
    const std::string tok = readToken();
    std::size_t used = 0;
    long v = -1;
    try {
      v = std::stol(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size() || v < 0)
      throw detail::parseError(source, lineNo, std::string("bad ") + what + " '" + tok + "'");
    return v;
  };

  const std::string magic = readToken();
  if (magic != "P2" && magic != "P5")
    throw detail::parseError(source, lineNo, "not a PGM file (magic '" + magic + "')");
  const long width = readInt("width");
  const long height = readInt("height");
  const long maxval = readInt("maxval");
  if (width <= 0 || height <= 0 || width * height > 100'000'000L)
    throw detail::parseError(source, lineNo, "invalid image size");
  if (maxval <= 0 || maxval > 65535) throw detail::parseError(source, lineNo, "invalid maxval");
  if (!(scale > 0)) throw detail::parseError(source, lineNo, "scale must be positive");

  std::vector<double> heights;
  heights.reserve(static_cast<std::size_t>(width * height));
  auto toHeight = [&](long g) {
    if (g > maxval) throw detail::parseError(source, lineNo, "gray value exceeds maxval");
    return hmin + (hmax - hmin) * static_cast<double>(g) / static_cast<double>(maxval);
  };
  if (magic == "P2") {
    for (long k = 0; k < width * height; ++k) heights.push_back(toHeight(readInt("gray value")));
  } else {
    // Exactly one whitespace byte separates maxval from the raster.
    if (pos >= data.size()) throw detail::parseError(source, lineNo, "missing raster");
    ++pos;
    const std::size_t bytesPer = maxval > 255 ? 2 : 1;
    const std::size_t need = static_cast<std::size_t>(width * height) * bytesPer;
    if (data.size() - pos < need) throw detail::parseError(source, lineNo, "truncated raster");
    for (long k = 0; k < width * height; ++k) {
      const auto* p = reinterpret_cast<const unsigned char*>(data.data() + pos + k * bytesPer);
      const long g = bytesPer == 2 ? (long(p[0]) << 8) | p[1] : long(p[0]);
      heights.push_back(toHeight(g));
    }
  }
  return HeightField(static_cast<int>(height), static_cast<int>(width), scale, std::move(heights),
                     origin);
}

/// Dispatches on content: PGM magic or the text grid format.
inline HeightField loadHeightField(const std::string& path) {
  const std::string data = detail::readWholeFile(path);
  if (data.size() >= 2 && data[0] == 'P' && (data[1] == '2' || data[1] == '5'))
    return parseHeightFieldPgm(data, path);
  return parseHeightFieldText(data, path);
}

}  // namespace pcsim
