#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pcsim/builder.hpp"
#include "pcsim/error.hpp"

namespace pcsim {

// Robot description script: one builder call per line, '#' starts a comment,
// tokens are whitespace separated, body and joint ids count from 0 in
// creation order. Colors are optional trailing "r g b" triples in [0, 1].
//
//   tessellation <ring_points> <sphere_subdivision>   (only before the first body)
//   simplify <mode>
//   point    x y z m [r g b]
//   box      w h d x y z m [r g b]
//   cylinder x1 y1 z1 x2 y2 z2 radius m [r g b]
//   sphere   x y z radius m [r g b]
//   ray      x1 y1 z1 x2 y2 z2 [r g b]
//   connect  body1 body2
//   joint    body1 body2 anchor_x anchor_y anchor_z axis_x axis_y axis_z
//   limits   joint min max
//   move     body tx ty tz
//   rotate   body alpha beta gamma
//   sensor   body
//
// The model is finalized at end of input.

namespace detail {

struct ScriptLine {
  std::string source;
  int line = 0;
  std::string command;
  std::vector<std::string> args;

  SimError error(const std::string& msg, ErrorCode code = ErrorCode::ParseError) const {
    return SimError(code, source + ":" + std::to_string(line) + ": " + msg);
  }

  double number(std::size_t i) const {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(args.at(i), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != args.at(i).size() || !std::isfinite(v))
      throw error("argument " + std::to_string(i + 1) + " of '" + command + "' is not a number: '" +
                  args.at(i) + "'");
    return v;
  }

  int integer(std::size_t i) const {
    const double v = number(i);
    if (v != std::floor(v) || std::abs(v) > 1e9)
      throw error("argument " + std::to_string(i + 1) + " of '" + command +
                  "' must be an integer");
    return static_cast<int>(v);
  }

  // Accepts exactly `fixed` arguments, optionally followed by a color.
  Color arity(std::size_t fixed, bool colorAllowed) const {
    if (args.size() == fixed) return {};
    if (colorAllowed && args.size() == fixed + 3)
      return {number(fixed), number(fixed + 1), number(fixed + 2)};
    throw error("'" + command + "' expects " + std::to_string(fixed) + " arguments" +
                (colorAllowed ? " (+3 for color)" : "") + ", got " + std::to_string(args.size()));
  }
};

}  // namespace detail

inline RobotModel parseRobotScript(const std::string& text, const std::string& source = "<robot>") {
  std::istringstream in(text);
  std::string raw;
  int lineNo = 0;
  BuildOptions options;
  std::vector<detail::ScriptLine> lines;
  while (std::getline(in, raw)) {
    ++lineNo;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    detail::ScriptLine l{source, lineNo, {}, {}};
    if (!(ls >> l.command)) continue;
    for (std::string tok; ls >> tok;) l.args.push_back(tok);
    lines.push_back(std::move(l));
  }

  std::size_t first = 0;
  if (!lines.empty() && lines[0].command == "tessellation") {
    lines[0].arity(2, false);
    options.cylinderRingPoints = lines[0].integer(0);
    options.sphereSubdivision = lines[0].integer(1);
    first = 1;
  }
  RobotBuilder b = [&] {
    try {
      return RobotBuilder(options);
    } catch (const SimError& e) {
      throw lines[0].error(e.what(), e.code());
    }
  }();

  for (std::size_t k = first; k < lines.size(); ++k) {
    const auto& l = lines[k];
    const auto& c = l.command;
    try {
      if (c == "simplify") {
        l.arity(1, false);
        b.simplifyMode(l.integer(0));
      } else if (c == "point") {
        const Color col = l.arity(4, true);
        b.createPoint(l.number(0), l.number(1), l.number(2), l.number(3), col);
      } else if (c == "box") {
        const Color col = l.arity(7, true);
        b.createBox(l.number(0), l.number(1), l.number(2), l.number(3), l.number(4), l.number(5),
                    l.number(6), col);
      } else if (c == "cylinder") {
        const Color col = l.arity(8, true);
        b.createCylinder(l.number(0), l.number(1), l.number(2), l.number(3), l.number(4),
                         l.number(5), l.number(6), l.number(7), col);
      } else if (c == "sphere") {
        const Color col = l.arity(5, true);
        b.createSphere(l.number(0), l.number(1), l.number(2), l.number(3), l.number(4), col);
      } else if (c == "ray") {
        const Color col = l.arity(6, true);
        b.createRay(l.number(0), l.number(1), l.number(2), l.number(3), l.number(4), l.number(5),
                    col);
      } else if (c == "connect") {
        l.arity(2, false);
        b.connectBodies(l.integer(0), l.integer(1));
      } else if (c == "joint") {
        l.arity(8, false);
        b.createJoint(l.integer(0), l.integer(1), l.number(2), l.number(3), l.number(4),
                      l.number(5), l.number(6), l.number(7));
      } else if (c == "limits") {
        l.arity(3, false);
        b.setJointLimits(l.integer(0), l.number(1), l.number(2));
      } else if (c == "move") {
        l.arity(4, false);
        b.moveBody(l.integer(0), l.number(1), l.number(2), l.number(3));
      } else if (c == "rotate") {
        l.arity(4, false);
        b.rotateBody(l.integer(0), l.number(1), l.number(2), l.number(3));
      } else if (c == "sensor") {
        l.arity(1, false);
        b.addContactSensor(l.integer(0));
      } else if (c == "tessellation") {
        throw l.error("'tessellation' must be the first command");
      } else {
        throw l.error("unknown command '" + c + "'");
      }
    } catch (const SimError& e) {
      if (e.code() == ErrorCode::ParseError) throw;
      throw l.error(e.what(), e.code());
    }
  }
  try {
    return b.finalizeConstruction();
  } catch (const SimError& e) {
    throw SimError(e.code(), source + ":" + std::to_string(lineNo) + ": " + e.what());
  }
}

inline RobotModel loadRobotScript(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SimError(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parseRobotScript(ss.str(), path);
}

}  // namespace pcsim
