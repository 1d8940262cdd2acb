#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pcsim/dynamics.hpp"
#include "pcsim/error.hpp"

namespace pcsim {

// Trajectory text format, one record per simulated step:
//   # pcsim-trajectory 1
//   # dt <seconds> joints <n> sensors <m>
//   step time cog_x cog_y cog_z yaw j0 .. j(n-1) sensors
//   <step> <time> <cog_x> <cog_y> <cog_z> <yaw> <joint angles...> <bits>
// Reals are printed with %.17g; <bits> holds one 0/1 character per contact
// sensor ("-" when the robot has none). `step` counts from 1 after the first step.
class TrajectoryWriter {
 public:
  explicit TrajectoryWriter(std::ostream& out) : out_(&out) {}

  void header(const Simulation& sim) {
    *out_ << "# pcsim-trajectory 1\n"
          << "# dt " << num(sim.config().dt) << " joints " << sim.model().jointCount()
          << " sensors " << sim.model().contactSensorSegments().size() << "\n"
          << "step time cog_x cog_y cog_z yaw";
    for (std::size_t j = 0; j < sim.model().jointCount(); ++j) *out_ << " j" << j;
    *out_ << " sensors\n";
  }

  void record(const Simulation& sim) {
    const PoseState& s = sim.state();
    const Vec3 cog = sim.centerOfGravity();
    std::string line = std::to_string(s.stepCounter) + " " +
                       num(static_cast<double>(s.stepCounter) * sim.config().dt) + " " +
                       num(cog.x) + " " + num(cog.y) + " " + num(cog.z) + " " +
                       num(bodyYaw(s.base.rotation));
    for (double a : s.jointAngles) line += " " + num(a);
    line += " ";
    if (s.sensors.footContacts.empty()) line += "-";
    for (auto bit : s.sensors.footContacts) line += bit ? '1' : '0';
    *out_ << line << '\n';
  }

 private:
  static std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }
  std::ostream* out_;
};

struct TrajectoryRow {
  std::int64_t step = 0;
  double time = 0.0;
  Vec3 cog;
  double yaw = 0.0;
  std::vector<double> joints;
  std::string sensors;
};

struct Trajectory {
  double dt = 0.0;
  std::size_t joints = 0;
  std::size_t sensors = 0;
  std::vector<TrajectoryRow> rows;
};

inline Trajectory parseTrajectory(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Trajectory t;
  int lineNo = 0;
  auto fail = [&](const std::string& msg) {
    return SimError(ErrorCode::ParseError, "trajectory line " + std::to_string(lineNo) + ": " + msg);
  };
  bool sawMagic = false, sawMeta = false, sawColumns = false;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!sawMagic) {
      if (line != "# pcsim-trajectory 1") throw fail("missing format line");
      sawMagic = true;
      continue;
    }
    if (!sawMeta) {
      std::istringstream ls(line);
      std::string hash, kdt, kj, ks;
      if (!(ls >> hash >> kdt >> t.dt >> kj >> t.joints >> ks >> t.sensors) || hash != "#" ||
          kdt != "dt" || kj != "joints" || ks != "sensors")
        throw fail("bad metadata line");
      sawMeta = true;
      continue;
    }
    if (!sawColumns) {
      if (line.rfind("step time", 0) != 0) throw fail("missing column header");
      sawColumns = true;
      continue;
    }
    std::istringstream ls(line);
    TrajectoryRow r;
    if (!(ls >> r.step >> r.time >> r.cog.x >> r.cog.y >> r.cog.z >> r.yaw))
      throw fail("truncated record");
    r.joints.resize(t.joints);
    for (auto& a : r.joints)
      if (!(ls >> a)) throw fail("missing joint angle");
    if (!(ls >> r.sensors)) throw fail("missing sensor bits");
    const std::size_t expectBits = t.sensors == 0 ? 1 : t.sensors;
    if (r.sensors.size() != expectBits) throw fail("sensor bit count mismatch");
    std::string extra;
    if (ls >> extra) throw fail("trailing data");
    t.rows.push_back(std::move(r));
  }
  if (!sawColumns) throw fail("incomplete header");
  return t;
}

// Scene dump for external plotting: one block per frame,
//   frame <step> <time> <point count>
//   x y z          (world position of every mass point, model order)
inline void writeSceneFrame(std::ostream& out, const Simulation& sim) {
  const PoseState& s = sim.state();
  char buf[128];
  std::snprintf(buf, sizeof buf, "frame %lld %.17g %zu\n", static_cast<long long>(s.stepCounter),
                static_cast<double>(s.stepCounter) * sim.config().dt, s.worldPoints.size());
  out << buf;
  for (const auto& p : s.worldPoints) {
    std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g\n", p.x, p.y, p.z);
    out << buf;
  }
}

}  // namespace pcsim
