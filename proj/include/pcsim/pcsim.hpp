#pragma once

#include "pcsim/bench.hpp"
#include "pcsim/builder.hpp"
#include "pcsim/dynamics.hpp"
#include "pcsim/error.hpp"
#include "pcsim/evolution.hpp"
#include "pcsim/evolution_io.hpp"
#include "pcsim/friction.hpp"
#include "pcsim/geom.hpp"
#include "pcsim/hexapod.hpp"
#include "pcsim/manifest.hpp"
#include "pcsim/model.hpp"
#include "pcsim/robot_script.hpp"
#include "pcsim/terrain.hpp"
#include "pcsim/terrain_io.hpp"
#include "pcsim/trajectory.hpp"
#include "pcsim/vm.hpp"
#include "pcsim/vm_asm.hpp"
