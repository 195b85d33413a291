#pragma once

#include "overlinkd/core/parallel.hpp"
#include "overlinkd/core/schedule.hpp"
#include "overlinkd/core/se3.hpp"
#include "overlinkd/core/types.hpp"
#include "overlinkd/curve/bspline.hpp"
#include "overlinkd/curve/discrete_curve.hpp"
#include "overlinkd/curve/metrics.hpp"
#include "overlinkd/dynamics/dynamics.hpp"
#include "overlinkd/dynamics/keypoints.hpp"
#include "overlinkd/dynamics/load.hpp"
#include "overlinkd/geometry/benchmarks.hpp"
#include "overlinkd/geometry/clearance.hpp"
#include "overlinkd/geometry/collision.hpp"
#include "overlinkd/geometry/constraints.hpp"
#include "overlinkd/geometry/design.hpp"
#include "overlinkd/geometry/energy.hpp"
#include "overlinkd/geometry/hermite.hpp"
#include "overlinkd/geometry/pipeline.hpp"
#include "overlinkd/geometry/solver.hpp"
#include "overlinkd/io/csv.hpp"
#include "overlinkd/io/formats.hpp"
#include "overlinkd/io/json.hpp"
#include "overlinkd/io/mesh.hpp"
#include "overlinkd/kinematics/bennett.hpp"
#include "overlinkd/kinematics/dh.hpp"
#include "overlinkd/kinematics/line.hpp"
#include "overlinkd/kinematics/loop.hpp"
#include "overlinkd/kinematics/motion.hpp"
#include "overlinkd/synth/benchmarks.hpp"
#include "overlinkd/synth/cmaes.hpp"
#include "overlinkd/synth/optimize.hpp"
#include "overlinkd/synth/problem.hpp"
