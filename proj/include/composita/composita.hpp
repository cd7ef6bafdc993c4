#pragma once

#include "composita/error.hpp"
#include "composita/sphere_geometry.hpp"
#include "composita/ultraspherical.hpp"
#include "composita/harmonic_analysis.hpp"
#include "composita/s2_harmonics.hpp"
#include "composita/zonal_networks.hpp"
#include "composita/gfunction.hpp"
#include "composita/dag_spec.hpp"
#include "composita/deep_approx.hpp"
#include "composita/svg.hpp"
#include "composita/experiment.hpp"
