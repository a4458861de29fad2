#pragma once

/// Umbrella header: pulls in the whole public surface.

#include "relnet/types.hpp"
#include "relnet/spd.hpp"
#include "relnet/graph.hpp"
#include "relnet/drawing.hpp"
#include "relnet/network.hpp"
#include "relnet/laplacian.hpp"
#include "relnet/estimator.hpp"
#include "relnet/electrical.hpp"
#include "relnet/rng.hpp"
#include "relnet/netgen.hpp"
#include "relnet/delaunay.hpp"
#include "relnet/geometry.hpp"
#include "relnet/embed.hpp"
#include "relnet/measurements.hpp"
#include "relnet/experiments.hpp"
#include "relnet/io.hpp"
