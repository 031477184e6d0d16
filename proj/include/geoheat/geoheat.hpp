#pragma once

// Parallel, scalable geodesic distances on manifold triangle meshes:
// breadth-first Gauss-Seidel heat diffusion, ADMM correction of the
// normalized heat gradient into an integrable field (face- or edge-based),
// and breadth-first integration, plus reference solvers and error metrics.

#include "geoheat/bfs.hpp"
#include "geoheat/common.hpp"
#include "geoheat/diffusion.hpp"
#include "geoheat/grad_edge.hpp"
#include "geoheat/grad_face.hpp"
#include "geoheat/integrate.hpp"
#include "geoheat/mesh.hpp"
#include "geoheat/mesh_io.hpp"
#include "geoheat/parallel.hpp"
#include "geoheat/reference.hpp"
#include "geoheat/report.hpp"
#include "geoheat/subdivide.hpp"
