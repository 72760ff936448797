#pragma once

// Histogram clustering under exact Wasserstein distances: optimal
// transport via a transportation simplex, entropic barycenters, sparse
// simplex projection with support shrinking, and the k-means drivers and
// experiment tooling built on top.

#include "sspw/barycenter.hpp"
#include "sspw/clustering.hpp"
#include "sspw/dataio.hpp"
#include "sspw/errors.hpp"
#include "sspw/evaluation.hpp"
#include "sspw/experiment.hpp"
#include "sspw/histogram.hpp"
#include "sspw/parallel.hpp"
#include "sspw/projection.hpp"
#include "sspw/random.hpp"
#include "sspw/transport.hpp"
