#pragma once

#include "glr/csr.hpp"
#include "glr/dataset_io.hpp"
#include "glr/dense.hpp"
#include "glr/evaluation.hpp"
#include "glr/graph.hpp"
#include "glr/homophily.hpp"
#include "glr/models.hpp"
#include "glr/report.hpp"
#include "glr/rng.hpp"
#include "glr/softmax.hpp"
#include "glr/spectral.hpp"
