#pragma once

#include "rotspec/approx.hpp"
#include "rotspec/contfrac.hpp"
#include "rotspec/dense_matrix.hpp"
#include "rotspec/error.hpp"
#include "rotspec/exact.hpp"
#include "rotspec/matmodel.hpp"
#include "rotspec/parallel.hpp"
#include "rotspec/pseudospectra.hpp"
#include "rotspec/spectral.hpp"
