// Umbrella header.
#pragma once

#include "soblab/common.hpp"
#include "soblab/functionals.hpp"
#include "soblab/geometry.hpp"
#include "soblab/harness.hpp"
#include "soblab/io.hpp"
#include "soblab/manifold.hpp"
#include "soblab/nonlinearity.hpp"
#include "soblab/norms.hpp"
#include "soblab/paraproducts.hpp"
#include "soblab/pde.hpp"
#include "soblab/spectral.hpp"
#include "soblab/symbols.hpp"
