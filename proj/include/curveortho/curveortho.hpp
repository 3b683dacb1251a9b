#pragma once

#include "core.hpp"
#include "laurent.hpp"
#include "quadrature.hpp"
#include "polynomial.hpp"
#include "curve_geometry.hpp"
#include "weights_szego.hpp"
#include "transforms.hpp"
#include "oracle.hpp"
#include "asymptotics.hpp"
#include "zeros.hpp"
#include "io.hpp"
#include "experiment.hpp"
