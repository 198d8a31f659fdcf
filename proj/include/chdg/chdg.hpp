#pragma once

#include "chdg/assembly.hpp"
#include "chdg/basis.hpp"
#include "chdg/config.hpp"
#include "chdg/diagnostics.hpp"
#include "chdg/driver.hpp"
#include "chdg/io.hpp"
#include "chdg/mesh.hpp"
#include "chdg/model.hpp"
#include "chdg/quadrature.hpp"
#include "chdg/solver.hpp"
#include "chdg/space.hpp"
#include "chdg/types.hpp"
