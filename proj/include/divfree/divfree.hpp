#pragma once

#include "divfree/dual.hpp"
#include "divfree/exterior_algebra.hpp"
#include "divfree/expression.hpp"
#include "divfree/field_verification.hpp"
#include "divfree/grid_field.hpp"
#include "divfree/interpolation.hpp"
#include "divfree/lagrangian.hpp"
#include "divfree/linalg.hpp"
#include "divfree/manufactured.hpp"
#include "divfree/models.hpp"
#include "divfree/registry.hpp"
#include "divfree/report.hpp"
#include "divfree/symmetry_invariance.hpp"
#include "divfree/tensor_assembly.hpp"
