#ifndef PSIW_PSIW_HPP
#define PSIW_PSIW_HPP

#include "branch_solver.hpp"
#include "continuation.hpp"
#include "core_map.hpp"
#include "domain_geometry.hpp"
#include "errors.hpp"
#include "parameter.hpp"
#include "records.hpp"
#include "verify.hpp"

#endif
