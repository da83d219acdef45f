#ifndef DLH_DLH_HPP
#define DLH_DLH_HPP

#include "dlh/config.hpp"
#include "dlh/errors.hpp"
#include "dlh/fields.hpp"
#include "dlh/hardy.hpp"
#include "dlh/integrate.hpp"
#include "dlh/lambda_system.hpp"
#include "dlh/norms.hpp"
#include "dlh/proof_fields.hpp"
#include "dlh/sharpness.hpp"

#endif
