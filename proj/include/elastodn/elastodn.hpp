#ifndef ELASTODN_ELASTODN_HPP
#define ELASTODN_ELASTODN_HPP

#include "boundary_symbol.hpp"
#include "commands.hpp"
#include "errors.hpp"
#include "laplace_bridge.hpp"
#include "reconstruction.hpp"
#include "sampling.hpp"
#include "serialization.hpp"
#include "tensor_core.hpp"

#endif // ELASTODN_ELASTODN_HPP
