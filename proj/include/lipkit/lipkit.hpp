#ifndef LIPKIT_LIPKIT_HPP
#define LIPKIT_LIPKIT_HPP

#include "lipkit/approx.hpp"
#include "lipkit/blend.hpp"
#include "lipkit/envelope.hpp"
#include "lipkit/error.hpp"
#include "lipkit/extension.hpp"
#include "lipkit/format.hpp"
#include "lipkit/function.hpp"
#include "lipkit/metric.hpp"
#include "lipkit/partition.hpp"
#include "lipkit/verify.hpp"

#endif
