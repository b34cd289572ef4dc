#pragma once

#include "svwhf/error.hpp"
#include "svwhf/rational.hpp"
#include "svwhf/polymat.hpp"
#include "svwhf/whf.hpp"
#include "svwhf/dual.hpp"
#include "svwhf/densities.hpp"
#include "svwhf/model.hpp"
#include "svwhf/filtering.hpp"
#include "svwhf/likelihood.hpp"
#include "svwhf/optim.hpp"
#include "svwhf/diagnostics.hpp"
#include "svwhf/estimate.hpp"
#include "svwhf/select.hpp"
#include "svwhf/io.hpp"
