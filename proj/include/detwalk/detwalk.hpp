#pragma once

#include "detwalk/analysis.hpp"
#include "detwalk/chain.hpp"
#include "detwalk/chains.hpp"
#include "detwalk/engine.hpp"
#include "detwalk/io.hpp"
#include "detwalk/mixing.hpp"
#include "detwalk/parallel.hpp"
#include "detwalk/router.hpp"
