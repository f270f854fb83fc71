#pragma once

#include "netfunc/error.hpp"
#include "netfunc/util.hpp"
#include "netfunc/netmodel.hpp"
#include "netfunc/equiv.hpp"
#include "netfunc/pgraph.hpp"
#include "netfunc/entropy.hpp"
#include "netfunc/chargraph.hpp"
#include "netfunc/bounds.hpp"
#include "netfunc/codesim.hpp"
#include "netfunc/fixtures.hpp"
#include "netfunc/io.hpp"
