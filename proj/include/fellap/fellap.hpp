#pragma once

#include "fellap/ap.hpp"
#include "fellap/cantor.hpp"
#include "fellap/central.hpp"
#include "fellap/config.hpp"
#include "fellap/csv.hpp"
#include "fellap/errors.hpp"
#include "fellap/fdalg.hpp"
#include "fellap/fellbundle.hpp"
#include "fellap/globalize.hpp"
#include "fellap/group.hpp"
#include "fellap/kernels.hpp"
#include "fellap/linalg.hpp"
#include "fellap/random.hpp"
#include "fellap/report.hpp"
