#pragma once

// Everything except the HTTP service (obsweight/service.hpp), which pulls in
// cpp-httplib.

#include "obsweight/error.hpp"
#include "obsweight/taxonomy.hpp"
#include "obsweight/ahp.hpp"
#include "obsweight/weight_tables.hpp"
#include "obsweight/time.hpp"
#include "obsweight/observability.hpp"
#include "obsweight/ingestion.hpp"
#include "obsweight/history.hpp"
#include "obsweight/fixtures.hpp"
#include "obsweight/report.hpp"
