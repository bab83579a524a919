/**
 * @file bnsobol.hpp
 * @brief Umbrella header.
 */
#pragma once

#include "bnsobol/error.hpp"
#include "bnsobol/factor.hpp"
#include "bnsobol/graph.hpp"
#include "bnsobol/ingest.hpp"
#include "bnsobol/model.hpp"
#include "bnsobol/network.hpp"
#include "bnsobol/oracle.hpp"
#include "bnsobol/report.hpp"
#include "bnsobol/sobol.hpp"
#include "bnsobol/sobol_report.hpp"
