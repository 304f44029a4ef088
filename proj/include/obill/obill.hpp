#pragma once
// Everything: space forms, geodesic spaces, tables, billiard map, Klein
// constructions, verification suites and report output.

#include "obill/report_io.hpp"
