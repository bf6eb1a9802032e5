#pragma once

#include <rankrec/cluster.hpp>
#include <rankrec/config.hpp>
#include <rankrec/detection.hpp>
#include <rankrec/error.hpp>
#include <rankrec/ranking.hpp>
#include <rankrec/reassignment.hpp>
#include <rankrec/redistribution.hpp>
#include <rankrec/report.hpp>
#include <rankrec/simulator.hpp>
