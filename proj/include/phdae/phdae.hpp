#pragma once

#include <phdae/core.hpp>
#include <phdae/examples.hpp>
#include <phdae/linalg.hpp>
#include <phdae/monotone.hpp>
#include <phdae/simulate.hpp>
#include <phdae/structures.hpp>
#include <phdae/systemfile.hpp>
#include <phdae/systems.hpp>
#include <phdae/transfer.hpp>
