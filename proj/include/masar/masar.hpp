#ifndef MASAR_MASAR_HPP
#define MASAR_MASAR_HPP

#include "masar/constants.hpp"
#include "masar/error.hpp"
#include "masar/spin_dynamics.hpp"
#include "masar/cavity_photon.hpp"
#include "masar/receiver_noise.hpp"
#include "masar/pump.hpp"
#include "masar/integrator.hpp"
#include "masar/epochs.hpp"
#include "masar/epr_analysis.hpp"
#include "masar/config.hpp"
#include "masar/csv.hpp"

#endif
