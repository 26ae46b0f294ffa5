#pragma once

#include "mmw/kitsune/autoencoder.hpp"
#include "mmw/kitsune/ensemble.hpp"
#include "mmw/kitsune/feature_map.hpp"
#include "mmw/kitsune/model.hpp"
#include "mmw/kitsune/regression.hpp"
