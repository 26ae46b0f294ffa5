#pragma once

#include "mmw/features/matrix.hpp"
#include "mmw/features/mrmr.hpp"
#include "mmw/features/mutual_information.hpp"
#include "mmw/features/pca.hpp"
#include "mmw/features/pipeline.hpp"
#include "mmw/features/standardizer.hpp"
