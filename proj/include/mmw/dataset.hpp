#pragma once

#include "mmw/dataset/counters.hpp"
#include "mmw/dataset/csv.hpp"
#include "mmw/dataset/dataset.hpp"
#include "mmw/dataset/labels.hpp"
#include "mmw/dataset/schema.hpp"
#include "mmw/dataset/split.hpp"
#include "mmw/dataset/synth.hpp"
