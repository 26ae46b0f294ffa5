#pragma once

#include "mmw/lstm/model.hpp"
#include "mmw/lstm/train.hpp"
#include "mmw/lstm/window.hpp"
