#pragma once

#include "mmw/eval/confusion.hpp"
#include "mmw/eval/heldout.hpp"
#include "mmw/eval/report.hpp"
