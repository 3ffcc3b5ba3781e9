// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "baselines.hpp"
#include "channel.hpp"
#include "config.hpp"
#include "error.hpp"
#include "experiment.hpp"
#include "harvester.hpp"
#include "optimizer.hpp"
#include "posynomial.hpp"
#include "rectifier.hpp"
#include "units.hpp"
#include "waveform.hpp"
