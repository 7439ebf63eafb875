// SPDX-License-Identifier: Apache-2.0
//
// rislink - joint subcarrier matching and RIS passive beamforming for
// OFDM decode-and-forward relaying.
// ------------------------------------------------------------------------

#pragma once

#include "config.hpp"
#include "channel.hpp"
#include "snr_model.hpp"
#include "assignment.hpp"
#include "relaxation.hpp"
#include "matching.hpp"
#include "beamforming.hpp"
#include "optimizer.hpp"
#include "harness.hpp"
