#pragma once

#include "readorder/model/checkpoint.hpp"
#include "readorder/model/config.hpp"
#include "readorder/model/decode.hpp"
#include "readorder/model/mask.hpp"
#include "readorder/model/network.hpp"
#include "readorder/model/optimizer.hpp"
#include "readorder/model/packing.hpp"
#include "readorder/model/pointer.hpp"
#include "readorder/model/trainer.hpp"
