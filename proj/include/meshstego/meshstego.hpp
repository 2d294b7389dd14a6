#pragma once

#include "distortion.hpp"
#include "gibbs.hpp"
#include "layered.hpp"
#include "mesh.hpp"
#include "parallel.hpp"
#include "quantize.hpp"
#include "stc.hpp"
#include "sym3.hpp"
#include "tensor_features.hpp"
#include "vec3.hpp"
