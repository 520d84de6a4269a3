#pragma once

// Umbrella header.

#include "physdepth/camera.hpp"
#include "physdepth/common.hpp"
#include "physdepth/depth_io.hpp"
#include "physdepth/errors.hpp"
#include "physdepth/evaluation.hpp"
#include "physdepth/ingest.hpp"
#include "physdepth/inpaint.hpp"
#include "physdepth/losses.hpp"
#include "physdepth/physics_depth.hpp"
#include "physdepth/png_io.hpp"
#include "physdepth/raster.hpp"
#include "physdepth/scene.hpp"
#include "physdepth/synth.hpp"
