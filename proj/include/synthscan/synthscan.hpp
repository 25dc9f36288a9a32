// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "synthscan/blocks.hpp"
#include "synthscan/bvh.hpp"
#include "synthscan/errors.hpp"
#include "synthscan/geometry.hpp"
#include "synthscan/kdtree.hpp"
#include "synthscan/obj.hpp"
#include "synthscan/pointcloud.hpp"
#include "synthscan/scanner.hpp"
#include "synthscan/scene.hpp"
#include "synthscan/survey.hpp"
