#pragma once

#include "taskmix/error.hpp"
#include "taskmix/rng.hpp"
#include "taskmix/registry.hpp"
#include "taskmix/samplers.hpp"
#include "taskmix/taxonomy.hpp"
#include "taskmix/curriculum.hpp"
#include "taskmix/features.hpp"
#include "taskmix/model.hpp"
#include "taskmix/trainer.hpp"
#include "taskmix/metrics.hpp"
#include "taskmix/synth.hpp"
#include "taskmix/report.hpp"
#include "taskmix/experiment.hpp"
