#pragma once

#include "tsvf/circuit.hpp"
#include "tsvf/circuit_json.hpp"
#include "tsvf/ensemble.hpp"
#include "tsvf/errors.hpp"
#include "tsvf/gaussian.hpp"
#include "tsvf/hilbert.hpp"
#include "tsvf/pointer_lab.hpp"
#include "tsvf/projector.hpp"
#include "tsvf/run_record.hpp"
#include "tsvf/scenarios.hpp"
#include "tsvf/state.hpp"
#include "tsvf/two_state.hpp"
#include "tsvf/version.hpp"
