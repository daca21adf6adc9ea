#pragma once

#include <string>

#include "curvelab/curve.hpp"
#include "curvelab/report.hpp"

namespace curvelab {

// Experiment dispatch.  `config` is a flat JSON object whose "subcommand"
// field selects the driver: decay | geometry | decompose-audit | lorentz |
// decouple | operator-probe | sharpness.  Unknown fields are rejected by
// name; omitted fields take documented defaults.  The returned report echoes
// the fully resolved config, so feeding the echo back reproduces the run.
ExperimentReport run_experiment(const Json& config);

// Named curve family used across drivers: "moment" plus three fixed
// analytic perturbations "perturbed-a", "perturbed-b", "perturbed-c".
CurvePtr make_named_curve(const std::string& name, int n);

}  // namespace curvelab
