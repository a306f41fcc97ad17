#pragma once

#include <string>

#include <json.hpp>

#include "entroport/variational.hpp"

namespace entroport {

/// JSON report for an optimized weight curve. Key set is part of the
/// format contract: w_kind, gamma, constraints, lambda_eq_weight,
/// lambda_optimal, q_samples.
inline nlohmann::ordered_json premium_report_json(WeightKind w_kind, double gamma,
                                                  const ConstraintSet& constraints,
                                                  const OptimalCurve& opt,
                                                  double sample_lo = -3.0,
                                                  double sample_hi = 3.0,
                                                  double sample_step = 0.1) {
    nlohmann::ordered_json report;
    report["w_kind"] = to_string(w_kind);
    report["gamma"] = gamma;
    report["constraints"]["q_floor"] = constraints.q_floor;
    if (constraints.ratio) {
        report["constraints"]["A"] = constraints.ratio->first;
        report["constraints"]["B"] = constraints.ratio->second;
    }
    report["lambda_eq_weight"] = opt.equal_weight_value;
    report["lambda_optimal"] = opt.value;
    nlohmann::ordered_json samples = nlohmann::ordered_json::array();
    const int n = static_cast<int>(std::round((sample_hi - sample_lo) / sample_step));
    for (int k = 0; k <= n; ++k) {
        const double y = sample_lo + k * sample_step;
        samples.push_back({y, opt.q(y)});
    }
    report["q_samples"] = samples;
    return report;
}

} // namespace entroport
