#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairlab/bias_models.hpp"
#include "fairlab/distribution.hpp"
#include "fairlab/recovery.hpp"
#include "fairlab/reject.hpp"
#include "fairlab/robustness.hpp"
#include "fairlab/solver.hpp"
#include "fairlab/time_varying.hpp"

namespace fairlab {

using json = nlohmann::json;

// --- JSON ------------------------------------------------------------------

inline json dist_to_json(const DiscreteJointDistribution& dist) {
    json points = json::array();
    for (const auto& atom : dist.atoms()) {
        if (atom.p0 > 0.0)
            points.push_back({{"x", atom.x}, {"a", atom.a}, {"y", 0}, {"p", atom.p0}});
        if (atom.p1 > 0.0)
            points.push_back({{"x", atom.x}, {"a", atom.a}, {"y", 1}, {"p", atom.p1}});
    }
    return json{{"points", points}};
}

inline std::vector<MassPoint> mass_points_from_json(const json& j) {
    if (!j.contains("points") || !j["points"].is_array())
        fail(ErrorCode::io_error, "distribution JSON needs a points array");
    std::vector<MassPoint> points;
    for (const auto& p : j["points"]) {
        MassPoint mp;
        mp.x = p.at("x").get<std::string>();
        mp.a = p.at("a").get<int>();
        mp.y = p.at("y").get<int>();
        mp.p = p.at("p").get<double>();
        points.push_back(std::move(mp));
    }
    return points;
}

inline DiscreteJointDistribution dist_from_json(const json& j) {
    return DiscreteJointDistribution::from_points(mass_points_from_json(j));
}

inline json classifier_to_json(const ClassifierTable& h) {
    json decisions = json::array();
    for (const auto& d : h.decisions())
        decisions.push_back({{"x", d.x}, {"a", d.a}, {"accept", d.accept}});
    return json{{"decisions", decisions}};
}

inline ClassifierTable classifier_from_json(const json& j) {
    if (!j.contains("decisions") || !j["decisions"].is_array())
        fail(ErrorCode::io_error, "classifier JSON needs a decisions array");
    std::vector<ClassifierTable::Decision> dec;
    for (const auto& d : j["decisions"]) {
        if (!d.at("accept").is_number())
            fail(ErrorCode::io_error,
                 "binary classifier decisions must be numeric acceptance "
                 "probabilities");
        dec.push_back({d.at("x").get<std::string>(), d.at("a").get<int>(),
                       d.at("accept").get<double>()});
    }
    return ClassifierTable(std::move(dec));
}

inline json reject_to_json(const RejectClassifier& rej) {
    json decisions = json::array();
    for (const auto& [key, action] : rej.decisions) {
        json entry{{"x", key.first}, {"a", key.second}};
        if (action == RejectAction::abstain)
            entry["accept"] = "reject";
        else
            entry["accept"] = action == RejectAction::one ? 1.0 : 0.0;
        decisions.push_back(entry);
    }
    return json{{"penalty", rej.penalty},
                {"rejection_mass", rej.rejection_mass},
                {"decisions", decisions}};
}

inline json bias_model_to_json(const BiasModel& model) {
    if (const auto* bs = std::get_if<BlumStanglBias>(&model))
        return json{{"model", "blumstangl"},
                    {"beta_p", bs->beta_p},
                    {"beta_n", bs->beta_n},
                    {"nu", bs->nu}};
    if (const auto* lf = std::get_if<LabelFlipBias>(&model))
        return json{{"model", "labelflip"},
                    {"eps1", {lf->eps1[0], lf->eps1[1]}},
                    {"eps0", {lf->eps0[0], lf->eps0[1]}}};
    const auto& ps = std::get<PriorShiftBias>(model);
    return json{{"model", "priorshift"},
                {"base_rates", {ps.target_base_rate[0], ps.target_base_rate[1]}}};
}

inline BiasModel bias_model_from_json(const json& j) {
    const auto kind = j.at("model").get<std::string>();
    if (kind == "blumstangl") {
        BlumStanglBias m{j.at("beta_p").get<double>(), j.at("beta_n").get<double>(),
                         j.at("nu").get<double>()};
        m.validate();
        return m;
    }
    if (kind == "labelflip") {
        LabelFlipBias m;
        for (int a : {0, 1}) {
            m.eps1[a] = j.at("eps1").at(a).get<double>();
            m.eps0[a] = j.at("eps0").at(a).get<double>();
        }
        m.validate();
        return m;
    }
    if (kind == "priorshift") {
        PriorShiftBias m;
        for (int a : {0, 1}) m.target_base_rate[a] = j.at("base_rates").at(a).get<double>();
        m.validate();
        return m;
    }
    fail(ErrorCode::io_error, "unknown bias model '" + kind + "'");
}

inline json schedule_to_json(const BiasSchedule& schedule) {
    json steps = json::array();
    for (const auto& s : schedule.steps)
        steps.push_back({{"beta_p", s.beta_p}, {"beta_n", s.beta_n}, {"nu", s.nu}});
    return json{{"steps", steps},
                {"bounds",
                 {{"beta_p", schedule.bounds.beta_p},
                  {"beta_n", schedule.bounds.beta_n},
                  {"nu", schedule.bounds.nu}}}};
}

inline BiasSchedule schedule_from_json(const json& j) {
    BiasSchedule schedule;
    for (const auto& s : j.at("steps"))
        schedule.steps.push_back({s.at("beta_p").get<double>(),
                                  s.at("beta_n").get<double>(),
                                  s.at("nu").get<double>()});
    if (j.contains("bounds")) {
        schedule.bounds.beta_p = j["bounds"].at("beta_p").get<double>();
        schedule.bounds.beta_n = j["bounds"].at("beta_n").get<double>();
        schedule.bounds.nu = j["bounds"].at("nu").get<double>();
    } else {
        // Tightest bounds consistent with the steps.
        schedule.bounds = {1.0, 1.0, 0.0};
        for (const auto& s : schedule.steps) {
            schedule.bounds.beta_p = std::min(schedule.bounds.beta_p, s.beta_p);
            schedule.bounds.beta_n = std::min(schedule.bounds.beta_n, s.beta_n);
            schedule.bounds.nu = std::max(schedule.bounds.nu, s.nu);
        }
    }
    schedule.validate();
    return schedule;
}

inline json finite_or_null(double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
}

inline json solution_to_json(const LambdaSolution& sol) {
    return json{{"lambda", sol.lambda_star},
                {"t0", finite_or_null(sol.classifier.t[0])},
                {"t1", finite_or_null(sol.classifier.t[1])},
                {"mix0", sol.classifier.boundary_accept[0]},
                {"mix1", sol.classifier.boundary_accept[1]},
                {"gap", sol.achieved_gap},
                {"accuracy", sol.accuracy}};
}

inline json recovery_report_to_json(const RecoveryReport& rep) {
    json conditions = json::object();
    for (const auto& [name, value] : rep.condition_values) conditions[name] = value;
    json out{{"conditions", conditions},
             {"verdict", verdict_name(rep.verdict)},
             {"margin", rep.margin}};
    if (rep.lambda_interval)
        out["lambda_interval"] = {rep.lambda_interval->first,
                                  rep.lambda_interval->second};
    return out;
}

inline json validation_report_to_json(const ValidationReport& rep) {
    json issues = json::array();
    for (const auto& issue : rep.issues)
        issues.push_back(
            {{"code", error_code_name(issue.code)}, {"detail", issue.detail}});
    json eta = json::object();
    for (const auto& [key, value] : rep.eta_table) eta[key] = value;
    json out{{"ok", rep.ok},
             {"total_mass", rep.total_mass},
             {"normalization_error", rep.normalization_error},
             {"group_mass", {rep.group_mass[0], rep.group_mass[1]}},
             {"eta", eta},
             {"issues", issues}};
    for (int a : {0, 1})
        out["base_rate"].push_back(rep.base_rate[a] ? json(*rep.base_rate[a])
                                                    : json(nullptr));
    return out;
}

inline json box_transform_to_json(const BoxTransform& bt) {
    json out = json::array();
    for (int a : {0, 1})
        out.push_back({{"p", bt.group[a].p},
                       {"q", bt.group[a].q},
                       {"r", bt.group[a].r},
                       {"s", bt.group[a].s}});
    return out;
}

inline json sampled_verdict_to_json(const SampledRobustnessVerdict& v) {
    json out{{"pass", v.pass},
             {"verdict_kind", "SAMPLED"},
             {"transforms_checked", v.transforms_checked},
             {"eta_out_of_range_atoms", v.eta_out_of_range_atoms},
             {"tied_transforms", v.tied_transforms},
             {"optimum_index", v.optimum_index}};
    if (v.violating_transform)
        out["violating_transform"] = box_transform_to_json(*v.violating_transform);
    if (v.violating_member) out["violating_member"] = *v.violating_member;
    return out;
}

inline FiniteHypothesisClass hypothesis_class_from_json(const json& j) {
    if (!j.is_array())
        fail(ErrorCode::io_error, "hypothesis class JSON must be an array");
    FiniteHypothesisClass out;
    for (const auto& entry : j) out.members.push_back(classifier_from_json(entry));
    if (out.members.empty())
        fail(ErrorCode::invalid_argument, "hypothesis class is empty");
    return out;
}

inline json hypothesis_class_to_json(const FiniteHypothesisClass& h) {
    json out = json::array();
    for (const auto& member : h.members) out.push_back(classifier_to_json(member));
    return out;
}

// --- CSV -------------------------------------------------------------------

/// Nine significant digits, '.' decimal separator.
inline std::string csv9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

inline std::string verdict_csv(Verdict v) {
    switch (v) {
        case Verdict::yes: return "1";
        case Verdict::no: return "0";
        case Verdict::indeterminate: return "-1";
    }
    return "-1";
}

/// Row-major region table; empirical and agree are -1 when not computed.
inline std::string region_csv(const std::vector<RegionCell>& cells) {
    std::string out = "beta_p,beta_n,cond1,cond2,theory,empirical,agree\n";
    for (const auto& cell : cells) {
        out += csv9(cell.beta_p);
        out += ',';
        out += csv9(cell.beta_n);
        out += ',';
        out += csv9(cell.cond1);
        out += ',';
        out += csv9(cell.cond2);
        out += ',';
        out += verdict_csv(cell.theory);
        out += ',';
        out += cell.empirical ? (*cell.empirical ? "1" : "0") : "-1";
        out += ',';
        out += cell.agree ? (*cell.agree ? "1" : "0") : "-1";
        out += '\n';
    }
    return out;
}

inline std::string pipeline_csv(const std::vector<PipelineStep>& steps) {
    std::string out = "t,recovered,n1,n2,n1_value,n2_value\n";
    for (const auto& step : steps) {
        out += std::to_string(step.t);
        out += ',';
        out += step.recovered ? "1" : "0";
        out += ',';
        out += step.n1 ? (*step.n1 ? "1" : "0") : "-1";
        out += ',';
        out += step.n2 ? (*step.n2 ? "1" : "0") : "-1";
        out += ',';
        out += csv9(step.n1_value);
        out += ',';
        out += csv9(step.n2_value);
        out += '\n';
    }
    return out;
}

} // namespace fairlab
