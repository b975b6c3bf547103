#pragma once

#include "fluidtop/body.hpp"
#include "fluidtop/dynamics.hpp"
#include "fluidtop/equilibria.hpp"
#include "fluidtop/galerkin.hpp"
#include "fluidtop/normal_form.hpp"
#include "fluidtop/omega_limit.hpp"
#include "fluidtop/spectral.hpp"

#include <nlohmann/json.hpp>

namespace fluidtop {

// Structured-text records with stable key names.

[[nodiscard]] nlohmann::json to_record(const Vec3& v);
[[nodiscard]] nlohmann::json to_record(const BodyParams& p);
[[nodiscard]] nlohmann::json to_record(const ValidationReport& r);
[[nodiscard]] nlohmann::json to_record(const GalerkinBasis& b);
[[nodiscard]] nlohmann::json to_record(const IntegrationStats& s);
[[nodiscard]] nlohmann::json to_record(const InvariantReport& r);
[[nodiscard]] nlohmann::json to_record(const EnergyReport& r);
[[nodiscard]] nlohmann::json to_record(const LyapunovReport& r);
[[nodiscard]] nlohmann::json to_record(const Condition& c);
[[nodiscard]] nlohmann::json to_record(const GenericityFlags& g);
[[nodiscard]] nlohmann::json to_record(const DataConditionFlags& d);
[[nodiscard]] nlohmann::json to_record(const SteadyState& s, const BodyParams& params);
[[nodiscard]] nlohmann::json to_record(const SpectralSplit& s);
[[nodiscard]] nlohmann::json to_record(const SemisimpleResult& s);
[[nodiscard]] nlohmann::json to_record(const Classification& c);
[[nodiscard]] nlohmann::json to_record(const KernelResidual& k);
[[nodiscard]] nlohmann::json to_record(const DecayCertificate& c);
[[nodiscard]] nlohmann::json to_record(const Flattening& f);
[[nodiscard]] nlohmann::json to_record(const LimitCandidate& c);
[[nodiscard]] nlohmann::json to_record(const LimitCandidateSet& s);
[[nodiscard]] nlohmann::json to_record(const MatchReport& m);
[[nodiscard]] nlohmann::json to_record(const ToyReport& t);

/// Non-finite numbers are written as strings ("inf", "-inf", "nan").
[[nodiscard]] nlohmann::json number(double v);

}  // namespace fluidtop
