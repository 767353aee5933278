#pragma once

#include <string>

#include <json.hpp>

#include "gfc/spectrum.hpp"

namespace gfc {

// Channel spec object: {"p": [p1..pk], "q": [q1..qk], "sigma2": number}.
RationalSpectrum spectrum_from_json(const nlohmann::json& j);
RationalSpectrum load_spectrum(const std::string& path);
nlohmann::ordered_json spectrum_to_json(const RationalSpectrum& spec);

}  // namespace gfc
