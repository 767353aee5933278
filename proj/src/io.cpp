#include "gfc/io.hpp"

#include <fstream>
#include <stdexcept>

namespace gfc {

RationalSpectrum spectrum_from_json(const nlohmann::json& j) {
  std::vector<double> p, q;
  double sigma2 = 1.0;
  if (j.contains("p")) p = j.at("p").get<std::vector<double>>();
  if (j.contains("q")) q = j.at("q").get<std::vector<double>>();
  if (j.contains("sigma2")) sigma2 = j.at("sigma2").get<double>();
  return RationalSpectrum(p, q, sigma2);
}

RationalSpectrum load_spectrum(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open channel spec: " + path);
  nlohmann::json j;
  in >> j;
  return spectrum_from_json(j);
}

nlohmann::ordered_json spectrum_to_json(const RationalSpectrum& spec) {
  nlohmann::ordered_json j;
  std::vector<double> p(spec.p().begin() + 1, spec.p().end());
  std::vector<double> q(spec.q().begin() + 1, spec.q().end());
  j["p"] = p;
  j["q"] = q;
  j["sigma2"] = spec.sigma2();
  return j;
}

}  // namespace gfc
