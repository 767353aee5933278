#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gfc/fbcap.hpp"
#include "gfc/io.hpp"
#include "gfc/nblock.hpp"
#include "gfc/riccati.hpp"
#include "gfc/sksim.hpp"
#include "gfc/waterfill.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr double kLog2 = 0.6931471805599453;

using nlohmann::json;
using nlohmann::ordered_json;

void emit(const ordered_json& doc, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    std::ofstream out(out_path);
    out << doc.dump(2) << "\n";
  }
}

void emit_text(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    out << text;
  }
}

std::vector<double> eigen_row(const Eigen::MatrixXd& m) {
  std::vector<double> v;
  for (int j = 0; j < m.cols(); ++j) v.push_back(m(0, j));
  return v;
}

// Feedback design for a channel: closed form at order <= 1, DARE search above.
gfc::FeedbackDesign design_for(const gfc::RationalSpectrum& spec, double P, int starts,
                               std::uint64_t seed) {
  if (spec.is_white()) {
    const double n0 = spec.sigma2();
    return gfc::white_blaschke_filter(n0, P, gfc::make_blaschke({std::sqrt(n0 / (P + n0))}, {1}));
  }
  if (spec.order() == 1) {
    const double alpha = spec.p().size() > 1 ? spec.p()[1] : 0.0;
    const double beta = spec.q().size() > 1 ? spec.q()[1] : 0.0;
    gfc::FeedbackDesign d = gfc::arma1_filter(alpha, beta, P / spec.sigma2());
    d.power *= spec.sigma2();
    return d;
  }
  gfc::ArmakOptions opts;
  opts.random_starts = starts;
  opts.seed = seed;
  return gfc::armak_capacity(spec, P, opts).design;
}

ordered_json sufficiency_json(const gfc::SufficiencyReport& rep) {
  ordered_json j;
  j["power_residual"] = rep.power_residual;
  j["lambda"] = rep.lambda;
  j["anticausal_residual"] = rep.anticausal_residual;
  j["pass"] = rep.pass;
  return j;
}

void dump_matrices(const std::string& path, int n, const std::vector<Eigen::MatrixXd>& ms) {
  std::ofstream out(path, std::ios::binary);
  out.write("GFCM", 4);
  const std::uint32_t n32 = static_cast<std::uint32_t>(n);
  const std::uint32_t count = static_cast<std::uint32_t>(ms.size());
  out.write(reinterpret_cast<const char*>(&n32), 4);
  out.write(reinterpret_cast<const char*>(&count), 4);
  for (const auto& m : ms)
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) {
        const double v = m(i, j);
        out.write(reinterpret_cast<const char*>(&v), 8);
      }
}

struct SweepSpec {
  double lo = 0.0, hi = 0.0;
  int steps = 0;
  bool active = false;
};

SweepSpec parse_sweep(const std::string& s) {
  SweepSpec out;
  if (s.empty()) return out;
  const auto c1 = s.find(':');
  const auto c2 = s.find(':', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw std::runtime_error("bad sweep spec, expected a:b:steps");
  out.lo = std::stod(s.substr(0, c1));
  out.hi = std::stod(s.substr(c1 + 1, c2 - c1 - 1));
  out.steps = std::stoi(s.substr(c2 + 1));
  if (out.steps < 1 || !(out.hi >= out.lo) || !(out.lo > 0.0))
    throw std::runtime_error("bad sweep range");
  out.active = true;
  return out;
}

double feedback_capacity_value(const gfc::RationalSpectrum& spec, double P, int starts,
                               std::uint64_t seed) {
  return design_for(spec, P, starts, seed).rate;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian feedback-capacity toolbox"};
  app.set_version_flag("--version", kVersion);

  std::string channel_path, output_path, sweep_str, trace_path, dump_path, filter_path,
      dare_path;
  double power = 1.0;
  int nblock_n = 0;
  int starts = 64;
  std::uint64_t seed = 1;
  int horizon = 400;
  long trials = 10000;
  double rate_frac = 0.5;
  int decode_horizon = 20;
  long decode_trials = 0;
  bool use_nonfeedback = false;
  std::string scheme = "state";
  std::string mode;

  auto* cap = app.add_subcommand("capacity", "feedback or nonfeedback capacity");
  cap->add_option("mode", mode, "feedback|nonfeedback")->required();
  cap->add_option("--channel", channel_path, "channel spec JSON")->required();
  cap->add_option("--power", power, "power constraint P");
  cap->add_option("--nblock", nblock_n, "also solve the n-block problem");
  cap->add_option("--starts", starts, "random search starts (k >= 2)");
  cap->add_option("--seed", seed, "search seed");
  cap->add_option("--power-sweep", sweep_str, "a:b:steps sweep, CSV output");
  cap->add_option("--output", output_path, "write result to file");

  auto* nb = app.add_subcommand("nblock", "finite-horizon Cover-Pombra problem");
  nb->add_option("--channel", channel_path)->required();
  nb->add_option("--power", power);
  nb->add_option("--n", nblock_n)->required();
  nb->add_flag("--nonfeedback", use_nonfeedback, "solve the nonfeedback problem");
  nb->add_option("--dump", dump_path, "binary matrix sidecar");
  nb->add_option("--output", output_path);

  auto* sim = app.add_subcommand("simulate", "Schalkwijk-Kailath Monte Carlo");
  sim->add_option("--channel", channel_path)->required();
  sim->add_option("--power", power);
  sim->add_option("--horizon", horizon);
  sim->add_option("--trials", trials);
  sim->add_option("--seed", seed);
  sim->add_option("--rate-frac", rate_frac, "constellation rate as a fraction of C_FB");
  sim->add_option("--decode-horizon", decode_horizon);
  sim->add_option("--decode-trials", decode_trials, "0 = same as --trials");
  sim->add_option("--scheme", scheme, "state|message");
  sim->add_option("--trace", trace_path, "per-step CSV traces");
  sim->add_option("--output", output_path);

  auto* ver = app.add_subcommand("verify", "optimality / DARE verification");
  ver->add_option("--channel", channel_path);
  ver->add_option("--power", power);
  ver->add_option("--filter", filter_path, "filter JSON {num, den}");
  ver->add_option("--dare", dare_path, "DARE JSON {F, G, H} row-major");
  ver->add_option("--output", output_path);

  auto* sw = app.add_subcommand("sweep", "power sweep, CSV (P, C, C_FB)");
  sw->add_option("--channel", channel_path)->required();
  sw->add_option("--power-sweep", sweep_str)->required();
  sw->add_option("--starts", starts);
  sw->add_option("--seed", seed);
  sw->add_option("--output", output_path);

  app.require_subcommand(1);
  CLI11_PARSE(app, argc, argv);

  try {
    ordered_json doc;
    doc["tool"] = "gfc";
    doc["version"] = kVersion;

    if (cap->parsed()) {
      if (mode != "feedback" && mode != "nonfeedback") {
        std::cerr << "error: capacity mode must be feedback|nonfeedback\n";
        return 1;
      }
      const gfc::RationalSpectrum spec = gfc::load_spectrum(channel_path);
      const SweepSpec sweep = parse_sweep(sweep_str);
      if (sweep.active) {
        std::string csv = "P,C,C_FB\n";
        for (int i = 0; i < sweep.steps; ++i) {
          const double p = sweep.lo + (sweep.hi - sweep.lo) * i / std::max(1, sweep.steps - 1);
          const double c = gfc::spectral_waterfill(spec, p).capacity;
          const double cfb = feedback_capacity_value(spec, p, starts, seed);
          csv += std::to_string(p) + "," + std::to_string(c) + "," + std::to_string(cfb) + "\n";
        }
        emit_text(csv, output_path);
        return 0;
      }
      doc["config"] = {{"subcommand", "capacity"}, {"mode", mode},
                       {"channel", channel_path},  {"power", power},
                       {"starts", starts},         {"seed", seed},
                       {"nblock", nblock_n}};
      doc["channel"] = gfc::spectrum_to_json(spec);
      bool verify_ok = true;
      if (mode == "nonfeedback") {
        const gfc::WaterfillResult wf = gfc::spectral_waterfill(spec, power);
        doc["lambda"] = wf.water_level;
        doc["capacity_nats"] = wf.capacity;
        doc["capacity_bits"] = wf.capacity / kLog2;
        doc["power"] = wf.power_used;
        if (nblock_n > 0) {
          const Eigen::MatrixXd kz = spec.toeplitz_covariance(nblock_n);
          const gfc::NBlockNonfeedback nf = gfc::nblock_nonfeedback(kz, power);
          const gfc::WaterfillConditionReport rep =
              gfc::verify_waterfill_conditions(nf.k_x, kz, power);
          doc["nblock"] = {{"n", nblock_n},
                           {"value_nats", nf.value},
                           {"power_residual", rep.power_residual},
                           {"waterfill_residual", rep.waterfill_residual},
                           {"pass", rep.pass}};
          verify_ok = rep.pass;
        }
      } else {
        const gfc::FeedbackDesign d = design_for(spec, power, starts, seed);
        doc["capacity_nats"] = d.rate;
        doc["capacity_bits"] = d.rate / kLog2;
        if (spec.order() <= 1) doc["x0"] = std::exp(-d.rate);
        doc["X"] = eigen_row(d.x_direction);
        doc["power_used"] = d.power;
        doc["filter"] = {{"num", d.filter_num}, {"den", d.filter_den}};
        const gfc::SufficiencyReport rep = gfc::verify_sufficiency(d, spec, power);
        const gfc::DesignResiduals res = gfc::design_residuals(d, spec);
        doc["verification"] = {{"sufficiency", sufficiency_json(rep)},
                               {"rate_residual", res.rate_residual},
                               {"power_residual", res.power_residual},
                               {"spectrum_residual", res.spectrum_residual}};
        verify_ok = rep.pass;
        if (nblock_n > 0) {
          const Eigen::MatrixXd kz = spec.toeplitz_covariance(nblock_n);
          const gfc::NBlockSolution nbs = gfc::nblock_feedback(kz, power);
          doc["nblock"] = {{"n", nblock_n}, {"value_nats", nbs.value},
                           {"kkt_residual", nbs.kkt_residual}, {"method", nbs.method}};
        }
      }
      emit(doc, output_path);
      return verify_ok ? 0 : 2;
    }

    if (nb->parsed()) {
      const gfc::RationalSpectrum spec = gfc::load_spectrum(channel_path);
      doc["config"] = {{"subcommand", "nblock"},
                       {"channel", channel_path},
                       {"power", power},
                       {"n", nblock_n},
                       {"feedback", !use_nonfeedback}};
      doc["channel"] = gfc::spectrum_to_json(spec);
      const Eigen::MatrixXd kz = spec.toeplitz_covariance(nblock_n);
      bool ok = true;
      if (use_nonfeedback) {
        const gfc::NBlockNonfeedback nf = gfc::nblock_nonfeedback(kz, power);
        const gfc::WaterfillConditionReport rep =
            gfc::verify_waterfill_conditions(nf.k_x, kz, power);
        doc["value_nats"] = nf.value;
        doc["value_bits"] = nf.value / kLog2;
        doc["water_level"] = nf.water_level;
        doc["residuals"] = {{"power", rep.power_residual},
                            {"waterfill", rep.waterfill_residual}};
        ok = rep.pass;
        if (!dump_path.empty()) dump_matrices(dump_path, nblock_n, {nf.k_x});
      } else {
        const gfc::NBlockSolution sol = gfc::nblock_feedback(kz, power);
        const gfc::NBlockConditionReport rep = gfc::verify_nblock_conditions(sol, kz, power);
        doc["value_nats"] = sol.value;
        doc["value_bits"] = sol.value / kLog2;
        doc["method"] = sol.method;
        doc["residuals"] = {{"power", rep.power_residual},
                            {"waterfill", rep.waterfill_residual},
                            {"orthogonality", rep.orthogonality_residual}};
        ok = rep.pass;
        if (!dump_path.empty())
          dump_matrices(dump_path, nblock_n, {sol.k_y, sol.b_lower, sol.k_v});
      }
      emit(doc, output_path);
      return ok ? 0 : 2;
    }

    if (sim->parsed()) {
      const gfc::RationalSpectrum spec = gfc::load_spectrum(channel_path);
      gfc::SkConfig cfg{spec, power, design_for(spec, power, starts, seed), horizon,
                        static_cast<int>(trials), 0.0, seed};
      cfg.rate_nats = rate_frac * cfg.design.rate;
      doc["config"] = {{"subcommand", "simulate"}, {"channel", channel_path},
                       {"power", power},          {"horizon", horizon},
                       {"trials", trials},        {"seed", seed},
                       {"rate_frac", rate_frac},  {"scheme", scheme}};
      doc["channel"] = gfc::spectrum_to_json(spec);
      doc["capacity_nats"] = cfg.design.rate;
      const gfc::SkResult r = (scheme == "message") ? gfc::simulate_message_refinement(cfg)
                                                    : gfc::simulate_state_refinement(cfg);
      doc["empirical_rate"] = r.empirical_rate;
      doc["deterministic_rate"] = r.deterministic_rate;
      doc["avg_power"] = r.avg_power;
      doc["max_orthogonality_zscore"] = r.max_orthogonality_zscore;
      if (decode_trials == 0) decode_trials = trials;
      if (spec.order() <= 1) {
        gfc::SkConfig dc = cfg;
        dc.horizon = decode_horizon;
        dc.trials = static_cast<int>(decode_trials);
        const gfc::DecodeResult dr = gfc::decode_constellation(dc);
        doc["decode"] = {{"rate_nats", cfg.rate_nats},
                         {"horizon", decode_horizon},
                         {"trials", decode_trials},
                         {"constellation_size", dr.constellation_size},
                         {"delta", dr.delta},
                         {"error_rate", dr.error_rate},
                         {"bound", dr.bound},
                         {"c0", dr.c0}};
      }
      if (!trace_path.empty()) {
        std::string csv = "step,power,innovation_variance,det_power,det_innovation\n";
        for (size_t i = 0; i < r.power_trace.size(); ++i) {
          csv += std::to_string(i + 1) + "," + std::to_string(r.power_trace[i]) + "," +
                 std::to_string(r.innovation_variance_trace[i]) + "," +
                 std::to_string(r.det_power_trace[i]) + "," +
                 std::to_string(r.det_innovation_trace[i]) + "\n";
        }
        emit_text(csv, trace_path);
      }
      emit(doc, output_path);
      return 0;
    }

    if (ver->parsed()) {
      bool ok = true;
      doc["config"] = {{"subcommand", "verify"},
                       {"channel", channel_path},
                       {"power", power},
                       {"filter", filter_path},
                       {"dare", dare_path}};
      if (!filter_path.empty()) {
        const gfc::RationalSpectrum spec = gfc::load_spectrum(channel_path);
        doc["channel"] = gfc::spectrum_to_json(spec);
        std::ifstream in(filter_path);
        if (!in) throw std::runtime_error("cannot open filter: " + filter_path);
        json fj;
        in >> fj;
        gfc::FeedbackDesign d;
        d.filter_num = fj.at("num").get<std::vector<double>>();
        d.filter_den = fj.at("den").get<std::vector<double>>();
        const gfc::SufficiencyReport rep = gfc::verify_sufficiency(d, spec, power);
        doc["sufficiency"] = sufficiency_json(rep);
        ok = ok && rep.pass;
      }
      if (!dare_path.empty()) {
        std::ifstream in(dare_path);
        if (!in) throw std::runtime_error("cannot open dare spec: " + dare_path);
        json dj;
        in >> dj;
        auto mat = [](const json& j) {
          const auto rows = j.get<std::vector<std::vector<double>>>();
          Eigen::MatrixXd m(rows.size(), rows.empty() ? 0 : rows[0].size());
          for (size_t i = 0; i < rows.size(); ++i)
            for (size_t c = 0; c < rows[i].size(); ++c)
              m(static_cast<int>(i), static_cast<int>(c)) = rows[i][c];
          return m;
        };
        const Eigen::MatrixXd F = mat(dj.at("F"));
        const Eigen::MatrixXd G = mat(dj.at("G"));
        const Eigen::MatrixXd H = mat(dj.at("H"));
        const gfc::DareSolution sol = gfc::dare_stabilizing(F, G, H);
        const gfc::DareReport rep = gfc::verify_dare_properties(F, G, H, sol);
        doc["dare"] = {{"innovation_variance", sol.innovation_variance},
                       {"residual", sol.residual},
                       {"det_identity_ok", rep.det_identity_ok},
                       {"reflection_ok", rep.reflection_ok},
                       {"reflection_residual", rep.reflection_residual},
                       {"rank", rep.rank},
                       {"expected_rank", rep.expected_rank},
                       {"rank_ok", rep.rank_ok}};
        ok = ok && rep.reflection_ok && rep.rank_ok;
      }
      emit(doc, output_path);
      return ok ? 0 : 2;
    }

    if (sw->parsed()) {
      const gfc::RationalSpectrum spec = gfc::load_spectrum(channel_path);
      const SweepSpec sweep = parse_sweep(sweep_str);
      std::string csv = "P,C,C_FB\n";
      for (int i = 0; i < sweep.steps; ++i) {
        const double p = sweep.lo + (sweep.hi - sweep.lo) * i / std::max(1, sweep.steps - 1);
        const double c = gfc::spectral_waterfill(spec, p).capacity;
        const double cfb = feedback_capacity_value(spec, p, starts, seed);
        csv += std::to_string(p) + "," + std::to_string(c) + "," + std::to_string(cfb) + "\n";
      }
      emit_text(csv, output_path);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
