// Copyright 2026 The lrphase Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: state preparation checks, likelihood dumps, Fisher
// scans, sequence evaluation and plan optimization.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "lrphase.hpp"

namespace {

using lrphase::json;

constexpr int kExitUsage = 2;
constexpr int kExitGuard = 3;
constexpr int kExitDivergence = 4;

/// Accepts plain numbers and the forms pi, -pi, pi/4, 3*pi/4, 3pi/4, 2*pi.
double parse_angle(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  const auto pos = s.find("pi");
  if (pos == std::string::npos) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("cannot parse angle '" + text + "'");
    return v;
  }
  double factor = 1.0;
  std::string head = s.substr(0, pos);
  if (!head.empty() && head.back() == '*') head.pop_back();
  if (head == "-")
    factor = -1.0;
  else if (!head.empty() && head != "+")
    factor = std::stod(head);
  std::string tail = s.substr(pos + 2);
  double divisor = 1.0;
  if (!tail.empty()) {
    if (tail.front() != '/') throw std::invalid_argument("cannot parse angle '" + text + "'");
    divisor = std::stod(tail.substr(1));
  }
  return factor * std::numbers::pi / divisor;
}

struct Globals {
  std::string config_path;
  std::string output_path;
  std::string format;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

// Config-file values are applied before flags are parsed, so flags win.
class ConfigBinder {
 public:
  template <class T>
  void bind(const std::string& command, const std::string& key, T& target) {
    setters_[command].emplace_back(key, [&target](const json& v) { target = v.get<T>(); });
  }
  void bind_angle(const std::string& command, const std::string& key, std::string& target) {
    setters_[command].emplace_back(key, [&target](const json& v) {
      target = v.is_string() ? v.get<std::string>() : std::to_string(v.get<double>());
    });
  }

  void apply(const json& cfg) const {
    for (const auto& [command, list] : setters_) {
      for (const auto& [key, set] : list) {
        const auto assign_from = [&](const json& obj) {
          for (const std::string& k : {key, underscored(key)})
            if (obj.is_object() && obj.contains(k)) set(obj.at(k));
        };
        assign_from(cfg);
        if (!command.empty() && cfg.contains(command)) assign_from(cfg.at(command));
      }
    }
  }

 private:
  static std::string underscored(std::string s) {
    for (auto& c : s)
      if (c == '-') c = '_';
    return s;
  }
  std::map<std::string, std::vector<std::pair<std::string, std::function<void(const json&)>>>> setters_;
};

std::optional<std::string> find_config_path(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return std::nullopt;
}

void emit(const Globals& g, const std::string& payload, const json& meta, bool is_csv) {
  if (g.output_path.empty()) {
    std::cout << payload;
    if (is_csv) std::cerr << meta.dump() << "\n";
    return;
  }
  std::ofstream out(g.output_path);
  if (!out) throw std::runtime_error("cannot open output file " + g.output_path);
  out << payload;
  if (is_csv) {
    std::ofstream side(g.output_path + ".meta.json");
    side << meta.dump(2) << "\n";
  }
}

json artifact_header(const std::string& command, const json& config, const Globals& g) {
  return {{"command", command},
          {"version", lrphase::kVersion},
          {"seed", g.seed},
          {"config", config}};
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

using lrphase::format_number;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Loss-resistant phase estimation: state preparation, lossy detection models, "
               "adaptive Bayesian evaluation and sequence optimization"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", lrphase::kVersion);

  Globals g;
  app.add_option("--config", g.config_path, "JSON config file; flags override its values");
  app.add_option("--output", g.output_path, "Write the artifact here instead of stdout");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--threads", g.threads, "Worker threads (0 = auto)");

  ConfigBinder binder;
  binder.bind("", "seed", g.seed);
  binder.bind("", "threads", g.threads);
  binder.bind("", "format", g.format);
  binder.bind("", "output", g.output_path);

  // state-prep
  double sp_chi = 1.0;
  int sp_half_n = 1;
  auto* sp = app.add_subcommand("state-prep", "Build a loss-resistant state and check the three-port synthesis");
  sp->add_option("--chi", sp_chi, "Family parameter in [0, 2]");
  sp->add_option("--half-n", sp_half_n, "n, for N = 2n photons");
  binder.bind("state-prep", "chi", sp_chi);
  binder.bind("state-prep", "half-n", sp_half_n);

  // probs
  std::string pr_state = "loss-resistant";
  double pr_chi = 1.0, pr_chi1p = 0.0, pr_chi2p = 0.0, pr_eta = 1.0;
  int pr_half_n = 1;
  std::string pr_phi, pr_theta = "0";
  auto* pr = app.add_subcommand("probs", "Dump the outcome likelihood table of a state");
  pr->add_option("--state", pr_state, "single | loss-resistant | exact-optimal")
      ->check(CLI::IsMember({"single", "loss-resistant", "exact-optimal"}));
  pr->add_option("--chi", pr_chi, "Loss-resistant family parameter");
  pr->add_option("--half-n", pr_half_n, "n, for N = 2n photons");
  pr->add_option("--chi1p", pr_chi1p, "Exact-optimal family parameter chi'_1");
  pr->add_option("--chi2p", pr_chi2p, "Exact-optimal family parameter chi'_2");
  pr->add_option("--eta", pr_eta, "Channel efficiency");
  pr->add_option("--phi", pr_phi, "Also evaluate probabilities at this system phase");
  pr->add_option("--theta", pr_theta, "Controlled phase used with --phi");
  binder.bind("probs", "state", pr_state);
  binder.bind("probs", "chi", pr_chi);
  binder.bind("probs", "half-n", pr_half_n);
  binder.bind("probs", "chi1p", pr_chi1p);
  binder.bind("probs", "chi2p", pr_chi2p);
  binder.bind("probs", "eta", pr_eta);
  binder.bind_angle("probs", "phi", pr_phi);
  binder.bind_angle("probs", "theta", pr_theta);

  // fisher-scan
  int fs_n = 2;
  double fs_eta = 0.6, fs_chi_min = 0.0, fs_chi_max = 2.0, fs_chi_step = 0.02;
  std::string fs_phi = "pi/4", fs_theta = "0";
  bool fs_max_phi = false;
  auto* fs = app.add_subcommand("fisher-scan", "Fisher information versus chi");
  fs->add_option("--n-photons", fs_n, "2 or 4")->check(CLI::IsMember({2, 4}));
  fs->add_option("--eta", fs_eta, "Channel efficiency");
  fs->add_option("--phi", fs_phi, "System phase (radians, or forms like pi/4)");
  fs->add_option("--theta", fs_theta, "Controlled phase");
  fs->add_option("--chi-min", fs_chi_min);
  fs->add_option("--chi-max", fs_chi_max);
  fs->add_option("--chi-step", fs_chi_step);
  fs->add_flag("--maximize-phi", fs_max_phi, "Report the maximum over phi instead of a fixed phi");
  binder.bind("fisher-scan", "n-photons", fs_n);
  binder.bind("fisher-scan", "eta", fs_eta);
  binder.bind_angle("fisher-scan", "phi", fs_phi);
  binder.bind_angle("fisher-scan", "theta", fs_theta);
  binder.bind("fisher-scan", "chi-min", fs_chi_min);
  binder.bind("fisher-scan", "chi-max", fs_chi_max);
  binder.bind("fisher-scan", "chi-step", fs_chi_step);
  binder.bind("fisher-scan", "maximize-phi", fs_max_phi);

  // evaluate
  lrphase::SequencePlan ev_plan;
  ev_plan.eta = 0.6;
  std::string ev_method = "speedup";
  std::int64_t ev_trials = 100000;
  double ev_guard = 1e8;
  auto* ev = app.add_subcommand("evaluate", "Average sharpness and Holevo variance of a sequence plan");
  ev->add_option("--n1", ev_plan.n1, "Single photons");
  ev->add_option("--n2", ev_plan.n2, "Two-photon states");
  ev->add_option("--chi2", ev_plan.chi2, "chi of the two-photon states");
  ev->add_option("--n4", ev_plan.n4, "Four-photon states");
  ev->add_option("--chi4", ev_plan.chi4, "chi of the four-photon states");
  ev->add_option("--eta", ev_plan.eta, "Channel efficiency");
  ev->add_option("--method", ev_method, "exact | speedup | mc")->check(CLI::IsMember({"exact", "speedup", "mc"}));
  ev->add_option("--trials", ev_trials, "Monte Carlo trials");
  ev->add_option("--guard", ev_guard, "Leaf budget for exact methods");
  for (auto& [key, ref] : std::initializer_list<std::pair<const char*, int*>>{
           {"n1", &ev_plan.n1}, {"n2", &ev_plan.n2}, {"n4", &ev_plan.n4}})
    binder.bind("evaluate", key, *ref);
  binder.bind("evaluate", "chi2", ev_plan.chi2);
  binder.bind("evaluate", "chi4", ev_plan.chi4);
  binder.bind("evaluate", "eta", ev_plan.eta);
  binder.bind("evaluate", "method", ev_method);
  binder.bind("evaluate", "trials", ev_trials);
  binder.bind("evaluate", "guard", ev_guard);

  // optimize
  int op_n = 9;
  double op_eta = 0.6, op_step = 0.1, op_guard = 1e8;
  std::string op_method = "speedup", op_csv;
  std::int64_t op_trials = 100000;
  auto* op = app.add_subcommand("optimize", "Search sequence plans for the least Holevo variance");
  op->add_option("--n", op_n, "Total photon number");
  op->add_option("--eta", op_eta, "Channel efficiency");
  op->add_option("--chi-step", op_step, "chi grid step");
  op->add_option("--method", op_method, "exact | speedup | mc")->check(CLI::IsMember({"exact", "speedup", "mc"}));
  op->add_option("--trials", op_trials, "Monte Carlo trials per plan");
  op->add_option("--guard", op_guard, "Leaf budget for exact methods");
  op->add_option("--csv", op_csv, "Also write the per-plan table as CSV here");
  binder.bind("optimize", "n", op_n);
  binder.bind("optimize", "eta", op_eta);
  binder.bind("optimize", "chi-step", op_step);
  binder.bind("optimize", "method", op_method);
  binder.bind("optimize", "trials", op_trials);
  binder.bind("optimize", "guard", op_guard);
  binder.bind("optimize", "csv", op_csv);

  try {
    if (const auto path = find_config_path(argc, argv)) {
      std::ifstream in(*path);
      if (!in) throw std::invalid_argument("cannot read config file " + *path);
      binder.apply(json::parse(in));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  const auto start = std::chrono::steady_clock::now();
  const auto method_of = [](const std::string& m) {
    if (m == "exact") return lrphase::EvaluationMethod::exact;
    if (m == "mc") return lrphase::EvaluationMethod::monte_carlo;
    return lrphase::EvaluationMethod::exact_with_speedup;
  };

  try {
    if (*sp) {
      const lrphase::LossResistantSpec spec{sp_half_n, sp_chi};
      spec.validate();
      const auto target = lrphase::make_loss_resistant(spec);
      const auto cfg = lrphase::synthesize_triport(spec);
      const auto produced = lrphase::forward_simulate_triport(cfg, sp_half_n);
      const json config{{"chi", sp_chi}, {"half_n", sp_half_n}};
      json meta = artifact_header("state-prep", config, g);
      meta["wall_time_ms"] = elapsed_ms(start);
      if (g.format == "csv") {
        std::ostringstream os;
        os << "k,re,im\n";
        for (int k = 0; k <= target.n_photons(); ++k)
          os << k << "," << format_number(target.amplitude(k).real()) << ","
             << format_number(target.amplitude(k).imag()) << "\n";
        emit(g, os.str(), meta, true);
      } else {
        meta["state"] = lrphase::to_json(target);
        meta["triport"] = lrphase::to_json(cfg);
        meta["forward_state"] = lrphase::to_json(produced);
        meta["fidelity"] = lrphase::fidelity(target, produced);
        emit(g, meta.dump(2) + "\n", meta, false);
      }
    } else if (*pr) {
      const auto state = pr_state == "single"          ? lrphase::make_single_photon()
                         : pr_state == "exact-optimal" ? lrphase::make_exact_optimal4({pr_chi1p, pr_chi2p})
                                                       : lrphase::make_loss_resistant({pr_half_n, pr_chi});
      const auto table = lrphase::build_likelihood_table(state, pr_eta);
      json config{{"state", pr_state}, {"chi", pr_chi},   {"half_n", pr_half_n},
                  {"chi1p", pr_chi1p}, {"chi2p", pr_chi2p}, {"eta", pr_eta}};
      json meta = artifact_header("probs", config, g);
      json evaluated = nullptr;
      if (!pr_phi.empty()) {
        const double phi = parse_angle(pr_phi);
        const double theta = parse_angle(pr_theta);
        meta["config"]["phi"] = phi;
        meta["config"]["theta"] = theta;
        evaluated = json::array();
        for (const auto& e : table.entries())
          evaluated.push_back({{"L", e.outcome.lost},
                               {"k", e.outcome.detected},
                               {"p", lrphase::evaluate_outcome(table, e.outcome, phi, theta)}});
      }
      meta["wall_time_ms"] = elapsed_ms(start);
      if (g.format == "csv") {
        std::ostringstream os;
        os << "L,k,d,re,im\n";
        for (const auto& e : table.entries())
          for (int d = -e.max_harmonic(); d <= e.max_harmonic(); ++d)
            os << e.outcome.lost << "," << e.outcome.detected << "," << d << "," << format_number(e.coeff(d).real())
               << "," << format_number(e.coeff(d).imag()) << "\n";
        emit(g, os.str(), meta, true);
      } else {
        meta["table"] = lrphase::to_json(table);
        if (!evaluated.is_null()) meta["probabilities"] = evaluated;
        emit(g, meta.dump(2) + "\n", meta, false);
      }
    } else if (*fs) {
      const double phi = parse_angle(fs_phi);
      const double theta = parse_angle(fs_theta);
      lrphase::LossChannel{fs_eta}.validate();
      if (!(fs_chi_step > 0.0) || fs_chi_min < 0.0 || fs_chi_max > 2.0 || fs_chi_min > fs_chi_max)
        throw std::invalid_argument("chi range must satisfy 0 <= chi-min <= chi-max <= 2 with chi-step > 0");
      json rows = json::array();
      std::ostringstream csv;
      csv << "chi,fisher\n";
      for (int i = 0;; ++i) {
        const double chi = fs_chi_min + i * fs_chi_step;
        if (chi > fs_chi_max + 1e-9) break;
        const double c = std::min(std::round(chi * 1e12) / 1e12, fs_chi_max);
        const auto table = lrphase::build_likelihood_table(lrphase::loss_resistant_state(fs_n, c), fs_eta);
        std::optional<double> f;
        try {
          f = fs_max_phi ? lrphase::max_fisher_over_phi(table, theta)
                         : lrphase::fisher_information(table, phi, theta);
        } catch (const lrphase::FisherDivergence& e) {
          std::cerr << "warning: chi=" << c << ": " << e.what() << "\n";
        }
        csv << format_number(c) << "," << (f ? format_number(*f) : std::string("nan")) << "\n";
        rows.push_back({{"chi", c}, {"fisher", f ? json(*f) : json("nan")}});
      }
      const json config{{"n_photons", fs_n},     {"eta", fs_eta},         {"phi", phi},
                        {"theta", theta},        {"chi_min", fs_chi_min}, {"chi_max", fs_chi_max},
                        {"chi_step", fs_chi_step}, {"maximize_phi", fs_max_phi}};
      json meta = artifact_header("fisher-scan", config, g);
      meta["wall_time_ms"] = elapsed_ms(start);
      if (g.format == "json") {
        meta["rows"] = rows;
        emit(g, meta.dump(2) + "\n", meta, false);
      } else {
        emit(g, csv.str(), meta, true);
      }
    } else if (*ev) {
      ev_plan.validate();
      const auto method = method_of(ev_method);
      lrphase::EvaluationReport report;
      const lrphase::EvaluationOptions opts{ev_guard, g.threads};
      if (method == lrphase::EvaluationMethod::exact)
        report = lrphase::evaluate_exact(ev_plan, opts);
      else if (method == lrphase::EvaluationMethod::exact_with_speedup)
        report = lrphase::evaluate_exact_with_speedup(ev_plan, opts);
      else
        report = lrphase::evaluate_monte_carlo(ev_plan, ev_trials, g.seed, g.threads);
      json config = lrphase::to_json(ev_plan);
      config["method"] = ev_method;
      config["trials"] = ev_trials;
      config["guard"] = ev_guard;
      json meta = artifact_header("evaluate", config, g);
      meta["report"] = lrphase::to_json(report);
      meta["wall_time_ms"] = elapsed_ms(start);
      if (g.format == "csv") {
        std::ostringstream os;
        os << "mu,holevo_variance,branches_evaluated,method\n"
           << format_number(report.mu) << "," << format_number(report.holevo_variance) << "," << report.branches_evaluated << "," << lrphase::to_string(report.method) << "\n";
        emit(g, os.str(), meta, true);
      } else {
        emit(g, meta.dump(2) + "\n", meta, false);
      }
    } else if (*op) {
      lrphase::OptimizeOptions opts;
      opts.branch_guard = op_guard;
      opts.threads = g.threads;
      opts.mc_trials = op_trials;
      opts.seed = g.seed;
      const auto result = lrphase::optimize(op_n, op_eta, op_step, method_of(op_method), opts);
      const json config{{"n", op_n}, {"eta", op_eta}, {"chi_step", op_step}, {"method", op_method},
                        {"trials", op_trials}, {"guard", op_guard}};
      json meta = artifact_header("optimize", config, g);
      meta["sql_baseline"] = nullptr;
      for (const auto& row : result.pareto_table)
        if (row.plan.n1 == op_n) meta["sql_baseline"] = lrphase::to_json(row.report);
      meta["wall_time_ms"] = elapsed_ms(start);
      const std::string csv = lrphase::pareto_csv(result);
      if (!op_csv.empty()) {
        std::ofstream out(op_csv);
        if (!out) throw std::runtime_error("cannot open " + op_csv);
        out << csv;
      }
      if (g.format == "csv") {
        emit(g, csv, meta, true);
      } else {
        meta["result"] = lrphase::to_json(result);
        emit(g, meta.dump(2) + "\n", meta, false);
      }
    }
  } catch (const lrphase::BranchGuardExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitGuard;
  } catch (const lrphase::FisherDivergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
