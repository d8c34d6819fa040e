#include "phasecav/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace phasecav {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, x);
  if (r.ec != std::errc() || r.ptr != end) throw Error("config", "bad number for " + key + ": '" + v + "'");
  return x;
}

long long to_int(const std::string& key, const std::string& v) {
  long long x = 0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, x);
  if (r.ec != std::errc() || r.ptr != end) throw Error("config", "bad integer for " + key + ": '" + v + "'");
  return x;
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(to_double(key, trim(tok)));
  if (out.empty()) throw Error("config", key + " must not be empty");
  return out;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::vector<BoundaryInterval> parse_intervals(const std::string& text) {
  const std::string t = trim(text);
  if (t == "all") return whole_boundary();
  std::vector<BoundaryInterval> out;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    std::stringstream is(item);
    std::string side, from, to;
    std::getline(is, side, ':');
    BoundaryInterval b;
    b.side = side_from_string(side);
    if (std::getline(is, from, ':')) {
      if (!std::getline(is, to, ':')) throw Error("config", "interval '" + item + "' needs side:from:to");
      b.from = to_double("interval", from);
      b.to = to_double("interval", to);
    }
    out.push_back(b);
  }
  if (out.empty()) throw Error("config", "empty boundary segment");
  return out;
}

std::string format_intervals(const std::vector<BoundaryInterval>& intervals) {
  std::string out;
  for (const auto& b : intervals) {
    if (!out.empty()) out += ',';
    out += to_string(b.side) + ':' + format_double(b.from) + ':' + format_double(b.to);
  }
  return out;
}

DomainSpec ExperimentConfig::default_domain() {
  DomainSpec d;
  d.delta = 0.08;
  return d;
}

OptimizerConfig ExperimentConfig::default_optimizer() {
  OptimizerConfig o;
  o.max_iterations = 3000;
  o.init = "constant:0.5";
  return o;
}

double ExperimentConfig::b_value() const {
  if (b >= 0) return b;
  return functional == FunctionalKind::G ? 0.0 : 1.0;
}

FunctionalParams ExperimentConfig::params(double eps) const {
  return FunctionalParams::from_schedule(eps, schedule, a1, a2, b_value(), q_tilde, beta_tilde, q);
}

Potentials ExperimentConfig::potentials() const { return Potentials(psi, psi_gamma); }

void ExperimentConfig::validate() const {
  domain.validate();
  if (resolution < 4) throw Error("config", "grid.resolution must be at least 4");
  if (refine != 1 && refine != 2) throw Error("config", "data.refine must be 1 or 2");
  if (!(rho >= 0)) throw Error("config", "data.rho must be nonnegative");
  if (!(c1 < threshold && threshold < c2)) throw Error("config", "threshold.c must lie strictly between c1 and c2");
  if (!(0 < c1 && c2 < 1)) throw Error("config", "need 0 < c1 and c2 < 1");
  if (epsilons.empty()) throw Error("config", "sweep.epsilons must not be empty");
  std::vector<double> all = epsilons;
  all.push_back(epsilon);
  for (double e : all) {
    if (!(e > 0 && e <= 1)) throw Error("config", "noise levels must lie in (0,1]");
    params(e).validate(functional == FunctionalKind::G);
  }
  if (functional == FunctionalKind::F && q != 2.0) throw Error("config", "minimisation of F needs q = 2");
  if (psi == PsiKind::Power && !(psi_gamma > 0)) throw Error("config", "potential.gamma must be positive");
  optimizer.validate();
  if (!(solver.tol > 0) || solver.max_iterations < 1) throw Error("config", "bad solver settings");
  if (output_dir.empty()) throw Error("config", "output.dir must not be empty");
}

void ExperimentConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  auto d = [&] { return to_double(key, v); };
  auto i = [&] { return static_cast<int>(to_int(key, v)); };
  if (key == "domain.width") domain.width = d();
  else if (key == "domain.height") domain.height = d();
  else if (key == "domain.delta") domain.delta = d();
  else if (key == "domain.gamma") domain.gamma = parse_intervals(v);
  else if (key == "domain.gamma_tilde") domain.gamma_tilde = parse_intervals(v);
  else if (key == "cavity.shape") cavity = CavityShape::parse(v);
  else if (key == "grid.resolution") resolution = i();
  else if (key == "data.refine") refine = i();
  else if (key == "data.flux") flux = v;
  else if (key == "data.rho") rho = d();
  else if (key == "data.seed") seed = static_cast<std::uint64_t>(to_int(key, v));
  else if (key == "schedule.eta_scale") schedule.eta_scale = d();
  else if (key == "schedule.eta_power") schedule.eta_power = d();
  else if (key == "schedule.o_power") schedule.o_power = d();
  else if (key == "schedule.a_factor") schedule.a_factor = d();
  else if (key == "functional.kind") functional = functional_from_string(v);
  else if (key == "functional.a1") a1 = d();
  else if (key == "functional.a2") a2 = d();
  else if (key == "functional.b") b = v == "auto" ? -1.0 : d();
  else if (key == "functional.q_tilde") q_tilde = d();
  else if (key == "functional.beta_tilde") beta_tilde = d();
  else if (key == "functional.q") q = d();
  else if (key == "functional.c1") c1 = d();
  else if (key == "functional.c2") c2 = d();
  else if (key == "potential.psi") {
    if (v == "smoothstep") psi = PsiKind::Smoothstep;
    else if (v == "power") psi = PsiKind::Power;
    else throw Error("config", "unknown potential.psi '" + v + "'");
  } else if (key == "potential.gamma") psi_gamma = d();
  else if (key == "optimizer.max_iterations") optimizer.max_iterations = i();
  else if (key == "optimizer.stop_tol") optimizer.stop_tol = d();
  else if (key == "optimizer.stall_iterations") optimizer.stall_iterations = i();
  else if (key == "optimizer.rule") optimizer.rule = step_rule_from_string(v);
  else if (key == "optimizer.fixed_step") optimizer.fixed_step = d();
  else if (key == "optimizer.initial_step") optimizer.initial_step = d();
  else if (key == "optimizer.armijo") optimizer.armijo = d();
  else if (key == "optimizer.shrink") optimizer.shrink = d();
  else if (key == "optimizer.max_backtracks") optimizer.max_backtracks = i();
  else if (key == "optimizer.min_step") optimizer.min_step = d();
  else if (key == "optimizer.max_step") optimizer.max_step = d();
  else if (key == "optimizer.init") optimizer.init = v;
  else if (key == "optimizer.checkpoint_every") optimizer.checkpoint_every = i();
  else if (key == "solver.tol") solver.tol = d();
  else if (key == "solver.max_iterations") solver.max_iterations = i();
  else if (key == "sweep.epsilons") epsilons = to_list(key, v);
  else if (key == "run.epsilon") epsilon = d();
  else if (key == "threshold.c") threshold = d();
  else if (key == "output.dir") output_dir = v;
  else throw Error("config", "unknown key '" + key + "'");
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream os;
  auto kv = [&](const std::string& k, const std::string& v) { os << k << " = " << v << '\n'; };
  auto kd = [&](const std::string& k, double v) { kv(k, format_double(v)); };
  kd("domain.width", domain.width);
  kd("domain.height", domain.height);
  kd("domain.delta", domain.delta);
  kv("domain.gamma", format_intervals(domain.gamma));
  kv("domain.gamma_tilde", format_intervals(domain.gamma_tilde));
  kv("cavity.shape", cavity.serialize());
  kv("grid.resolution", std::to_string(resolution));
  kv("data.refine", std::to_string(refine));
  kv("data.flux", flux);
  kd("data.rho", rho);
  kv("data.seed", std::to_string(seed));
  kd("schedule.eta_scale", schedule.eta_scale);
  kd("schedule.eta_power", schedule.eta_power);
  kd("schedule.o_power", schedule.o_power);
  kd("schedule.a_factor", schedule.a_factor);
  kv("functional.kind", to_string(functional));
  kd("functional.a1", a1);
  kd("functional.a2", a2);
  kv("functional.b", b < 0 ? "auto" : format_double(b));
  kd("functional.q_tilde", q_tilde);
  kd("functional.beta_tilde", beta_tilde);
  kd("functional.q", q);
  kd("functional.c1", c1);
  kd("functional.c2", c2);
  kv("potential.psi", psi == PsiKind::Smoothstep ? "smoothstep" : "power");
  kd("potential.gamma", psi_gamma);
  kv("optimizer.max_iterations", std::to_string(optimizer.max_iterations));
  kd("optimizer.stop_tol", optimizer.stop_tol);
  kv("optimizer.stall_iterations", std::to_string(optimizer.stall_iterations));
  kv("optimizer.rule", to_string(optimizer.rule));
  kd("optimizer.fixed_step", optimizer.fixed_step);
  kd("optimizer.initial_step", optimizer.initial_step);
  kd("optimizer.armijo", optimizer.armijo);
  kd("optimizer.shrink", optimizer.shrink);
  kv("optimizer.max_backtracks", std::to_string(optimizer.max_backtracks));
  kd("optimizer.min_step", optimizer.min_step);
  kd("optimizer.max_step", optimizer.max_step);
  kv("optimizer.init", optimizer.init);
  kv("optimizer.checkpoint_every", std::to_string(optimizer.checkpoint_every));
  kd("solver.tol", solver.tol);
  kv("solver.max_iterations", std::to_string(solver.max_iterations));
  std::string eps;
  for (double e : epsilons) eps += (eps.empty() ? "" : ",") + format_double(e);
  kv("sweep.epsilons", eps);
  kd("run.epsilon", epsilon);
  kd("threshold.c", threshold);
  kv("output.dir", output_dir);
  return os.str();
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("config", "line " + std::to_string(lineno) + ": expected key = value");
    base.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw Error("config", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

}  // namespace phasecav
