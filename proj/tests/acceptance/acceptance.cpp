// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "fixtures.hpp"
#include "flare/deadlock_testbed.hpp"
#include "flare/diagnosis.hpp"
#include "flare/error.hpp"
#include "flare/hmm.hpp"
#include "flare/ranking.hpp"
#include "flare/reachability.hpp"
#include "flare/sim_testbed.hpp"
#include "oracles.hpp"
#include "properties.hpp"

using namespace flare;
using namespace flare::testing;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Least-squares slope of y on x.
double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Records of the default campaign, shared by criteria 3 and 4.
std::vector<CaseRecord> g_campaign;

Outcome error_trace_fidelity() {
  const TraceFixture ex = trace_fixture();
  const StateIndex viol[] = {ex.violation};
  const auto t0 = Clock::now();
  const auto traces = extract_error_traces(ex.graph, viol);
  const double secs = since(t0);
  const std::map<std::string, std::size_t> expected = {{"t0", 1}, {"t1", 2}, {"t2", 2},
                                                       {"t3", 1}, {"t4", 2}, {"t5", 1}};
  const bool exact = traces.size() == 1 && traces[0].transitions == expected;
  return {exact && secs < 1e-3, fmt::format("multiset {}, {:.1f} us", exact ? "exact" : "differs", secs * 1e6)};
}

Outcome symmetry() {
  const auto t0 = Clock::now();
  const ReachabilityGraph g = abstract_time(build_reachability_graph(two_task_net()));
  const auto viol = find_violation_states(g, parse_property(kTwoTaskViolation));
  const SuspicionRanking r = rank_transitions(extract_error_traces(g, viol));
  const double secs = since(t0);
  double a = std::nan(""), b = std::nan("");
  for (const RankEntry& e : r.entries) (e.transition == "A" ? a : b) = e.cf;
  const double diff = std::abs(a - b);
  return {r.entries.size() == 2 && diff <= 1e-12 && secs < 1.0,
          fmt::format("C_F(A)={:.15g} C_F(B)={:.15g} |diff|={:.2g}, {:.3f} s", a, b, diff, secs)};
}

Outcome effectiveness() {
  CampaignParams p;  // P, R in 5..20, faults 1..9, 100 cases each, seed 7
  const auto t0 = Clock::now();
  const CampaignReport report = run_campaign(p);
  const double secs = since(t0);
  g_campaign = report.cases;

  std::vector<double> exam, rank, procs;
  std::size_t failed = 0, overflow = 0, no_deadlock = 0;
  for (const CaseRecord& c : report.cases) {
    overflow += c.overflow;
    no_deadlock += c.no_deadlock;
    if (!c.ok) {
      ++failed;
      continue;
    }
    exam.push_back(c.exam.exam_score);
    rank.push_back(static_cast<double>(c.exam.rank_of_first_fault));
    procs.push_back(static_cast<double>(c.processes));
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
  };
  for (const FaultSummary& s : report.summary) {
    fmt::print("    faults={} tests={} exam={:.3f} (best {:.3f}, worst {:.3f}) rank={:.2f} "
               "(best {:.2f}, worst {:.2f}) states={:.0f}\n",
               s.faults, s.tests, s.exam, s.best_exam, s.worst_exam, s.rank, s.best_rank, s.worst_rank,
               s.avg_states);
  }
  const double m_exam = mean(exam);
  const double m_rank = mean(rank);
  const bool pass = failed == 0 && m_exam <= 0.20 && m_rank <= 10.0 && secs <= 1800.0;
  return {pass, fmt::format("mean EXAM {:.4f} (<= 0.20), mean rank {:.2f} (<= 10), {} cases, {} failed, "
                            "mean P {:.2f}, rejected {} deadlock-free / {} over cap, {:.0f} s (<= 1800)",
                            m_exam, m_rank, exam.size(), failed, mean(procs), no_deadlock, overflow, secs)};
}

Outcome efficiency() {
  // Large cases: the first few draws landing near 1e5 states.
  std::vector<std::string> large;
  bool large_ok = true;
  const auto search_start = Clock::now();
  for (std::uint64_t seed = 1; large.size() < 3 && seed < 400 && since(search_start) < 900; ++seed) {
    const int n = 5 + static_cast<int>(seed % 3);
    const GeneratedCase c = generate_case(random_spec(n, n, 2, seed));
    try {
      const CaseRecord rec = evaluate_case(c, 200'000, false);
      if (rec.states < 60'000) continue;
      large_ok = large_ok && rec.seconds <= 60.0;
      large.push_back(fmt::format("{}/{} in {:.2f} s", rec.states, rec.edges, rec.seconds));
    } catch (const StateSpaceOverflow&) {
    }
  }

  if (g_campaign.empty()) {
    CampaignParams p;
    p.cases_per_fault = 15;
    g_campaign = run_campaign(p).cases;
  }
  std::vector<double> lx, ly;
  for (const CaseRecord& c : g_campaign) {
    if (c.ok && c.edges > 0 && c.seconds > 0) {
      lx.push_back(std::log(static_cast<double>(c.edges)));
      ly.push_back(std::log(c.seconds));
    }
  }
  const double k = slope(lx, ly);
  std::string sizes;
  for (const std::string& s : large) sizes += (sizes.empty() ? "" : ", ") + s;
  return {large_ok && !large.empty() && k <= 1.2,
          fmt::format("large cases [{}] (<= 60 s each); log-log slope {:.3f} over {} cases (<= 1.2)", sizes, k,
                      lx.size())};
}

Outcome hmm_oracle() {
  Rng rng(2024);
  const auto t0 = Clock::now();
  int prob_bad = 0, path_bad = 0, ties = 0;
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const auto n = static_cast<std::size_t>(uniform_int(rng, 1, 4));
    const auto m = static_cast<std::size_t>(uniform_int(rng, 1, 3));
    const Hmm h = random_hmm(n, m, i % 4 == 1, i % 4 == 2, rng);
    std::vector<int> obs(static_cast<std::size_t>(uniform_int(rng, 1, 8)));
    for (int& o : obs) o = static_cast<int>(uniform_int(rng, 0, static_cast<std::int64_t>(m) - 1));
    const BruteForceHmm bf = brute_force(h, obs);
    const double err = std::abs(sequence_probability(h, obs) - bf.probability);
    worst = std::max(worst, err);
    prob_bad += err > 1e-12;
    if (bf.best == 0.0) {
      try {
        most_likely_states(h, obs);
        ++path_bad;
      } catch (const ZeroProbabilitySequence&) {
      }
      continue;
    }
    ties += bf.best_paths.size() > 1;
    const std::vector<int> path = most_likely_states(h, obs);
    path_bad += std::find(bf.best_paths.begin(), bf.best_paths.end(), path) == bf.best_paths.end();
  }
  const double secs = since(t0);
  return {prob_bad == 0 && path_bad == 0 && secs <= 60.0,
          fmt::format("max |P - brute| {:.2g}, {} probability / {} path mismatches, {} tied cases, {:.2f} s",
                      worst, prob_bad, path_bad, ties, secs)};
}

Outcome matrix_algebra() {
  const auto t0 = Clock::now();
  Rng rng(6);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double omega = uniform01(rng);
    const auto r = random_row_stochastic(1, 4, rng)[0];
    const Rates rates{r[0], r[1], r[2], r[3]};
    double s = 0.0;
    for (double x : build_initial_matrix(omega)) s += x;
    worst = std::max(worst, std::abs(s - 1.0));
    for (const auto& row : build_transition_matrix(rates, omega)) {
      s = 0.0;
      for (double x : row) s += x;
      worst = std::max(worst, std::abs(s - 1.0));
    }
  }
  struct Pinned {
    double omega;
    Rates rates;
    std::vector<double> init, pass, fail;
  };
  const std::vector<Pinned> pinned = {
      {0.5, {0.25, 0.25, 0.25, 0.25}, {.25, .25, .25, .25}, {.25, .25, .25, .25}, {.25, .25, .25, .25}},
      {0.2, {0.4, 0.1, 0.3, 0.2}, {.4, .4, .1, .1}, {.64, .16, .16, .04}, {.48, .32, .12, .08}},
      {0.9, {0.1, 0.2, 0.6, 0.1}, {.05, .05, .45, .45}, {1. / 30, 2. / 30, 9. / 30, 18. / 30},
       {6. / 70, 1. / 70, 54. / 70, 9. / 70}},
  };
  double pin_err = 0.0;
  for (const Pinned& p : pinned) {
    const auto init = build_initial_matrix(p.omega);
    const Matrix a = build_transition_matrix(p.rates, p.omega);
    for (std::size_t j = 0; j < 4; ++j) {
      pin_err = std::max({pin_err, std::abs(init[j] - p.init[j]), std::abs(a[kPIp][j] - p.pass[j]),
                          std::abs(a[kFIp][j] - p.pass[j]), std::abs(a[kPIf][j] - p.fail[j]),
                          std::abs(a[kFIf][j] - p.fail[j])});
    }
  }
  const double secs = since(t0);
  return {worst <= 1e-12 && pin_err <= 1e-12 && secs < 1.0,
          fmt::format("max row-sum error {:.2g}, max pinned error {:.2g}, {:.3f} s", worst, pin_err, secs)};
}

Outcome diagnosis_accuracy() {
  AccuracyParams p;
  p.components = {5, 10, 15, 20};
  p.avg_io = {1.0, 2.0, 3.0};
  p.cases = 100;
  p.repeats = 200;
  const auto t0 = Clock::now();
  const AccuracyReport r = evaluate_accuracy(p);
  const double secs = since(t0);
  int failed = 0;
  for (const AccuracyCell& c : r.cells) failed += c.failed;
  std::vector<double> io, acc;
  std::string by_io;
  for (const AccuracyCell& c : r.by_avg_io) {
    io.push_back(c.avg_io);
    acc.push_back(c.accuracy_mean);
    by_io += fmt::format("{}io={:g}:{:.4f}", by_io.empty() ? "" : " ", c.avg_io, c.accuracy_mean);
  }
  std::string by_n;
  for (const AccuracyCell& c : r.by_components) {
    by_n += fmt::format("{}n={}:{:.4f}", by_n.empty() ? "" : " ", c.components, c.accuracy_mean);
  }
  const double k = slope(io, acc);
  return {failed == 0 && r.overall_mean > 0.90 && k < 0.0 && secs <= 1200.0,
          fmt::format("mean {:.4f} (> 0.90), slope vs avg_io {:.4f} (< 0) [{}] [{}], {} failed, {:.0f} s (<= 1200)",
                      r.overall_mean, k, by_io, by_n, failed, secs)};
}

// Drops the named CSV columns and JSON keys that hold wall-clock times.
std::string strip_timing(const std::string& text) {
  const std::set<std::string> timing = {"seconds", "avg_seconds"};
  std::string body = text;
  while (!body.empty() && body[0] == '#') body = body.substr(body.find('\n') + 1);
  if (!body.empty() && (body[0] == '{' || body[0] == '[')) {
    Json doc = Json::parse(body);
    std::function<void(Json&)> walk = [&](Json& j) {
      if (j.is_object()) {
        for (const std::string& k : timing) j.erase(k);
        for (auto& [_, v] : j.items()) walk(v);
      } else if (j.is_array()) {
        for (Json& v : j) walk(v);
      }
    };
    walk(doc);
    return doc.dump();
  }
  std::istringstream in(text);
  std::string line, out;
  std::vector<bool> keep;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') {
      out += line + "\n";
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (keep.empty()) {
      for (const std::string& c : cells) keep.push_back(!timing.count(c));
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i >= keep.size() || keep[i]) out += cells[i] + ",";
    }
    out += "\n";
  }
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "flare_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string d = dir.string() + "/";
  std::ostringstream sink;
  auto run_to = [&](std::vector<std::string> args, const std::string& out_path) {
    args.insert(args.end(), {"--out", out_path});
    std::ostringstream err;
    const int code = cli::run(args, sink, err);
    return code <= 1 ? slurp(out_path) : "exit " + std::to_string(code) + ": " + err.str();
  };
  struct Check {
    std::string name;
    std::vector<std::string> args;
    std::vector<std::string> second_args;  // empty: same as args
    std::string extra_file;                 // an extra artifact to compare
  };
  // Inputs for the analyze subcommands.
  run_to({"tpn", "gen", "--p", "3", "--r", "3", "--faults", "2", "--seed", "11"}, d + "case.json");
  run_to({"sim", "gen", "--components", "8", "--avg-io", "2", "--cases", "60", "--seed", "12"}, d + "sys.json");

  const std::vector<std::string> campaign = {"tpn", "campaign", "--p", "4..6", "--r", "4..6", "--faults", "1..3",
                                             "--cases", "3", "--seed", "7", "--max-states", "10000"};
  std::vector<std::string> campaign_w1 = campaign;
  campaign_w1.insert(campaign_w1.end(), {"--workers", "1", "--summary"});
  std::vector<std::string> campaign_w2 = campaign;
  campaign_w2.insert(campaign_w2.end(), {"--workers", "2", "--summary"});
  const std::vector<std::string> sim_eval = {"sim", "eval", "--components", "5..10:5", "--avg-io", "1..2",
                                             "--cases", "40", "--repeats", "3", "--max-iter", "300", "--seed", "5"};
  std::vector<std::string> sim_eval_w2 = sim_eval;
  sim_eval_w2.insert(sim_eval_w2.end(), {"--workers", "2"});
  std::vector<std::string> sim_eval_w1 = sim_eval;
  sim_eval_w1.insert(sim_eval_w1.end(), {"--workers", "1"});
  const std::vector<Check> checks = {
      {"tpn gen", {"tpn", "gen", "--p", "6", "--r", "5", "--faults", "3", "--seed", "21"}, {}, ""},
      {"tpn analyze csv", {"tpn", "analyze", d + "case.json", "--emit-dot", d + "g.dot"}, {}, d + "g.dot"},
      {"tpn analyze json", {"tpn", "analyze", d + "case.json", "--format", "json", "--time-abstraction"}, {}, ""},
      {"tpn campaign csv", campaign_w1, campaign_w2, "summary"},
      {"tpn campaign json", {"tpn", "campaign", "--p", "4..5", "--r", "4..5", "--faults", "1..2", "--cases", "2",
                             "--format", "json", "--max-states", "10000"}, {}, ""},
      {"sim gen", {"sim", "gen", "--components", "10", "--avg-io", "2.5", "--cases", "30", "--seed", "4"}, {}, ""},
      {"sim analyze", {"sim", "analyze", d + "sys.json", "--seed", "3", "--workers", "1", "--dump-hmm", d + "hmm"},
       {"sim", "analyze", d + "sys.json", "--seed", "3", "--workers", "2", "--dump-hmm", d + "hmm"}, ""},
      {"sim analyze json", {"sim", "analyze", d + "sys.json", "--format", "json"}, {}, ""},
      {"sim eval", sim_eval_w1, sim_eval_w2, ""},
  };
  std::vector<std::string> bad;
  for (const Check& c : checks) {
    std::vector<std::string> a1 = c.args, a2 = c.second_args.empty() ? c.args : c.second_args;
    std::string s1, s2;
    if (c.extra_file == "summary") {
      a1.push_back(d + "sum1.csv");
      a2.push_back(d + "sum2.csv");
    }
    const std::string o1 = run_to(a1, d + "out1");
    const std::string e1 = c.extra_file.empty() ? "" : c.extra_file == "summary" ? slurp(d + "sum1.csv")
                                                                                   : slurp(c.extra_file);
    const std::string o2 = run_to(a2, d + "out2");
    const std::string e2 = c.extra_file.empty() ? "" : c.extra_file == "summary" ? slurp(d + "sum2.csv")
                                                                                   : slurp(c.extra_file);
    const bool ok = o1.rfind("exit ", 0) != 0 && strip_timing(o1) == strip_timing(o2) &&
                    strip_timing(e1) == strip_timing(e2);
    if (!ok) bad.push_back(c.name);
  }
  fs::remove_all(dir);
  std::string which;
  for (const std::string& b : bad) which += " " + b;
  return {bad.empty(), fmt::format("{} subcommand runs compared, {} differ{}", checks.size(), bad.size(), which)};
}

Outcome property_suites() {
  const auto t0 = Clock::now();
  const std::vector<std::pair<std::string, PropertyOutcome>> results = {
      {"kl", check_kl_gibbs(10'000, 1)},
      {"tc", check_tc_normalization(10'000, 2)},
      {"itc", check_itc_monotonicity(10'000, 3)},
      {"dilution", check_dilution(10'000, 4)},
      {"exam", check_exam_monotonicity(10'000, 5)},
  };
  bool ok = true;
  std::string detail;
  for (const auto& [name, r] : results) {
    ok = ok && r.ok() && r.instances == 10'000;
    detail += fmt::format("{}={}/{} ", name, r.instances - r.failures, r.instances);
    if (r.failures) detail += "(" + r.first_failure + ") ";
  }
  return {ok, fmt::format("{}{:.1f} s", detail, since(t0))};
}

}  // namespace

int main(int argc, char** argv) {
  cli::init_logging("error");
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"error-trace fidelity", error_trace_fidelity},
      {"symmetry", symmetry},
      {"effectiveness band", effectiveness},
      {"efficiency scaling", efficiency},
      {"HMM oracle equivalence", hmm_oracle},
      {"transition-matrix algebra", matrix_algebra},
      {"diagnosis accuracy", diagnosis_accuracy},
      {"determinism", determinism},
      {"property suites", property_suites},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    fmt::print("criterion {} ({}): {} - {}\n", id, criteria[i].first, o.pass ? "PASS" : "FAIL", o.detail);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
