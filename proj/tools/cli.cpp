#include "cli.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "flare/deadlock_testbed.hpp"
#include "flare/diagnosis.hpp"
#include "flare/error.hpp"
#include "flare/ranking.hpp"
#include "flare/reachability.hpp"
#include "flare/sim_testbed.hpp"

namespace flare::cli {

namespace {

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{:.12g}", x);
}

template <typename T>
T parse_number(std::string_view s, const std::string& whole) {
  T value{};
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty()) {
    throw InvalidArgument("malformed range '" + whole + "'");
  }
  return value;
}

template <typename T>
std::pair<T, T> parse_bounds(std::string_view body, const std::string& text) {
  if (const auto dots = body.find(".."); dots != std::string_view::npos) {
    return {parse_number<T>(body.substr(0, dots), text), parse_number<T>(body.substr(dots + 2), text)};
  }
  const T v = parse_number<T>(body, text);
  return {v, v};
}

template <typename T>
std::vector<T> parse_range(const std::string& text) {
  std::string_view body = text;
  T step = 1;
  if (const auto colon = body.find(':'); colon != std::string_view::npos) {
    step = parse_number<T>(body.substr(colon + 1), text);
    body = body.substr(0, colon);
  }
  const auto [lo, hi] = parse_bounds<T>(body, text);
  if (!(step > 0)) throw InvalidArgument("range step must be positive in '" + text + "'");
  if (hi < lo) throw InvalidArgument("empty range '" + text + "'");
  std::vector<T> out;
  if constexpr (std::is_integral_v<T>) {
    for (T v = lo; v <= hi; v += step) out.push_back(v);
  } else {
    // Index-based so that 1..3:0.1 does not drift past its end point.
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long k = 0; k <= n; ++k) out.push_back(lo + static_cast<T>(k) * step);
  }
  return out;
}

IntRange to_int_range(const std::string& text) {
  const std::vector<int> v = parse_int_range(text);
  if (v.size() > 1 && v[1] - v[0] != 1) throw InvalidArgument("'" + text + "' must not have a step");
  return {v.front(), v.back()};
}

// Range flags are checked while parsing so a malformed range is a usage error.
const CLI::Validator kIntRange(
    [](std::string& text) {
      try {
        to_int_range(text);
      } catch (const InvalidArgument& e) {
        return std::string(e.what());
      }
      return std::string();
    },
    "RANGE", "int range");

const CLI::Validator kIntSteps(
    [](std::string& text) {
      try {
        parse_int_range(text);
      } catch (const InvalidArgument& e) {
        return std::string(e.what());
      }
      return std::string();
    },
    "RANGE", "int range");

const CLI::Validator kRealSteps(
    [](std::string& text) {
      try {
        parse_real_range(text);
      } catch (const InvalidArgument& e) {
        return std::string(e.what());
      }
      return std::string();
    },
    "RANGE", "real range");


void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    out.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw InvalidArgument("failed writing '" + path + "'");
  spdlog::info("wrote {}", path);
}

Json read_json(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot read '" + path + "'");
  try {
    return Json::parse(f);
  } catch (const Json::exception& e) {
    throw ParseError("'" + path + "' is not valid JSON: " + e.what());
  }
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

std::string csv_header(std::uint64_t seed, const std::string& columns) {
  return fmt::format("# seed={}\n{}\n", seed, columns);
}

Json exam_json(const ExamResult& r) {
  return {{"exam", r.exam_score},          {"rank_first", r.rank_of_first_fault},
          {"best_exam", r.best_exam},      {"best_rank", r.best_rank},
          {"worst_exam", r.worst_exam},    {"worst_rank", r.worst_rank},
          {"total_ranked", r.total_ranked}, {"not_found", r.not_found},
          {"total_model_transitions", r.total_model_transitions}};
}

// Options shared by gen and campaign.
struct GenFlags {
  std::string interval = "1..10";
  std::int64_t max_width = 9;
  std::string density = "0.5..1";
  std::string encoding = "sequential";

  void add(CLI::App* cmd) {
    cmd->add_option("--interval", interval, "task interval bounds lo..hi")->check(kIntSteps)->capture_default_str();
    cmd->add_option("--max-width", max_width, "largest lft - eft of a task")->capture_default_str();
    cmd->add_option("--density", density, "access-matrix density range lo..hi")->capture_default_str();
    cmd->add_option("--encoding", encoding, "process encoding")
        ->check(CLI::IsMember({"sequential", "hold_and_wait"}))
        ->capture_default_str();
  }

  GenerationOptions resolve() const {
    GenerationOptions g;
    const std::vector<int> iv = parse_int_range(interval);
    g.interval_range = {iv.front(), iv.back()};
    g.max_width = max_width;
    const auto [dlo, dhi] = parse_bounds<double>(density, density);
    if (!(dlo <= dhi)) throw InvalidArgument("empty density range '" + density + "'");
    g.min_density = dlo;
    g.max_density = dhi;
    g.encoding = encoding == "hold_and_wait" ? Encoding::hold_and_wait : Encoding::sequential;
    return g;
  }
};

// Options shared by sim analyze and sim eval.
struct SearchFlags {
  double omega = kDefaultOmega;
  double mu_min = SearchOptions{}.mu_min;
  double rho_min = SearchOptions{}.rho_min;
  int max_iter = SearchOptions{}.max_iter;
  bool free_emission = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--omega", omega, "prior fault probability")->capture_default_str();
    cmd->add_option("--mu-min", mu_min, "matching-level threshold")->capture_default_str();
    cmd->add_option("--rho-min", rho_min, "confidence-level threshold")->capture_default_str();
    cmd->add_option("--max-iter", max_iter, "emission-matrix search budget")->capture_default_str();
    cmd->add_flag("--free-emission", free_emission, "sample all four emission rows independently");
  }

  DiagnosisOptions resolve(std::uint64_t seed, unsigned workers) const {
    DiagnosisOptions d;
    d.omega = omega;
    d.search.mu_min = mu_min;
    d.search.rho_min = rho_min;
    d.search.max_iter = max_iter;
    d.search.constrained = !free_emission;
    d.seed = seed;
    d.workers = workers;
    return d;
  }
};

struct Common {
  std::string out;
  std::string format = "csv";
  std::uint64_t seed = 0;
  unsigned workers = 0;

  void add_out(CLI::App* cmd, bool with_format = true) {
    cmd->add_option("-o,--out", out, "output path (default: stdout)");
    if (with_format) {
      cmd->add_option("--format", format, "output format")
          ->check(CLI::IsMember({"csv", "json"}))
          ->capture_default_str();
    }
  }
};

// ---------------------------------------------------------------- tpn gen

struct TpnGen {
  Common c;
  int p = 0;
  int r = 0;
  int faults = 1;
  GenFlags gen;

  int run(std::ostream& out) const {
    const SystemSpec spec = random_spec(p, r, faults, c.seed, gen.resolve());
    const GeneratedCase gc = generate_case(spec);
    Json doc;
    doc["schema"] = 1;
    doc["seed"] = c.seed;
    const Json body = to_json(gc);
    for (const auto& [key, value] : body.items()) doc[key] = value;
    emit(c.out, dump(doc), out);
    return kOk;
  }
};

// ------------------------------------------------------------ tpn analyze

struct TpnAnalyze {
  Common c;
  CLI::Option* seed_opt = nullptr;
  std::string input;
  std::string property = "deadlock";
  std::size_t max_states = kDefaultMaxStates;
  std::string dot;
  bool time_abstraction = false;

  int run(std::ostream& out) const {
    const Json doc = read_json(input);
    const GeneratedCase gc = case_from_json(doc);
    std::uint64_t seed = c.seed;
    if (seed_opt->count() == 0) seed = doc.value("seed", gc.spec.seed);
    const StatePredicate predicate = parse_property(property);

    ReachabilityGraph graph = build_reachability_graph(gc.net, max_states);
    spdlog::info("{} states, {} edges", graph.state_count(), graph.edge_count());
    if (time_abstraction) graph = abstract_time(graph);
    if (!dot.empty()) {
      std::ostringstream os;
      write_dot(os, graph);
      emit(dot, os.str(), out);
    }
    const std::vector<StateIndex> violations = find_violation_states(graph, predicate);
    SuspicionRanking ranking;
    if (!violations.empty()) {
      const std::vector<ErrorTrace> traces = extract_error_traces(graph, violations);
      ranking = rank_transitions(traces);
    }
    spdlog::info("{} violation states, {} ranked transitions", violations.size(), ranking.entries.size());
    std::optional<ExamResult> exam;
    if (!gc.faulty_transitions.empty() && !ranking.entries.empty()) {
      exam = exam_score(ranking, gc.faulty_transitions, gc.net.transition_count());
      spdlog::info("EXAM {} (first fault at rank {})", exam->exam_score, exam->rank_of_first_fault);
    }

    if (c.format == "json") {
      Json res;
      res["schema"] = 1;
      res["seed"] = seed;
      res["property"] = property;
      res["time_abstraction"] = time_abstraction;
      res["states"] = graph.state_count();
      res["edges"] = graph.edge_count();
      res["violations"] = violations.size();
      res["traces"] = ranking.trace_count;
      Json rows = Json::array();
      for (std::size_t i = 0; i < ranking.entries.size(); ++i) {
        const RankEntry& e = ranking.entries[i];
        rows.push_back({{"rank", i + 1},
                        {"transition", e.transition},
                        {"cf", e.cf},
                        {"tc_mean", e.tc_mean},
                        {"itc", e.itc},
                        {"trace_count", e.trace_count}});
      }
      res["ranking"] = std::move(rows);
      if (exam) res["exam"] = exam_json(*exam);
      emit(c.out, dump(res), out);
    } else {
      std::string text = csv_header(seed, "rank,transition,cf,tc_mean,itc");
      for (std::size_t i = 0; i < ranking.entries.size(); ++i) {
        const RankEntry& e = ranking.entries[i];
        text += fmt::format("{},{},{},{},{}\n", i + 1, e.transition, num(e.cf), num(e.tc_mean), num(e.itc));
      }
      emit(c.out, text, out);
    }
    return ranking.entries.empty() ? kOk : kFindings;
  }
};

// ----------------------------------------------------------- tpn campaign

struct TpnCampaign {
  Common c;
  std::string p = "5..20";
  std::string r = "5..20";
  std::string faults = "1..9";
  int cases = 100;
  std::size_t max_states = CampaignParams{}.max_states;
  int max_attempts = CampaignParams{}.max_attempts;
  bool time_abstraction = false;
  std::string summary;
  GenFlags gen;

  int run(std::ostream& out) const {
    CampaignParams params;
    params.processes = to_int_range(p);
    params.resources = to_int_range(r);
    params.faults = to_int_range(faults);
    params.cases_per_fault = cases;
    params.seed = c.seed;
    params.max_states = max_states;
    params.max_attempts = max_attempts;
    params.workers = c.workers;
    params.abstract_time = time_abstraction;
    params.generation = gen.resolve();

    std::size_t done = 0;
    const CampaignReport report = run_campaign(params, [&](const CaseRecord& rec) {
      ++done;
      spdlog::info("case {} faults={} ok={} states={} exam={:.3f} ({} done)", rec.case_id, rec.faults, rec.ok,
                   rec.states, rec.exam.exam_score, done);
    });

    if (c.format == "json") {
      Json res;
      res["schema"] = 1;
      res["seed"] = c.seed;
      Json rows = Json::array();
      for (const CaseRecord& rec : report.cases) {
        Json row = {{"case_id", rec.case_id},       {"faults", rec.faults},
                    {"processes", rec.processes},   {"resources", rec.resources},
                    {"case_seed", rec.seed},        {"attempts", rec.attempts},
                    {"no_deadlock", rec.no_deadlock}, {"overflow", rec.overflow},
                    {"ok", rec.ok},                 {"states", rec.states},
                    {"edges", rec.edges},           {"violations", rec.violations}};
        if (rec.ok) row["exam"] = exam_json(rec.exam);
        row["seconds"] = rec.seconds;
        rows.push_back(std::move(row));
      }
      res["cases"] = std::move(rows);
      res["summary"] = summary_json(report.summary);
      emit(c.out, dump(res), out);
    } else {
      std::string text = csv_header(c.seed, "case_id,states,edges,faults,exam,rank_first,seconds");
      for (const CaseRecord& rec : report.cases) {
        if (rec.ok) {
          text += fmt::format("{},{},{},{},{},{},{:.6f}\n", rec.case_id, rec.states, rec.edges, rec.faults,
                              num(rec.exam.exam_score), rec.exam.rank_of_first_fault, rec.seconds);
        } else {
          text += fmt::format("{},,,{},,,\n", rec.case_id, rec.faults);
        }
      }
      emit(c.out, text, out);
    }
    if (!summary.empty()) emit(summary, summary_csv(report.summary), out);
    return kOk;
  }

  static Json summary_json(const std::vector<FaultSummary>& rows) {
    Json arr = Json::array();
    for (const FaultSummary& s : rows) {
      arr.push_back({{"faults", s.faults},
                     {"tests", s.tests},
                     {"rejected_no_deadlock", s.rejected_no_deadlock},
                     {"rejected_overflow", s.rejected_overflow},
                     {"failed", s.failed},
                     {"avg_states", s.avg_states},
                     {"avg_edges", s.avg_edges},
                     {"avg_seconds", s.avg_seconds},
                     {"best_exam", s.best_exam},
                     {"best_exam_var", s.best_exam_var},
                     {"worst_exam", s.worst_exam},
                     {"worst_exam_var", s.worst_exam_var},
                     {"avg_exam", s.avg_exam},
                     {"exam", s.exam},
                     {"exam_var", s.exam_var},
                     {"best_rank", s.best_rank},
                     {"worst_rank", s.worst_rank},
                     {"avg_rank", s.avg_rank},
                     {"rank", s.rank},
                     {"rank_var", s.rank_var}});
    }
    return arr;
  }

  std::string summary_csv(const std::vector<FaultSummary>& rows) const {
    std::string text = csv_header(
        c.seed,
        "faults,tests,rejected_no_deadlock,rejected_overflow,failed,avg_states,avg_edges,avg_seconds,"
        "best_exam,best_exam_var,worst_exam,worst_exam_var,avg_exam,exam,exam_var,"
        "best_rank,worst_rank,avg_rank,rank,rank_var");
    for (const FaultSummary& s : rows) {
      text += fmt::format("{},{},{},{},{},{},{},{:.6f},{},{},{},{},{},{},{},{},{},{},{},{}\n", s.faults, s.tests,
                          s.rejected_no_deadlock, s.rejected_overflow, s.failed, num(s.avg_states),
                          num(s.avg_edges), s.avg_seconds, num(s.best_exam), num(s.best_exam_var),
                          num(s.worst_exam), num(s.worst_exam_var), num(s.avg_exam), num(s.exam),
                          num(s.exam_var), num(s.best_rank), num(s.worst_rank), num(s.avg_rank), num(s.rank),
                          num(s.rank_var));
    }
    return text;
  }
};

// ---------------------------------------------------------------- sim gen

struct SimGen {
  Common c;
  int components = 0;
  double avg_io = 1.0;
  int faults = -1;
  int cases = 100;
  SystemGenOptions generation;
  SimOptions simulation;

  int run(std::ostream& out) const {
    const int f = faults >= 0 ? faults : default_fault_count(components);
    const ComponentSystem sys = generate_system(components, avg_io, f, c.seed, generation);
    Json doc;
    doc["schema"] = 1;
    doc["seed"] = c.seed;
    doc["system"] = to_json(sys);
    if (cases > 0) doc["dataset"] = to_json(simulate(sys, cases, derive_seed(c.seed, {1}), simulation));
    emit(c.out, dump(doc), out);
    return kOk;
  }
};

// ------------------------------------------------------------ sim analyze

struct SimAnalyze {
  Common c;
  std::string input;
  std::string data;
  std::string dump_hmm;
  SearchFlags search;

  int run(std::ostream& out) const {
    const Json doc = read_json(input);
    const bool bundled = doc.contains("system");
    const ComponentSystem sys = system_from_json(bundled ? doc.at("system") : doc);
    SimulatedDataset dataset;
    if (!data.empty()) {
      const Json d = read_json(data);
      dataset = dataset_from_json(d.contains("dataset") ? d.at("dataset") : d);
    } else if (bundled && doc.contains("dataset")) {
      dataset = dataset_from_json(doc.at("dataset"));
    } else {
      throw InvalidArgument("no dataset: pass --data or a document with a \"dataset\" entry");
    }

    const SystemDiagnosis diag = diagnose_system(sys, dataset, search.resolve(c.seed, c.workers));
    const std::vector<RankedComponent> ranked = rank_components(sys, diag.verdicts);
    if (!dump_hmm.empty()) {
      std::filesystem::create_directories(dump_hmm);
      for (const ComponentModel& cm : diag.models) {
        emit((std::filesystem::path(dump_hmm) / (cm.id + ".json")).string(), dump(to_json(cm)), out);
      }
    }

    bool any_faulty = false;
    if (c.format == "json") {
      Json res;
      res["schema"] = 1;
      res["seed"] = c.seed;
      Json rows = Json::array();
      for (const RankedComponent& rc : ranked) {
        rows.push_back({{"component", rc.verdict.component},
                        {"status", to_string(rc.verdict.status)},
                        {"matching", rc.verdict.mu},
                        {"confidence", rc.verdict.rho},
                        {"faulty_fraction", rc.verdict.faulty_fraction},
                        {"rank", rc.rank}});
        any_faulty = any_faulty || rc.verdict.status == Status::Faulty;
      }
      res["verdicts"] = std::move(rows);
      emit(c.out, dump(res), out);
    } else {
      std::string text = csv_header(c.seed, "component,status,matching,confidence,rank");
      for (const RankedComponent& rc : ranked) {
        text += fmt::format("{},{},{},{},{}\n", rc.verdict.component, to_string(rc.verdict.status),
                            num(rc.verdict.mu), num(rc.verdict.rho), rc.rank);
        any_faulty = any_faulty || rc.verdict.status == Status::Faulty;
      }
      emit(c.out, text, out);
    }
    return any_faulty ? kFindings : kOk;
  }
};

// --------------------------------------------------------------- sim eval

struct SimEval {
  Common c;
  std::string components = "5..20:5";
  std::string avg_io = "1..3";
  int cases = 100;
  int repeats = 40;
  int faults = -1;
  SearchFlags search;
  SystemGenOptions generation;
  SimOptions simulation;

  int run(std::ostream& out) const {
    AccuracyParams params;
    params.components = parse_int_range(components);
    params.avg_io = parse_real_range(avg_io);
    params.cases = cases;
    params.repeats = repeats;
    params.fault_count = faults;
    params.seed = c.seed;
    params.workers = c.workers;
    params.generation = generation;
    params.simulation = simulation;
    params.diagnosis = search.resolve(0, 1);

    const AccuracyReport report = evaluate_accuracy(params, [](const AccuracyCell& cell) {
      if (cell.failed > 0) {
        spdlog::warn("components={} avg_io={}: {} systems failed ({})", cell.components, cell.avg_io, cell.failed,
                     cell.error);
      }
    });
    spdlog::info("overall accuracy {:.4f}", report.overall_mean);

    if (c.format == "json") {
      auto rows = [](const std::vector<AccuracyCell>& cells) {
        Json arr = Json::array();
        for (const AccuracyCell& cell : cells) {
          Json row;
          if (cell.components > 0) row["components"] = cell.components;
          if (!std::isnan(cell.avg_io)) row["avg_io"] = cell.avg_io;
          row["repeats"] = cell.repeats;
          row["failed"] = cell.failed;
          row["accuracy_mean"] = cell.accuracy_mean;
          row["accuracy_std"] = cell.accuracy_std;
          arr.push_back(std::move(row));
        }
        return arr;
      };
      Json res;
      res["schema"] = 1;
      res["seed"] = c.seed;
      res["cells"] = rows(report.cells);
      res["by_components"] = rows(report.by_components);
      res["by_avg_io"] = rows(report.by_avg_io);
      res["overall_mean"] = report.overall_mean;
      emit(c.out, dump(res), out);
    } else {
      // Cell rows first, then the two marginals with "all" on the pooled axis.
      std::string text = csv_header(c.seed, "components,avg_io,repeats,accuracy_mean,accuracy_std");
      auto row = [&](const std::string& n, const std::string& io, const AccuracyCell& cell) {
        text += fmt::format("{},{},{},{},{}\n", n, io, cell.repeats, num(cell.accuracy_mean), num(cell.accuracy_std));
      };
      for (const AccuracyCell& cell : report.cells) row(std::to_string(cell.components), num(cell.avg_io), cell);
      for (const AccuracyCell& cell : report.by_components) row(std::to_string(cell.components), "all", cell);
      for (const AccuracyCell& cell : report.by_avg_io) row("all", num(cell.avg_io), cell);
      emit(c.out, text, out);
    }
    return kOk;
  }
};

void raise_verbosity(int count) {
  if (count >= 2) {
    spdlog::set_level(spdlog::level::debug);
  } else if (count == 1 && spdlog::get_level() > spdlog::level::info) {
    spdlog::set_level(spdlog::level::info);
  }
}

}  // namespace

std::vector<int> parse_int_range(const std::string& text) { return parse_range<int>(text); }

std::vector<double> parse_real_range(const std::string& text) { return parse_range<double>(text); }

void init_logging(const std::string& fallback) {
  auto logger = spdlog::get("flare");
  if (!logger) logger = spdlog::stderr_color_mt("flare");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  const char* env = std::getenv("FLARE_LOG");
  spdlog::set_level(spdlog::level::from_str(env != nullptr ? env : fallback));
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fault localization in timed Petri nets and component systems", "flare"};
  app.require_subcommand(1);
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity, "more log output (repeatable)");

  CLI::App* tpn = app.add_subcommand("tpn", "time Petri net fault ranking")->require_subcommand(1);
  CLI::App* sim = app.add_subcommand("sim", "HMM-based component diagnosis")->require_subcommand(1);

  TpnGen tpn_gen;
  CLI::App* cmd = tpn->add_subcommand("gen", "generate one process/resource case");
  cmd->add_option("--p", tpn_gen.p, "process count")->required();
  cmd->add_option("--r", tpn_gen.r, "resource count")->required();
  cmd->add_option("--faults", tpn_gen.faults, "injected forget-to-release faults")->capture_default_str();
  cmd->add_option("--seed", tpn_gen.c.seed, "random seed")->capture_default_str();
  tpn_gen.c.add_out(cmd, false);
  tpn_gen.gen.add(cmd);
  CLI::App* tpn_gen_cmd = cmd;

  TpnAnalyze tpn_analyze;
  cmd = tpn->add_subcommand("analyze", "build the state graph and rank transitions");
  cmd->add_option("input", tpn_analyze.input, "net or case JSON")->required()->check(CLI::ExistingFile);
  cmd->add_option("--property", tpn_analyze.property, "deadlock or marking:<expr>")->capture_default_str();
  cmd->add_option("--max-states", tpn_analyze.max_states, "state cap")->capture_default_str();
  cmd->add_option("--emit-dot", tpn_analyze.dot, "write the graph in DOT format");
  cmd->add_flag("--time-abstraction", tpn_analyze.time_abstraction, "merge states linked by time ticks");
  tpn_analyze.seed_opt = cmd->add_option("--seed", tpn_analyze.c.seed, "seed echoed in the output header");
  tpn_analyze.c.add_out(cmd);
  CLI::App* tpn_analyze_cmd = cmd;

  TpnCampaign tpn_campaign;
  cmd = tpn->add_subcommand("campaign", "EXAM campaign over generated cases");
  cmd->add_option("--p", tpn_campaign.p, "process count range")->check(kIntRange)->capture_default_str();
  cmd->add_option("--r", tpn_campaign.r, "resource count range")->check(kIntRange)->capture_default_str();
  cmd->add_option("--faults", tpn_campaign.faults, "fault count range")->check(kIntRange)->capture_default_str();
  cmd->add_option("--cases", tpn_campaign.cases, "cases per fault count")->capture_default_str();
  tpn_campaign.c.seed = CampaignParams{}.seed;
  cmd->add_option("--seed", tpn_campaign.c.seed, "random seed")->capture_default_str();
  cmd->add_option("--max-states", tpn_campaign.max_states, "state cap per case")->capture_default_str();
  cmd->add_option("--max-attempts", tpn_campaign.max_attempts, "draws per case")->capture_default_str();
  cmd->add_option("--workers", tpn_campaign.c.workers, "worker threads (0: all cores)")->capture_default_str();
  cmd->add_flag("--time-abstraction", tpn_campaign.time_abstraction, "merge states linked by time ticks");
  cmd->add_option("--summary", tpn_campaign.summary, "write the per-fault-count summary CSV");
  tpn_campaign.c.add_out(cmd);
  tpn_campaign.gen.add(cmd);
  CLI::App* tpn_campaign_cmd = cmd;

  SimGen sim_gen;
  cmd = sim->add_subcommand("gen", "generate a component system and simulated test data");
  cmd->add_option("--components", sim_gen.components, "component count")->required();
  cmd->add_option("--avg-io", sim_gen.avg_io, "mean input and output port count")->required();
  cmd->add_option("--faults", sim_gen.faults, "faulty components (default: 20% of n)");
  cmd->add_option("--cases", sim_gen.cases, "test cases to simulate (0: none)")->capture_default_str();
  cmd->add_option("--seed", sim_gen.c.seed, "random seed")->capture_default_str();
  cmd->add_option("--failure-probability", sim_gen.generation.failure_probability, "failure chance of a faulty component")->capture_default_str();
  cmd->add_option("--propagation", sim_gen.simulation.propagation_probability, "chance that a failing input fails the outputs")->capture_default_str();
  sim_gen.c.add_out(cmd, false);
  CLI::App* sim_gen_cmd = cmd;

  SimAnalyze sim_analyze;
  cmd = sim->add_subcommand("analyze", "diagnose every component of a system");
  cmd->add_option("input", sim_analyze.input, "system JSON (optionally with dataset)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--data", sim_analyze.data, "dataset JSON")->check(CLI::ExistingFile);
  cmd->add_option("--dump-hmm", sim_analyze.dump_hmm, "write per-component model JSON to this directory");
  cmd->add_option("--seed", sim_analyze.c.seed, "random seed")->capture_default_str();
  cmd->add_option("--workers", sim_analyze.c.workers, "worker threads (0: all cores)")->capture_default_str();
  sim_analyze.search.add(cmd);
  sim_analyze.c.add_out(cmd);
  CLI::App* sim_analyze_cmd = cmd;

  SimEval sim_eval;
  cmd = sim->add_subcommand("eval", "diagnosis accuracy over generated systems");
  cmd->add_option("--components", sim_eval.components, "component count range")->check(kIntSteps)->capture_default_str();
  cmd->add_option("--avg-io", sim_eval.avg_io, "avg_io range")->check(kRealSteps)->capture_default_str();
  cmd->add_option("--cases", sim_eval.cases, "test cases per system")->capture_default_str();
  cmd->add_option("--repeats", sim_eval.repeats, "systems per configuration")->capture_default_str();
  cmd->add_option("--faults", sim_eval.faults, "faulty components per system (default: 20% of n)");
  sim_eval.c.seed = 3;
  cmd->add_option("--seed", sim_eval.c.seed, "random seed")->capture_default_str();
  cmd->add_option("--workers", sim_eval.c.workers, "worker threads (0: all cores)")->capture_default_str();
  cmd->add_option("--failure-probability", sim_eval.generation.failure_probability, "failure chance of a faulty component")->capture_default_str();
  cmd->add_option("--propagation", sim_eval.simulation.propagation_probability, "chance that a failing input fails the outputs")->capture_default_str();
  sim_eval.search.add(cmd);
  sim_eval.c.add_out(cmd);
  CLI::App* sim_eval_cmd = cmd;

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().back()->help());
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    const CLI::App* where = &app;
    while (!where->get_subcommands().empty()) where = where->get_subcommands().back();
    err << "error: " << e.what() << "\n\n" << where->help();
    return kUsage;
  }
  raise_verbosity(verbosity);

  try {
    if (tpn_gen_cmd->parsed()) return tpn_gen.run(out);
    if (tpn_analyze_cmd->parsed()) return tpn_analyze.run(out);
    if (tpn_campaign_cmd->parsed()) return tpn_campaign.run(out);
    if (sim_gen_cmd->parsed()) return sim_gen.run(out);
    if (sim_analyze_cmd->parsed()) return sim_analyze.run(out);
    if (sim_eval_cmd->parsed()) return sim_eval.run(out);
  } catch (const StateSpaceOverflow& e) {
    err << "error: " << e.what() << "\n";
    return kResourceCap;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  }
  err << app.help();
  return kUsage;
}

}  // namespace flare::cli
