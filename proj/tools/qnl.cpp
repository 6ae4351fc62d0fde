// Command line front end. Every file payload is one of the library's JSON
// schemas, and identical configuration gives byte-identical output: payloads
// carry no timestamps. Exit codes: 0 success, 1 failed run or failed check,
// 2 usage or configuration error.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qnl/selfcheck.hpp"

namespace {

using nlohmann::json;
using namespace qnl;

struct GlobalCfg {
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string format = "json";
  std::string out;
  double tol = 0;     // 0 keeps each solver's default
  int max_iters = 0;  // 0 keeps each solver's default
  int cap = 0;        // interior-point block-side cap
};

void write_text(const GlobalCfg& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(g.out);
  if (!f) throw ValidationError("cannot open output file: " + g.out);
  f << text;
}

void emit(const GlobalCfg& g, const json& j, const std::string& csv = "") {
  if (g.format == "csv" && !csv.empty())
    write_text(g, csv);
  else
    write_text(g, j.dump(2) + "\n");
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot open output file: " + path);
  f << text;
}

json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot read file: " + path);
  try {
    json j;
    f >> j;
    return j;
  } catch (const json::exception& e) {
    throw ValidationError("invalid JSON in " + path + ": " + std::string(e.what()));
  }
}

std::string fnum(double v) {
  char b[48];
  std::snprintf(b, sizeof b, "%.10g", v);
  return b;
}

// Payload readers; shape problems are configuration errors, not runtime ones.
Strategy strategy_from_file(const std::string& path) {
  try {
    return strategy_from_json(read_json_file(path));
  } catch (const json::exception& e) {
    throw ValidationError("bad strategy file " + path + ": " + std::string(e.what()));
  }
}

Behavior behavior_from_file(const std::string& path) {
  try {
    return behavior_from_json(read_json_file(path));
  } catch (const json::exception& e) {
    throw ValidationError("bad behavior file " + path + ": " + std::string(e.what()));
  }
}

Mat builtin_state(const std::string& name) {
  if (name == "pair" || name == "rho-bar")
    return scale(add(bell_proj(2), bell_proj(1)), 0.5).to_field(Field::real);
  if (name.rfind("bell", 0) == 0 && name.size() == 5 && name[4] >= '0' && name[4] <= '3')
    return bell_proj(name[4] - '0').to_field(Field::real);
  if (name == "product00") {
    Mat m = Mat::zero(Field::real, 4, 4);
    m.re(0, 0) = 1.0;
    return m;
  }
  if (name == "max-mixed") return scale(Mat::id(Field::real, 4), 0.25);
  throw ValidationError("unknown builtin state: " + name);
}

Mat load_two_rebit(const std::string& file, const std::string& builtin) {
  if (file.empty() && builtin.empty())
    throw ValidationError("give --state <file> or --builtin <name>");
  Mat m;
  if (!builtin.empty()) {
    m = builtin_state(builtin);
  } else {
    try {
      m = mat_from_json(read_json_file(file));
    } catch (const json::exception& e) {
      throw ValidationError("bad state file " + file + ": " + std::string(e.what()));
    }
  }
  if (m.rows() != 4 || m.cols() != 4)
    throw ValidationError("expected a 4 x 4 two-rebit state");
  if (m.field == Field::cplx) {
    if (m.im.cwiseAbs().maxCoeff() > 0)
      throw ValidationError("two-rebit states must be real");
    m = real_mat(m.re);
  }
  return m;
}

HierarchyOpts solver_opts(const GlobalCfg& g) {
  HierarchyOpts ho;
  if (g.tol > 0) {
    ho.interior.tol = g.tol;
    ho.splitting.tol = g.tol;
  }
  if (g.max_iters > 0) {
    ho.interior.max_iters = g.max_iters;
    ho.splitting.max_iters = g.max_iters;
  }
  if (g.cap > 0) ho.interior.side_cap = g.cap;
  return ho;
}

std::string csv_quote(const std::string& s) {
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

json strategy_summary(const Strategy& s, const std::string& field) {
  Behavior q = behavior_from_strategy(s);
  return json{{"field", field},
              {"score", bell_score(q)},
              {"ns_defect", ns_check(q)},
              {"dims", {{"a", s.da}, {"b", s.db}, {"c", s.dc}}}};
}

void add_bell(CLI::App& app, const GlobalCfg& g) {
  auto* bell = app.add_subcommand("bell", "strategies and scores for the network test");
  bell->fallthrough();
  bell->require_subcommand(1);

  auto* opt = bell->add_subcommand("optimal", "closed-form optimal complex strategy");
  opt->fallthrough();
  auto save_opt = std::make_shared<std::string>();
  opt->add_option("--save-strategy", *save_opt, "write the strategy JSON here");
  opt->callback([&g, save_opt] {
    Strategy s = build_optimal_complex_strategy();
    json j = strategy_summary(s, "complex");
    if (!save_opt->empty()) {
      write_file(*save_opt, strategy_to_json(s).dump(2) + "\n");
      j["strategy_file"] = *save_opt;
    }
    emit(g, j);
  });

  auto* see = bell->add_subcommand("seesaw", "alternating optimization from random starts");
  see->fallthrough();
  struct SeeCfg {
    std::string field = "complex";
    int seeds = 50, da = 2, db = 4, dc = 2;
    std::string save;
  };
  auto sc = std::make_shared<SeeCfg>();
  see->add_option("--field", sc->field, "real or complex")
      ->check(CLI::IsMember({"real", "complex"}));
  see->add_option("--seeds", sc->seeds, "number of random starts")->check(CLI::PositiveNumber);
  see->add_option("--da", sc->da, "Alice dimension");
  see->add_option("--db", sc->db, "Bob dimension");
  see->add_option("--dc", sc->dc, "Charlie dimension");
  see->add_option("--save-strategy", sc->save, "write the best strategy JSON here");
  see->callback([&g, sc] {
    Field f = sc->field == "real" ? Field::real : Field::cplx;
    SeesawBest sw = seesaw_search(f, sc->da, sc->db, sc->dc, sc->seeds, g.seed);
    json j = strategy_summary(sw.best.strat, sc->field);
    j["seeds"] = sc->seeds;
    j["seed"] = g.seed;
    j["rounds"] = sw.best.rounds;
    j["n_converged"] = sw.n_converged;
    if (!sc->save.empty()) {
      write_file(sc->save, strategy_to_json(sw.best.strat).dump(2) + "\n");
      j["strategy_file"] = sc->save;
    }
    emit(g, j);
  });

  auto* score = bell->add_subcommand("score", "score a strategy file");
  score->fallthrough();
  auto sfile = std::make_shared<std::string>();
  score->add_option("--strategy", *sfile, "strategy JSON")->required();
  score->callback([&g, sfile] {
    Strategy s = strategy_from_file(*sfile);
    emit(g, strategy_summary(s, s.state.field == Field::real ? "real" : "complex"));
  });

  auto* beh = bell->add_subcommand("behavior", "behavior produced by a strategy file");
  beh->fallthrough();
  auto bfile = std::make_shared<std::string>();
  beh->add_option("--strategy", *bfile, "strategy JSON")->required();
  beh->callback([&g, bfile] {
    Strategy s = strategy_from_file(*bfile);
    emit(g, behavior_to_json(behavior_from_strategy(s)));
  });
}

void add_measures(CLI::App& app, const GlobalCfg& g) {
  auto* ms = app.add_subcommand("measures", "distance and entanglement measures");
  ms->fallthrough();
  ms->require_subcommand(1);

  struct StateArgs {
    std::string file, builtin;
  };
  auto add_state = [](CLI::App* sub, const std::shared_ptr<StateArgs>& a) {
    sub->add_option("--state", a->file, "two-rebit state as matrix JSON");
    sub->add_option("--builtin", a->builtin,
                    "pair | rho-bar | bell0..bell3 | product00 | max-mixed");
  };

  auto* ds = ms->add_subcommand("dsep", "trace distance to the separable set");
  ds->fallthrough();
  auto dsa = std::make_shared<StateArgs>();
  add_state(ds, dsa);
  ds->callback([&g, dsa] {
    HierarchyOpts ho = solver_opts(g);
    SepDistance d = dsep_two_rebit(load_two_rebit(dsa->file, dsa->builtin), ho.interior);
    emit(g, json{{"value", d.value}, {"trace_distance_to_optimizer", d.td}});
  });

  auto* di = ms->add_subcommand("dind", "distance bounds to the product set");
  di->fallthrough();
  auto dia = std::make_shared<StateArgs>();
  auto starts = std::make_shared<int>(8);
  add_state(di, dia);
  di->add_option("--starts", *starts, "alternation restarts")->check(CLI::PositiveNumber);
  di->callback([&g, dia, starts] {
    IndBounds b = dind_bounds(load_two_rebit(dia->file, dia->builtin), *starts, g.seed);
    emit(g, json{{"lower", b.lower}, {"upper", b.upper}, {"rounds", b.rounds}});
  });

  auto* ef = ms->add_subcommand("ef", "entanglement of formation");
  ef->fallthrough();
  auto efa = std::make_shared<StateArgs>();
  add_state(ef, efa);
  ef->callback([&g, efa] {
    Mat rho = load_two_rebit(efa->file, efa->builtin);
    emit(g, json{{"value", ef_two_rebit(rho)},
                 {"concurrence", concurrence_two_rebit(rho)}});
  });
}

void add_sim(CLI::App& app, const GlobalCfg& g) {
  auto* sim = app.add_subcommand("sim", "real-model simulation checks");
  sim->fallthrough();
  sim->require_subcommand(1);

  auto* net = sim->add_subcommand("network", "run the full network simulation");
  net->fallthrough();
  struct NetCfg {
    std::string strategy, behavior_out;
  };
  auto nc = std::make_shared<NetCfg>();
  net->add_option("--strategy", nc->strategy, "strategy JSON (default: optimal complex)");
  net->add_option("--behavior", nc->behavior_out, "write the simulated behavior here");
  net->callback([&g, nc] {
    Strategy s = nc->strategy.empty() ? build_optimal_complex_strategy()
                                      : strategy_from_file(nc->strategy);
    NetworkSim r = simulate_network(s);
    json j{{"score", r.score},
           {"defects",
            {{"behavior", r.behavior_defect},
             {"prep", r.prep_defect},
             {"pre_measure", r.pre_measure_defect},
             {"source_frame", r.source_frame_defect},
             {"post_frame", r.post_frame_defect},
             {"post_state", r.post_state_defect}}},
           {"audit_ops", r.log.size()}};
    if (!nc->behavior_out.empty()) {
      write_file(nc->behavior_out, behavior_to_json(r.behavior).dump(2) + "\n");
      j["behavior_file"] = nc->behavior_out;
    }
    emit(g, j);
  });

  auto* lift = sim->add_subcommand("lift", "lifted probabilities vs the complex model");
  lift->fallthrough();
  auto trials = std::make_shared<int>(200);
  lift->add_option("--trials", *trials, "random instances")->check(CLI::PositiveNumber);
  lift->callback([&g, trials] {
    Rng rng(g.seed ^ 0x6c1f5a17u);
    double defect = 0;
    for (int t = 0; t < *trials; ++t) {
      int d = 2 + t % 3;
      int n_out = 2 + (t / 3) % 3;
      int n = 1 + t % 2;
      int rb = (t / 2) % n;
      Mat rho = random_state(Field::cplx, d, rng).m;
      Mat lrho = lift_state(rho, n);
      for (const Mat& e : random_povm(Field::cplx, d, n_out, rng))
        defect = std::max(defect, std::abs(hs_inner(lift_op(e, n, rb), lrho) -
                                           trace_re(mul(e, rho))));
    }
    emit(g, json{{"trials", *trials}, {"max_defect", defect}});
  });

  auto* bc = sim->add_subcommand("broadcast", "frame fixpoint under broadcasting");
  bc->fallthrough();
  auto max_n = std::make_shared<int>(6);
  bc->add_option("--max-n", *max_n, "largest frame size")->check(CLI::PositiveNumber);
  bc->callback([&g, max_n] {
    double fdef = 0;
    for (int n = 1; n <= *max_n; ++n) {
      Mat fs = frame_state(n), target = frame_state(n + 1);
      std::vector<int> dims(n, 2);
      for (int site = 0; site < n; ++site)
        fdef = std::max(fdef, max_abs(sub(broadcast_rebit(fs, dims, site), target)));
    }
    Rng rng(g.seed ^ 0x2b9d11u);
    double ldef = 0;
    for (int n = 1; n <= std::min(*max_n, 3); ++n) {
      Mat rho = random_state(Field::cplx, 3, rng).m;
      Mat lifted = lift_state(rho, n);
      Mat target = lift_state(rho, n + 1);
      std::vector<int> dims{3};
      dims.insert(dims.end(), n, 2);
      for (int site = 1; site <= n; ++site)
        ldef = std::max(ldef, max_abs(sub(broadcast_rebit(lifted, dims, site), target)));
    }
    emit(g, json{{"max_n", *max_n}, {"frame_defect", fdef}, {"lift_defect", ldef}});
  });
}

void add_hierarchy(CLI::App& app, const GlobalCfg& g) {
  auto* hi = app.add_subcommand("hierarchy", "moment-matrix relaxation");
  hi->fallthrough();
  hi->require_subcommand(1);

  struct HierCfg {
    int level = 1;
    double eps = 0;
    std::string fixed, backend = "interior", export_path = "hierarchy.dat-s", save;
  };

  auto* build = hi->add_subcommand("build", "compile an instance and export it");
  build->fallthrough();
  auto bcfg = std::make_shared<HierCfg>();
  bcfg->level = 2;
  build->add_option("--level", bcfg->level, "relaxation level (1, 2 or 3)");
  build->add_option("--eps", bcfg->eps, "source-independence slack in [0, 1]");
  build->add_option("--export", bcfg->export_path, "output instance path");
  build->add_option("--fixed", bcfg->fixed, "behavior JSON to pin (feasibility form)");
  build->callback([&g, bcfg] {
    std::optional<Behavior> q;
    if (!bcfg->fixed.empty()) q = behavior_from_file(bcfg->fixed);
    MomentProblem mp = build_moment_problem(bcfg->level, bcfg->eps, q);
    HierarchyOpts ho = solver_opts(g);
    ho.export_path = bcfg->export_path;
    HierarchyReport rep = solve_hierarchy(mp, HierarchyBackend::export_file, ho);
    SdpProblem canon = canonicalize(compile_sdp(mp).sdp).p;
    json sides = json::array();
    for (const auto& b : canon.blocks) sides.push_back(b.side);
    json j = report_to_json(rep);
    j["structure"] = json{{"side", mp.side},
                          {"tau_classes", mp.tau_classes.size()},
                          {"sigma_classes", mp.sigma_classes.size()},
                          {"constraints", canon.cons.size()},
                          {"block_sides", sides}};
    emit(g, j);
  });

  auto* solve = hi->add_subcommand("solve", "solve an instance in process");
  solve->fallthrough();
  auto scfg = std::make_shared<HierCfg>();
  solve->add_option("--level", scfg->level, "relaxation level (1, 2 or 3)");
  solve->add_option("--eps", scfg->eps, "source-independence slack in [0, 1]");
  solve->add_option("--backend", scfg->backend, "interior or splitting")
      ->check(CLI::IsMember({"interior", "splitting"}));
  solve->add_option("--fixed", scfg->fixed, "behavior JSON to pin (feasibility form)");
  solve->callback([&g, scfg] {
    std::optional<Behavior> q;
    if (!scfg->fixed.empty()) q = behavior_from_file(scfg->fixed);
    MomentProblem mp = build_moment_problem(scfg->level, scfg->eps, q);
    HierarchyBackend be = scfg->backend == "interior" ? HierarchyBackend::interior
                                                      : HierarchyBackend::splitting;
    emit(g, report_to_json(solve_hierarchy(mp, be, solver_opts(g))));
  });
}

void add_bound(CLI::App& app, const GlobalCfg& g) {
  auto* bd = app.add_subcommand("bound", "separability bound implied by a score");
  bd->fallthrough();
  auto scores = std::make_shared<std::vector<double>>();
  bd->add_option("--score", *scores, "observed functional value")->required();
  bd->callback([&g, scores] {
    json arr = json::array();
    std::string csv = "score,dsep_lower,method\n";
    for (double s : *scores) {
      double v = epsilon_lower_bound(s);
      arr.push_back(json{{"score", s}, {"dsep_lower", v}, {"method", "linear"}});
      csv += fnum(s) + "," + fnum(v) + ",linear\n";
    }
    emit(g, arr, csv);
  });
}

void add_table1(CLI::App& app, const GlobalCfg& g) {
  auto* tb = app.add_subcommand("table1", "score grid with the linear slack bound");
  tb->fallthrough();
  tb->callback([&g] {
    const double scores[] = {7.66, 7.72, 7.78, 7.88, 8.06, 8.22, 8.37, 8.50};
    json arr = json::array();
    std::string csv = "score,eps2_percent\n";
    for (double s : scores) {
      double pct = std::floor(100 * epsilon_lower_bound(s) * 10 + 0.5) / 10;
      arr.push_back(json{{"score", s}, {"eps2_percent", pct}});
      char line[64];
      std::snprintf(line, sizeof line, "%.2f,%.1f\n", s, pct);
      csv += line;
    }
    emit(g, arr, csv);
  });
}

void add_experiments(CLI::App& app, const GlobalCfg& g) {
  auto* ex = app.add_subcommand("experiments", "bounds implied by the reported scores");
  ex->fallthrough();
  auto dir = std::make_shared<std::string>(".");
  ex->add_option("--bounds-dir", *dir, "directory scanned for relaxation reports");
  ex->callback([&g, dir] {
    namespace fs = std::filesystem;
    std::vector<std::string> files;
    if (fs::is_directory(*dir))
      for (const auto& e : fs::directory_iterator(*dir))
        if (e.is_regular_file() && e.path().extension() == ".json")
          files.push_back(e.path().string());
    std::sort(files.begin(), files.end());

    struct Point {
      double eps, bound;
      std::string file;
    };
    std::vector<Point> grid;
    json used = json::array();
    for (const auto& f : files) {
      std::ifstream in(f);
      json j;
      try {
        in >> j;
      } catch (const json::exception&) {
        continue;
      }
      if (!j.is_object() || !j.contains("level") || !j.contains("eps") ||
          !j.contains("bound") || !j.contains("backend"))
        continue;
      if (!j["eps"].is_number() || !j["bound"].is_number()) continue;
      grid.push_back({j["eps"].get<double>(), j["bound"].get<double>(), f});
      used.push_back(json{{"file", f},
                          {"level", j["level"]},
                          {"eps", j["eps"]},
                          {"bound", j["bound"]}});
    }

    json exps = json::array();
    for (double score : {8.09, 7.83}) {
      double v = epsilon_lower_bound(score);
      json e{{"score", score},
             {"linear",
              {{"dsep_lower", std::round(v * 1e4) / 1e4},
               {"dsep_lower_full", v},
               {"method", "linear"}}}};
      double above = -1, undecided = -1;
      for (const auto& p : grid) {
        if (score > p.bound + 1e-5)
          above = std::max(above, p.eps);
        else
          undecided = undecided < 0 ? p.eps : std::min(undecided, p.eps);
      }
      if (above >= 0) {
        e["relaxation"] = json{{"dsep_above", above},
                               {"method", "relaxation grid"},
                               {"points", grid.size()}};
        if (undecided >= 0) e["relaxation"]["undecided_from"] = undecided;
      }
      exps.push_back(e);
    }
    json out{{"experiments", exps}, {"reports_used", used}};
    if (grid.empty()) out["note"] = "no relaxation reports found; linear bounds only";
    emit(g, out);
  });
}

void add_reproduce(CLI::App& app, const GlobalCfg& g, int& rc) {
  auto* rp = app.add_subcommand("reproduce", "run the full verification suite");
  rp->fallthrough();
  struct RepCfg {
    std::string only, expected;
  };
  auto rcfg = std::make_shared<RepCfg>();
  rp->add_option("--only", rcfg->only,
                 "restrict to one group: bell|measures|table|sim|hierarchy|bound");
  rp->add_option("--expected", rcfg->expected, "JSON overrides for scalar targets");
  rp->callback([&g, rcfg, &rc] {
    static const std::set<std::string> groups{"bell",      "measures", "table",
                                              "sim",       "hierarchy", "bound"};
    if (!rcfg->only.empty() && !groups.count(rcfg->only))
      throw ValidationError("unknown group for --only: " + rcfg->only);
    SelfCheckOpts so;
    so.seed = g.seed;
    so.only = rcfg->only;
    if (!rcfg->expected.empty()) so.expected = ExpectedTable::load(rcfg->expected);
    auto rows = run_selfcheck(so, [](const CheckRow& r) {
      std::fprintf(stderr, "[%s] %2d %-24s %s (%.1fs)\n", r.pass ? "PASS" : "FAIL",
                   r.id, r.name.c_str(), r.measured.c_str(), r.seconds);
    });
    json jrows = json::array();
    std::string csv = "id,name,group,pass,measured,expected,tol\n";
    std::string failed;
    bool all = true;
    for (const auto& r : rows) {
      jrows.push_back(json{{"id", r.id},
                           {"name", r.name},
                           {"group", r.group},
                           {"pass", r.pass},
                           {"measured", r.measured},
                           {"expected", r.expected},
                           {"tol", r.tol}});
      csv += std::to_string(r.id) + "," + csv_quote(r.name) + "," + csv_quote(r.group) +
             "," + (r.pass ? "true" : "false") + "," + csv_quote(r.measured) + "," +
             csv_quote(r.expected) + "," + csv_quote(r.tol) + "\n";
      if (!r.pass) {
        all = false;
        failed += (failed.empty() ? "" : ", ") + r.name;
      }
    }
    emit(g, json{{"rows", jrows}, {"all_pass", all}, {"seed", g.seed}}, csv);
    if (!all) {
      std::fprintf(stderr, "failed: %s\n", failed.c_str());
      rc = 1;
    }
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for real-model network correlations"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalCfg g;
  app.add_option("--seed", g.seed, "base seed for randomized subcommands")
      ->capture_default_str();
  app.add_option("--jobs", g.jobs, "worker-thread cap (solvers are single threaded)")
      ->check(CLI::PositiveNumber);
  app.add_option("--format", g.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  app.add_option("--out", g.out, "write the payload here instead of stdout");
  app.add_option("--tol", g.tol, "solver tolerance override");
  app.add_option("--max-iters", g.max_iters, "solver iteration cap override");
  app.add_option("--cap", g.cap, "interior-point block-side cap override");
  app.set_config("--config", "", "flat key = value defaults file");
  app.allow_config_extras(false);

  int rc = 0;
  add_bell(app, g);
  add_measures(app, g);
  add_sim(app, g);
  add_hierarchy(app, g);
  add_bound(app, g);
  add_table1(app, g);
  add_experiments(app, g);
  add_reproduce(app, g, rc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
