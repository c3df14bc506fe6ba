#include "commands.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "pgcl/chain.hpp"
#include "pgcl/errors.hpp"
#include "pgcl/oracle.hpp"
#include "pgcl/region.hpp"
#include "pgcl/rules.hpp"
#include "pgcl/serialize.hpp"
#include "pgcl/strengthen.hpp"
#include "pgcl/syntax.hpp"

namespace pgcl::cli {

namespace {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Flags shared by the subcommands. Empty values fall back to the run file,
// which defaults to the program path with a .json extension.
struct Options {
  std::string program_path;
  std::string config_path;
  bool no_config = false;
  std::string post;
  std::vector<std::string> init;
  std::vector<std::string> params;
  std::string strengthen;
  std::string emit = "human";
  std::optional<std::size_t> max_states;
  std::optional<unsigned> max_depth;
  std::string method = "auto";
  std::size_t exact_limit = 600;
  unsigned jobs = 1;
};

struct Context {
  Options opt;
  Json meta = Json::object();
  Program program;
  std::map<std::string, Rational> params;
  Budget budget;
  SolveOptions solve;

  std::string text(const std::string& flag, const char* key) const {
    if (!flag.empty()) return flag;
    if (meta.contains(key) && meta[key].is_string()) return meta[key].get<std::string>();
    return "";
  }

  std::string required(const std::string& flag, const char* key, const char* what) const {
    std::string t = text(flag, key);
    if (t.empty()) throw Error(std::string("missing ") + what + " (flag or '" + key + "' in the run file)");
    return t;
  }

  Expectation expectation(const std::string& t) const {
    Expectation f = parse_expectation(t);
    for (const auto& [name, value] : params) f = subst(f, name, arith::lit(value));
    return f;
  }

  std::vector<State> region(const std::vector<std::string>& texts) const {
    std::vector<State> out;
    for (const std::string& t : texts) {
      for (State& s : parse_region(fill_placeholders(t, params))) out.push_back(std::move(s));
    }
    return out;
  }

  std::vector<State> init_states() const {
    std::vector<std::string> texts = opt.init;
    if (texts.empty() && meta.contains("init")) {
      if (meta["init"].is_array()) {
        for (const Json& j : meta["init"]) texts.push_back(j.get<std::string>());
      } else {
        texts.push_back(meta["init"].get<std::string>());
      }
    }
    if (texts.empty()) texts.push_back("");
    return region(texts);
  }

  std::optional<Json> strengthening() const {
    if (!opt.strengthen.empty()) {
      std::string s = opt.strengthen;
      if (s.find('{') == std::string::npos) s = read_file(s);
      return Json::parse(s);
    }
    if (meta.contains("strengthen")) return meta["strengthen"];
    return std::nullopt;
  }

  Guard loop_guard() const { return split_loop(program).second->cond; }

  // The strengthening instantiated at the current parameter values.
  std::optional<StrengthenSpec> spec() const {
    auto sj = strengthening();
    if (!sj) return std::nullopt;
    StrengthenTemplate shape = template_from_json(*sj);
    std::string param = sweep_param(*sj);
    Rational value = 0;
    if (!param.empty()) {
      auto it = params.find(param);
      if (it == params.end()) throw Error("strengthening needs a value for '" + param + "' (use --param)");
      value = it->second;
    }
    StrengthenTemplate fixed = shape;
    // Other parameters are substituted as constants too.
    for (const auto& [name, v] : params) {
      if (name == param) continue;
      for (BoxBound& b : fixed.bounds) {
        b.lhs = substitute(b.lhs, name, arith::lit(v));
        b.bound = substitute(b.bound, name, arith::lit(v));
      }
      for (Guard& g : fixed.extra) g = substitute(g, name, arith::lit(v));
      if (fixed.replacement) fixed.replacement = substitute(*fixed.replacement, name, arith::lit(v));
    }
    return fixed.instantiate(loop_guard(), param, value);
  }
};

SolveMethod solve_method(const std::string& s) {
  if (s == "auto") return SolveMethod::Auto;
  if (s == "exact") return SolveMethod::Exact;
  if (s == "certified") return SolveMethod::Certified;
  if (s == "value-iteration") return SolveMethod::ValueIter;
  throw Error("unknown method '" + s + "' (auto, exact, certified, value-iteration)");
}

void add_common(CLI::App* cmd, Options& o, bool program_required = true) {
  auto* p = cmd->add_option("program", o.program_path, "pGCL source file");
  if (program_required) p->required();
  cmd->add_option("--config", o.config_path, "run file (default: program path with .json)");
  cmd->add_flag("--no-config", o.no_config, "ignore the run file next to the program");
  cmd->add_option("--post,-f", o.post, "postexpectation");
  cmd->add_option("--init,-i", o.init, "initial state or region, e.g. 'n=1' or 'n=0..5, b=0'");
  cmd->add_option("--param,-p", o.params, "parameter value NAME=VALUE");
  cmd->add_option("--strengthen,-s", o.strengthen, "strengthening JSON (inline or file)");
  cmd->add_option("--emit", o.emit, "output format")->check(CLI::IsMember({"human", "json", "csv"}));
  cmd->add_option("--max-states", o.max_states, "exploration budget per chain");
  cmd->add_option("--max-depth", o.max_depth, "nesting budget for inner loops");
  cmd->add_option("--method", o.method, "auto, exact, certified or value-iteration");
  cmd->add_option("--exact-limit", o.exact_limit, "auto: exact elimination up to this many unknowns");
  cmd->add_option("--jobs,-j", o.jobs, "worker threads");
}

Context load(const Options& o) {
  Context c;
  c.opt = o;
  std::string config = o.config_path;
  if (config.empty() && !o.no_config && !o.program_path.empty()) {
    fs::path sibling = fs::path(o.program_path).replace_extension(".json");
    if (fs::exists(sibling)) config = sibling.string();
  }
  if (!config.empty()) c.meta = Json::parse(read_file(config));
  if (!o.program_path.empty()) c.program = parse_program(read_file(o.program_path));
  if (c.meta.contains("params")) {
    for (const auto& [name, v] : c.meta["params"].items()) c.params[name] = rational_from_json(v);
  }
  for (const std::string& p : o.params) {
    std::size_t eq = p.find('=');
    if (eq == std::string::npos) throw Error("expected NAME=VALUE in --param '" + p + "'");
    c.params[p.substr(0, eq)] = parse_rational(p.substr(eq + 1));
  }
  if (c.meta.contains("budget")) {
    const Json& b = c.meta["budget"];
    c.budget.max_states = b.value("max_states", c.budget.max_states);
    c.budget.max_depth = b.value("max_depth", c.budget.max_depth);
  }
  if (o.max_states) c.budget.max_states = *o.max_states;
  if (o.max_depth) c.budget.max_depth = *o.max_depth;
  c.solve.method = solve_method(o.method);
  c.solve.exact_limit = o.exact_limit;
  return c;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

// ---------------------------------------------------------------------------

int cmd_solve(const Options& o, std::ostream& out) {
  Context c = load(o);
  Expectation f = c.expectation(c.required(o.post, "post", "postexpectation"));
  std::vector<State> init = c.init_states();
  std::optional<StrengthenSpec> spec = c.spec();
  ProgramSolve r = solve_program(c.program, spec ? &*spec : nullptr, f, init, c.budget, c.solve);
  if (o.emit == "json") {
    Json j;
    Json values = Json::array();
    for (const auto& [s, v] : r.values) {
      Json row = value_json(v);
      row["state"] = s.str();
      values.push_back(std::move(row));
    }
    j["values"] = std::move(values);
    j["method"] = method_name(r.method);
    j["states"] = r.states;
    j["truncated"] = r.truncated;
    out << j.dump(2) << "\n";
  } else if (o.emit == "csv") {
    out << "state,value_exact,value_decimal,states\n";
    for (const auto& [s, v] : r.values) {
      out << csv_field(s.str()) << "," << v.str() << "," << v.decimal() << "," << r.states << "\n";
    }
  } else {
    for (const auto& [s, v] : r.values) {
      out << "state   " << s.str() << "\n";
      out << "value   " << v.str() << "\n";
      out << "decimal " << v.decimal() << "\n";
    }
    out << "method " << method_name(r.method) << ", chain states " << r.states << ", truncated "
        << (r.truncated ? "yes" : "no") << "\n";
  }
  return r.truncated ? kTruncated : kOk;
}

int cmd_sweep(const Options& o, const std::string& values_flag, std::ostream& out, std::ostream& err) {
  Context c = load(o);
  Expectation f = c.expectation(c.required(o.post, "post", "postexpectation"));
  std::vector<State> init = c.init_states();
  auto sj = c.strengthening();
  if (!sj) throw Error("sweep needs a strengthening");
  std::string param = sweep_param(*sj);
  if (param.empty()) throw Error("strengthening has no sweep parameter");
  std::vector<Rational> values;
  if (!values_flag.empty()) {
    std::stringstream ss(values_flag);
    std::string item;
    while (std::getline(ss, item, ',')) values.push_back(parse_rational(item));
  } else {
    values = sweep_values(*sj);
  }
  if (values.empty()) throw Error("no sweep values");
  SweepFamily family = make_sweep_family(c.loop_guard(), param, values, template_from_json(*sj));
  SweepResult r = sweep(c.program, family, f, init, c.budget, c.solve, o.jobs);

  bool truncated = false;
  for (const SweepRow& row : r.rows) {
    if (!row.error.empty()) {
      err << "error at " << param << "=" << to_string(row.param) << ": " << row.error << "\n";
      return kError;
    }
    truncated = truncated || row.truncated;
  }
  if (o.emit == "json") {
    Json j;
    j["param"] = param;
    j["nested"] = r.nested;
    j["nondecreasing"] = r.nondecreasing;
    Json rows = Json::array();
    for (const SweepRow& row : r.rows) {
      for (const auto& [s, v] : row.values) {
        Json x = value_json(v);
        x["M"] = to_string(row.param);
        x["state"] = s.str();
        x["states"] = row.states;
        x["method"] = method_name(row.method);
        x["truncated"] = row.truncated;
        rows.push_back(std::move(x));
      }
    }
    j["rows"] = std::move(rows);
    out << j.dump(2) << "\n";
  } else {
    out << "M,state,value_exact,value_decimal,states,millis\n";
    for (const SweepRow& row : r.rows) {
      for (const auto& [s, v] : row.values) {
        out << to_string(row.param) << "," << csv_field(s.str()) << "," << v.str() << "," << v.decimal() << ","
            << row.states << "," << static_cast<long long>(row.millis) << "\n";
      }
    }
  }
  if (r.nested && !r.nondecreasing) {
    err << "bound decreased at " << param << "=" << to_string(r.violation->first) << " for "
        << r.violation->second.str() << " although the family is nested\n";
    return kError;
  }
  if (!r.nested) err << "note: the family is not nested, so monotonicity is not asserted\n";
  return truncated ? kTruncated : kOk;
}

struct CertifyFlags {
  std::string bound;
  std::string domain;
  std::string inner;
  std::optional<unsigned> ast_n;
  std::optional<unsigned> ui_n_max;
  std::string cdb_c;
  std::string sup_c;
  std::string out_path;
  std::string replay;
};

void print_certificate(const Certificate& cert, std::ostream& out) {
  out << "rule    " << rule_name(cert.rule) << "\n";
  out << "loop    " << cert.loop << "\n";
  out << "post    " << cert.post << "\n";
  out << "bound   " << cert.bound << "\n";
  out << "domain  " << cert.domain.size() << " states\n";
  for (const SideCondition& s : cert.conditions) {
    out << "  " << kind_name(s.kind) << ": " << status_name(s.status);
    if (!s.message.empty()) out << "  " << s.message;
    out << "\n";
    for (const auto& [k, v] : s.evidence) out << "      " << k << " = " << v << "\n";
    if (s.witness) out << "      witness = " << s.witness->str() << "\n";
  }
  out << "verdict " << verdict_name(cert.verdict) << "\n";
}

int cmd_certify(const Options& o, const CertifyFlags& cf, std::ostream& out, std::ostream& err) {
  if (!cf.replay.empty()) {
    Json cert = Json::parse(read_file(cf.replay));
    Replay r = replay_certificate(cert);
    if (r.matches) {
      out << "replay matches: " << cert.value("verdict", "?") << "\n";
      return kOk;
    }
    err << "replay differs: " << r.detail << "\n";
    return kError;
  }
  Context c = load(o);
  CertifyRequest req;
  req.loop = split_loop(c.program).second;
  req.post = c.expectation(c.required(o.post, "post", "postexpectation"));
  req.domain = c.region({c.required(cf.domain, "domain", "domain")});
  std::optional<StrengthenSpec> spec = c.spec();
  req.spec = spec ? *spec : make_box_strengthening(req.loop->cond, {});
  req.inner = parse_inner_rule(c.text(cf.inner, "inner").empty() ? "HARK" : c.text(cf.inner, "inner"));
  // The exact solve produces its own bound; a candidate is only compared.
  std::string bound = c.text(cf.bound, "bound");
  if (bound.empty() && req.inner != InnerRule::EXACT_SOLVE) {
    throw Error("missing candidate bound (flag or 'bound' in the run file)");
  }
  req.bound = Bound(bound.empty() ? ex::zero() : c.expectation(bound));
  req.budget = c.budget;
  req.options.solve = c.solve;
  req.options.ast_n = cf.ast_n;
  if (cf.ui_n_max) req.options.ui.n_max = *cf.ui_n_max;
  if (!cf.cdb_c.empty()) req.options.ui.cdb_c = parse_rational(cf.cdb_c);
  if (!cf.sup_c.empty()) req.options.ui.sup_c = parse_rational(cf.sup_c);
  if (split_loop(c.program).first->kind != StmtKind::Skip) {
    err << "note: certifying the trailing loop; the prefix is not part of the certificate\n";
  }

  Certificate cert = certify_lower_bound(req);
  Json j = certificate_json(cert, req);
  if (!cf.out_path.empty()) {
    std::ofstream file(cf.out_path);
    if (!file) throw Error("cannot write '" + cf.out_path + "'");
    file << j.dump(2) << "\n";
  }
  if (o.emit == "json") {
    out << j.dump(2) << "\n";
  } else {
    print_certificate(cert, out);
  }
  return cert.verdict == Verdict::CERTIFIED ? kOk : kError;
}

int cmd_diff(const Options& o, std::string g1, std::string g2, std::ostream& out) {
  Context c = load(o);
  Json d = c.meta.contains("diff") ? c.meta["diff"] : Json::object();
  if (g1.empty()) g1 = d.value("guard1", "");
  if (g2.empty()) g2 = d.value("guard2", "");
  if (g1.empty() || g2.empty()) throw Error("diff needs --guard1 and --guard2");
  std::string post = o.post.empty() ? d.value("post", "") : o.post;
  if (post.empty()) post = c.required("", "post", "postexpectation");
  std::vector<State> init;
  if (o.init.empty() && d.contains("init")) {
    init = c.region({d["init"].get<std::string>()});
  } else {
    init = c.init_states();
  }
  Program loop = split_loop(c.program).second;
  DiffResult r = diff_decomposition(parse_guard(fill_placeholders(g1, c.params)),
                                    parse_guard(fill_placeholders(g2, c.params)), loop->children[0],
                                    c.expectation(post), init, c.budget);
  if (o.emit == "json") {
    Json j;
    Json rows = Json::array();
    for (const DiffRow& row : r.rows) {
      Json x;
      x["state"] = row.state.str();
      x["wp_g"] = row.wp_g.str();
      x["wp_g2"] = row.wp_g2.str();
      x["both_g2_out"] = row.both_g2_out.str();
      x["both_g_out"] = row.both_g_out.str();
      x["trace_a"] = row.trace_a.str();
      x["trace_b"] = row.trace_b.str();
      x["truncated"] = row.truncated;
      x["identity"] = row.identity_holds;
      rows.push_back(std::move(x));
    }
    j["rows"] = std::move(rows);
    j["all_exact"] = r.all_exact;
    j["identity_holds"] = r.identity_holds;
    out << j.dump(2) << "\n";
  } else {
    out << "state,wp_g,wp_g2,both_g2_out,trace_a,both_g_out,trace_b,identity\n";
    for (const DiffRow& row : r.rows) {
      out << csv_field(row.state.str()) << "," << row.wp_g.str() << "," << row.wp_g2.str() << ","
          << row.both_g2_out.str() << "," << row.trace_a.str() << "," << row.both_g_out.str() << ","
          << row.trace_b.str() << "," << (row.truncated ? "truncated" : row.identity_holds ? "holds" : "FAILS")
          << "\n";
    }
    out << "identity " << (r.identity_holds ? "holds" : "fails") << (r.all_exact ? "" : " (some rows truncated)")
        << "\n";
  }
  if (!r.all_exact) return kTruncated;
  return r.identity_holds ? kOk : kError;
}

struct SimFlags {
  std::optional<unsigned long long> trials;
  std::optional<unsigned long long> max_steps;
  std::optional<std::uint64_t> seed;
};

int cmd_simulate(const Options& o, const SimFlags& sf, std::ostream& out) {
  Context c = load(o);
  Expectation f = c.expectation(c.required(o.post, "post", "postexpectation"));
  std::vector<State> init = c.init_states();
  unsigned long long trials = sf.trials ? *sf.trials : c.meta.value("trials", 100000ULL);
  unsigned long long max_steps = sf.max_steps ? *sf.max_steps : c.meta.value("max_steps", 100000ULL);
  std::uint64_t seed = sf.seed ? *sf.seed : c.meta.value("seed", std::uint64_t{1});
  Program program = c.program;
  if (std::optional<StrengthenSpec> spec = c.spec()) {
    auto [prefix, loop] = split_loop(program);
    f = restricted_post(loop->cond, f);
    program = prog::seq({prefix, apply_strengthening(loop, *spec)});
  }
  Json all = Json::array();
  for (const State& s : init) {
    Estimate e = estimate_wp(program, f, s, trials, max_steps, seed, o.jobs);
    if (o.emit == "json") {
      Json j = estimate_json(e);
      j["state"] = s.str();
      all.push_back(std::move(j));
      continue;
    }
    out << "state          " << s.str() << "\n";
    out << "CUTOFF FRACTION " << e.cutoff_fraction << " (" << e.cutoffs << " of " << e.trials << " runs)\n";
    out << "mean           " << e.mean << " +- " << e.half_width << " (99%)\n";
    out << "seed           " << e.seed << "\n";
  }
  if (o.emit == "json") out << all.dump(2) << "\n";
  return kOk;
}

int cmd_parse(const Options& o, bool dump_chain, std::ostream& out) {
  Context c = load(o);
  out << pretty_print(c.program) << "\n";
  if (!dump_chain) return kOk;
  std::vector<State> init = c.init_states();
  auto [prefix, loop] = split_loop(c.program);
  if (std::optional<StrengthenSpec> spec = c.spec()) loop = apply_strengthening(loop, *spec);
  StepEngine engine(c.budget);
  std::vector<State> entry;
  for (const State& s : init) {
    for (const auto& [t, w] : engine.step(prefix, s).outcomes) entry.push_back(t);
  }
  MarkovChain chain = explore(loop, entry, engine);
  std::string post = c.text(o.post, "post");
  if (!post.empty()) {
    Expectation f = c.expectation(post);
    if (c.spec()) f = restricted_post(split_loop(c.program).second->cond, f);
    attach_rewards(chain, closed_form(f));
  }
  out << dump(chain);
  return chain.truncated ? kTruncated : kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lower bounds on weakest preexpectations of pGCL loops", "pgcl"};
  app.require_subcommand(1);

  Options solve_o, sweep_o, certify_o, diff_o, sim_o, parse_o;
  std::string values_flag, g1, g2;
  CertifyFlags cf;
  SimFlags sf;
  bool dump_chain = false;

  CLI::App* solve = app.add_subcommand("solve", "exact lower bound from the strengthened loop's chain");
  add_common(solve, solve_o);

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "solve a family of strengthenings, CSV per parameter value");
  add_common(sweep_cmd, sweep_o);
  sweep_cmd->add_option("--values", values_flag, "comma-separated parameter values");

  CLI::App* certify = app.add_subcommand("certify", "check a candidate lower bound by guard strengthening");
  add_common(certify, certify_o, false);
  certify->add_option("--bound,-l", cf.bound, "candidate lower bound");
  certify->add_option("--domain,-d", cf.domain, "finite domain, e.g. 'n=-2..12'");
  certify->add_option("--inner", cf.inner, "HARK, MM or EXACT_SOLVE");
  certify->add_option("--ast-n", cf.ast_n, "step count N of the AST witness (searched when absent)");
  certify->add_option("--ui-n-max", cf.ui_n_max, "search bound for a bounded looping time");
  certify->add_option("--cdb-c", cf.cdb_c, "constant for the conditional difference check");
  certify->add_option("--sup-c", cf.sup_c, "constant bounding l on the domain");
  certify->add_option("--out,-o", cf.out_path, "write the certificate JSON here");
  certify->add_option("--replay", cf.replay, "re-check a stored certificate");

  CLI::App* diff = app.add_subcommand("diff", "terms of the wp-difference identity between two guards");
  add_common(diff, diff_o);
  diff->add_option("--guard1", g1, "first guard");
  diff->add_option("--guard2", g2, "second guard");

  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo estimate of wp");
  add_common(simulate, sim_o);
  simulate->add_option("--trials", sf.trials, "number of runs");
  simulate->add_option("--max-steps", sf.max_steps, "loop iterations before a run is cut off");
  simulate->add_option("--seed", sf.seed, "generator seed");

  CLI::App* parse = app.add_subcommand("parse", "pretty-print a program, optionally dump its chain");
  add_common(parse, parse_o);
  parse->add_flag("--dump-chain", dump_chain, "export the loop's chain from the initial states");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kError;
  }

  try {
    if (*solve) return cmd_solve(solve_o, out);
    if (*sweep_cmd) return cmd_sweep(sweep_o, values_flag, out, err);
    if (*certify) {
      if (cf.replay.empty() && certify_o.program_path.empty()) throw Error("certify needs a program or --replay");
      return cmd_certify(certify_o, cf, out, err);
    }
    if (*diff) return cmd_diff(diff_o, g1, g2, out);
    if (*simulate) return cmd_simulate(sim_o, sf, out);
    if (*parse) return cmd_parse(parse_o, dump_chain, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}

}  // namespace pgcl::cli
