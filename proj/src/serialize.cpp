#include "pgcl/serialize.hpp"

#include "pgcl/errors.hpp"
#include "pgcl/eval.hpp"
#include "pgcl/syntax.hpp"

namespace pgcl {

namespace {

const char* solve_method_name(SolveMethod m) {
  switch (m) {
    case SolveMethod::Auto: return "auto";
    case SolveMethod::Exact: return "exact";
    case SolveMethod::Certified: return "certified";
    case SolveMethod::ValueIter: return "value-iteration";
  }
  return "?";
}

SolveMethod parse_solve_method(const std::string& s) {
  for (SolveMethod m : {SolveMethod::Auto, SolveMethod::Exact, SolveMethod::Certified, SolveMethod::ValueIter}) {
    if (s == solve_method_name(m)) return m;
  }
  throw Error("unknown solve method '" + s + "'");
}

Json optional_rational(const std::optional<Rational>& q) { return q ? Json(to_string(*q)) : Json(nullptr); }

std::optional<Rational> optional_rational(const Json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return rational_from_json(j[key]);
}

}  // namespace

Rational rational_from_json(const Json& j) {
  if (j.is_number_integer()) return Rational(j.get<long>());
  if (j.is_number()) return parse_rational(j.dump());
  if (j.is_string()) return parse_rational(j.get<std::string>());
  throw Error("expected a number, got " + j.dump());
}

Json value_json(const ExtRat& v) {
  Json j;
  j["exact"] = v.str();
  j["decimal"] = v.decimal();
  return j;
}

Json table_json(const Table& t) {
  Json rows = Json::array();
  for (const auto& [s, v] : t) {
    Json r;
    r["state"] = s.str();
    r["value"] = v.str();
    rows.push_back(std::move(r));
  }
  return rows;
}

Table table_from_json(const Json& j) {
  Table t;
  for (const Json& r : j) t[parse_state(r.at("state").get<std::string>())] = parse_extrat(r.at("value").get<std::string>());
  return t;
}

Json condition_json(const SideCondition& c) {
  Json j;
  j["kind"] = kind_name(c.kind);
  j["status"] = status_name(c.status);
  j["message"] = c.message;
  Json ev = Json::object();
  for (const auto& [k, v] : c.evidence) ev[k] = v;
  j["evidence"] = std::move(ev);
  j["witness"] = c.witness ? Json(c.witness->str()) : Json(nullptr);
  return j;
}

Json request_json(const CertifyRequest& r) {
  Json j;
  j["program"] = pretty_print(r.loop);
  j["post"] = pretty_print(r.post);
  Json bound;
  if (r.bound.table) {
    bound["table"] = table_json(*r.bound.table);
  } else {
    bound["expr"] = pretty_print(r.bound.expr);
  }
  j["bound"] = std::move(bound);
  Json spec;
  spec["base"] = pretty_print(r.spec.base);
  spec["guard"] = pretty_print(r.spec.resulting);
  spec["by_construction"] = r.spec.by_construction;
  j["strengthening"] = std::move(spec);
  j["inner"] = inner_rule_name(r.inner);
  Json domain = Json::array();
  for (const State& s : r.domain) domain.push_back(s.str());
  j["domain"] = std::move(domain);
  j["budget"] = {{"max_states", r.budget.max_states}, {"max_depth", r.budget.max_depth}};
  const CertifyOptions& o = r.options;
  Json opt;
  opt["ast_n"] = o.ast_n ? Json(*o.ast_n) : Json(nullptr);
  opt["ast_n_max"] = o.ast_n_max;
  opt["ui_n_max"] = o.ui.n_max;
  opt["cdb_c"] = optional_rational(o.ui.cdb_c);
  opt["sup_c"] = optional_rational(o.ui.sup_c);
  opt["solve_method"] = solve_method_name(o.solve.method);
  opt["exact_limit"] = o.solve.exact_limit;
  opt["max_iters"] = o.solve.max_iters;
  opt["mm_epsilon"] = optional_rational(o.mm_epsilon);
  j["options"] = std::move(opt);
  return j;
}

CertifyRequest request_from_json(const Json& j) {
  CertifyRequest r;
  r.loop = parse_program(j.at("program").get<std::string>());
  r.post = parse_expectation(j.at("post").get<std::string>());
  const Json& bound = j.at("bound");
  if (bound.contains("table")) {
    r.bound = Bound(table_from_json(bound["table"]));
  } else {
    r.bound = Bound(parse_expectation(bound.at("expr").get<std::string>()));
  }
  const Json& spec = j.at("strengthening");
  r.spec.base = parse_guard(spec.at("base").get<std::string>());
  r.spec.resulting = parse_guard(spec.at("guard").get<std::string>());
  r.spec.by_construction = spec.at("by_construction").get<bool>();
  r.inner = parse_inner_rule(j.at("inner").get<std::string>());
  for (const Json& s : j.at("domain")) r.domain.push_back(parse_state(s.get<std::string>()));
  const Json& budget = j.at("budget");
  r.budget.max_states = budget.at("max_states").get<std::size_t>();
  r.budget.max_depth = budget.at("max_depth").get<unsigned>();
  const Json& o = j.at("options");
  if (!o.at("ast_n").is_null()) r.options.ast_n = o["ast_n"].get<unsigned>();
  r.options.ast_n_max = o.at("ast_n_max").get<unsigned>();
  r.options.ui.n_max = o.at("ui_n_max").get<unsigned>();
  r.options.ui.cdb_c = optional_rational(o, "cdb_c");
  r.options.ui.sup_c = optional_rational(o, "sup_c");
  r.options.solve.method = parse_solve_method(o.at("solve_method").get<std::string>());
  r.options.solve.exact_limit = o.at("exact_limit").get<std::size_t>();
  r.options.solve.max_iters = o.at("max_iters").get<unsigned long>();
  r.options.mm_epsilon = optional_rational(o, "mm_epsilon");
  return r;
}

Json certificate_json(const Certificate& c, const CertifyRequest& r) {
  Json j;
  j["rule"] = rule_name(c.rule);
  j["verdict"] = verdict_name(c.verdict);
  j["loop"] = c.loop;
  j["post"] = c.post;
  j["bound"] = c.bound;
  j["domain_size"] = c.domain.size();
  Json conds = Json::array();
  for (const SideCondition& s : c.conditions) conds.push_back(condition_json(s));
  j["conditions"] = std::move(conds);
  j["conclusion"] = c.conclusion ? table_json(*c.conclusion) : Json(nullptr);
  j["request"] = request_json(r);
  return j;
}

Replay replay_certificate(const Json& certificate) {
  Replay out;
  CertifyRequest r = request_from_json(certificate.at("request"));
  Json again = certificate_json(certify_lower_bound(r), r);
  if (again == certificate) {
    out.matches = true;
    return out;
  }
  Json patch = Json::diff(certificate, again);
  out.detail = patch.empty() ? "documents differ" : patch.front().dump();
  return out;
}

Json estimate_json(const Estimate& e) {
  Json j;
  j["mean"] = e.mean;
  j["mean_exact"] = to_string(e.exact_mean);
  j["trials"] = e.trials;
  j["cutoffs"] = e.cutoffs;
  j["cutoff_fraction"] = e.cutoff_fraction;
  j["half_width_99"] = e.half_width;
  j["seed"] = e.seed;
  return j;
}

Json outcome_json(const SimOutcome& o) {
  Json j;
  j["status"] = o.status == SimStatus::TERMINATED ? "TERMINATED" : "CUTOFF";
  j["final_state"] = o.status == SimStatus::TERMINATED ? Json(o.final_state.str()) : Json(nullptr);
  j["steps"] = o.steps;
  j["trace_length"] = o.trace_length;
  return j;
}

StrengthenTemplate template_from_json(const Json& j) {
  StrengthenTemplate t;
  if (j.contains("bounds")) {
    for (const Json& b : j["bounds"]) {
      BoxBound bb;
      if (b.contains("var")) {
        bb.lhs = arith::var(b["var"].get<std::string>());
      } else if (b.contains("expr")) {
        bb.lhs = parse_arith(b["expr"].get<std::string>());
      } else {
        throw Error("strengthening bound needs 'var' or 'expr'");
      }
      bb.op = parse_cmp(b.at("op").get<std::string>());
      const Json& c = b.at("c");
      bb.bound = c.is_string() ? parse_arith(c.get<std::string>()) : arith::lit(rational_from_json(c));
      t.bounds.push_back(std::move(bb));
    }
  }
  if (j.contains("conjuncts")) {
    for (const Json& g : j["conjuncts"]) t.extra.push_back(parse_guard(g.get<std::string>()));
  }
  if (j.contains("guard") && !j["guard"].is_null()) t.replacement = parse_guard(j["guard"].get<std::string>());
  return t;
}

std::string sweep_param(const Json& j) {
  if (!j.contains("sweep")) return "";
  return j["sweep"].value("param", "");
}

std::vector<Rational> sweep_values(const Json& j) {
  if (!j.contains("sweep")) return {};
  const Json& s = j["sweep"];
  if (s.contains("values")) {
    std::vector<Rational> out;
    for (const Json& v : s["values"]) out.push_back(rational_from_json(v));
    return out;
  }
  Rational from = rational_from_json(s.at("from"));
  Rational to = rational_from_json(s.at("to"));
  if (s.contains("factor")) return geometric_schedule(from, to, rational_from_json(s["factor"]));
  return linear_schedule(from, to, s.contains("step") ? rational_from_json(s["step"]) : Rational(1));
}

std::string fill_placeholders(const std::string& text, const std::map<std::string, Rational>& params) {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t open = text.find('{', i);
    if (open == std::string::npos) {
      out += text.substr(i);
      break;
    }
    std::size_t close = text.find('}', open);
    if (close == std::string::npos) throw Error("unbalanced '{' in '" + text + "'");
    out += text.substr(i, open - i);
    Arith e = parse_arith(text.substr(open + 1, close - open - 1));
    for (const auto& [name, value] : params) e = substitute(e, name, arith::lit(value));
    out += to_string(eval_constant(e));
    i = close + 1;
  }
  return out;
}

}  // namespace pgcl
